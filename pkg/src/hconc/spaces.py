"""Target spaces E: norms, Schatten machinery and the cotype registry.

Matrices are real d x d and stored row-major in a length d*d vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, InvalidExponent, NoConvergence,
                     NotPSD, UnsupportedSpace)

KINDS = ("scalar", "euclidean", "schatten", "operator")

SVD_MAX_SWEEPS = 60
SVD_TOL = 1e-14
EIG_TOL = 1e-12
PSD_NEG_TOL = 1e-10


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: str
    d: int = 1
    p: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedSpace(f"unknown space kind {self.kind!r}")
        if self.d < 1:
            raise DimensionMismatch(f"space dimension must be positive, got {self.d}")
        if self.kind == "scalar" and self.d != 1:
            raise DimensionMismatch("scalar space has d = 1")
        if self.kind == "schatten":
            if self.p is None or not self.p >= 2:
                raise InvalidExponent(f"Schatten exponent must be >= 2, got {self.p}")
            if math.isinf(self.p):
                raise InvalidExponent("use the operator space for p = inf")

    @property
    def ambient_dim(self):
        if self.kind in ("schatten", "operator"):
            return self.d * self.d
        return self.d

    @property
    def is_matrix(self):
        return self.kind in ("schatten", "operator")

    @property
    def is_hilbert(self):
        return self.kind in ("scalar", "euclidean")

    @property
    def cotype_Q(self):
        return cotype_of(self)[0]

    @property
    def cotype_C(self):
        return cotype_of(self)[1]

    def label(self):
        if self.kind == "scalar":
            return "scalar"
        if self.kind == "schatten":
            return f"schatten(p={self.p:g},d={self.d})"
        return f"{self.kind}(d={self.d})"

    def to_dict(self):
        doc = {"kind": self.kind, "d": self.d}
        if self.kind == "schatten":
            doc["p"] = float(self.p)
        return doc


def scalar():
    return SpaceDescriptor("scalar")


def euclidean(d):
    return SpaceDescriptor("euclidean", int(d))


def schatten(p, d):
    return SpaceDescriptor("schatten", int(d), float(p))


def operator(d):
    return SpaceDescriptor("operator", int(d))


def space_from_dict(doc):
    kind = doc.get("kind")
    if kind == "scalar":
        return scalar()
    if kind not in KINDS:
        raise UnsupportedSpace(f"unknown space kind {kind!r}")
    if "d" not in doc:
        raise DimensionMismatch(f"space {kind!r} needs a dimension 'd'")
    if kind == "schatten":
        if "p" not in doc:
            raise InvalidExponent("schatten space needs an exponent 'p'")
        return schatten(doc["p"], doc["d"])
    return SpaceDescriptor(kind, int(doc["d"]))


def cotype_of(space):
    """Registered cotype pair ``(Q, C)``.

    Schatten S_p carries (p, 1) and the operator norm on d x d matrices
    (log d, 1) with the natural logarithm. Scalar and Euclidean spaces use the
    Hilbert-space pair (2, 1), a standard fact supplied by this registry.
    """
    if space.kind == "schatten":
        return float(space.p), 1.0
    if space.kind == "operator":
        if space.d < 3:
            raise UnsupportedSpace("operator-norm cotype needs d >= 3 so that log d > 1")
        return math.log(space.d), 1.0
    if space.kind in ("scalar", "euclidean"):
        return 2.0, 1.0
    raise UnsupportedSpace(space.kind)


def singular_values(a):
    """Singular values of a (batch of) real matrices by one-sided Jacobi.

    ``a`` has shape (..., m, k); the result has shape (..., min(m, k)) and is
    sorted in nonincreasing order. A column pair is rotated while its inner
    product exceeds ``1e-14 * ||A||_F**2``; more than 60 sweeps raises
    NoConvergence.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim < 2:
        raise DimensionMismatch("singular_values expects a matrix")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("matrix entries must be finite")
    if a.shape[-1] > a.shape[-2]:
        a = np.swapaxes(a, -1, -2).copy()
    batch = a.shape[:-2]
    m, k = a.shape[-2:]
    a = a.reshape((-1, m, k))
    fro2 = np.einsum("bij,bij->b", a, a)
    tol = SVD_TOL * fro2
    for _ in range(SVD_MAX_SWEEPS):
        rotated = False
        for j in range(k - 1):
            for l in range(j + 1, k):
                aj = a[:, :, j]
                al = a[:, :, l]
                alpha = np.einsum("bi,bi->b", aj, aj)
                beta = np.einsum("bi,bi->b", al, al)
                gamma = np.einsum("bi,bi->b", aj, al)
                act = np.abs(gamma) > tol
                if not act.any():
                    continue
                rotated = True
                g = np.where(act, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                sgn = np.where(zeta >= 0, 1.0, -1.0)
                t = np.where(act, sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_j = c[:, None] * aj - s[:, None] * al
                new_l = s[:, None] * aj + c[:, None] * al
                a[:, :, j] = new_j
                a[:, :, l] = new_l
        if not rotated:
            sv = np.sqrt(np.einsum("bij,bij->bj", a, a))
            sv = -np.sort(-sv, axis=-1)
            return sv.reshape(batch + (k,))
    raise NoConvergence(f"Jacobi SVD did not converge in {SVD_MAX_SWEEPS} sweeps")


def symmetric_eigenvalues(a):
    """Eigenvalues of a (batch of) real symmetric matrices by cyclic Jacobi.

    Off-diagonal entries below ``1e-12 * ||A||_F`` are treated as zero. The
    result is sorted in nonincreasing order.
    """
    a = np.array(a, dtype=np.float64)
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    batch = a.shape[:-2]
    d = a.shape[-1]
    a = a.reshape((-1, d, d))
    tol = EIG_TOL * np.sqrt(np.einsum("bij,bij->b", a, a))
    for _ in range(SVD_MAX_SWEEPS):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                act = np.abs(apq) > tol
                if not act.any():
                    continue
                rotated = True
                g = np.where(act, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * g)
                sgn = np.where(theta >= 0, 1.0, -1.0)
                t = np.where(act, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
                c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
                s = c * t[:, None]
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = c * rp - s * rq
                a[:, q, :] = s * rp + c * rq
                cp = a[:, :, p].copy()
                cq = a[:, :, q].copy()
                a[:, :, p] = c * cp - s * cq
                a[:, :, q] = s * cp + c * cq
        if not rotated:
            ev = np.diagonal(a, axis1=-2, axis2=-1)
            ev = -np.sort(-ev, axis=-1)
            return ev.reshape(batch + (d,))
    raise NoConvergence(f"Jacobi eigensolver did not converge in {SVD_MAX_SWEEPS} sweeps")


def psd_sqrt_singular_values(a):
    """Singular values of the square root of a PSD matrix (batch).

    Eigenvalues in [-1e-10, 0] are clamped to zero; anything more negative
    raises NotPSD.
    """
    ev = symmetric_eigenvalues(a)
    if np.any(ev < -PSD_NEG_TOL):
        raise NotPSD(f"matrix has eigenvalue {ev.min():.3e} < -{PSD_NEG_TOL}")
    return np.sqrt(np.clip(ev, 0.0, None))


def schatten_from_sv(sv, p):
    """(sum sigma_k**p)**(1/p) along the last axis; p = inf gives the max."""
    if math.isinf(p):
        return sv.max(axis=-1)
    top = sv.max(axis=-1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return safe[..., 0] * ((sv / safe) ** p).sum(axis=-1) ** (1.0 / p)


def as_matrices(v, d):
    v = np.asarray(v, dtype=np.float64)
    return v.reshape(v.shape[:-1] + (d, d))


def norm(space, v):
    """||v||_E along the last axis of ``v`` (batch-friendly)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1:] != (space.ambient_dim,):
        raise DimensionMismatch(
            f"{space.label()} expects vectors of length {space.ambient_dim}, got shape {v.shape}")
    if space.kind == "scalar":
        return np.abs(v[..., 0])
    if space.kind == "euclidean":
        return np.sqrt(np.einsum("...i,...i->...", v, v))
    sv = singular_values(as_matrices(v, space.d))
    if space.kind == "operator":
        return sv[..., 0]
    return schatten_from_sv(sv, space.p)


def dual_norm(space, v):
    """Norm of ``v`` in the dual space E*, pairing by the Euclidean/trace inner product."""
    v = np.asarray(v, dtype=np.float64)
    if space.is_hilbert:
        return norm(space, v)
    sv = singular_values(as_matrices(v, space.d))
    if space.kind == "operator":
        return sv.sum(axis=-1)
    q = space.p / (space.p - 1.0)
    return schatten_from_sv(sv, q)


def registry():
    """Human-readable listing of supported spaces and their cotype data."""
    return [
        {"kind": "scalar", "Q": 2.0, "C": 1.0,
         "note": "Hilbert-space cotype, standard fact"},
        {"kind": "euclidean", "Q": 2.0, "C": 1.0,
         "note": "Hilbert-space cotype, standard fact"},
        {"kind": "schatten", "Q": "p", "C": 1.0, "note": "S_p, 2 <= p < inf"},
        {"kind": "operator", "Q": "log d (natural)", "C": 1.0, "note": "requires d >= 3"},
    ]
