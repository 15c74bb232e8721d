"""Functions on the Hamming cube {-1, 1}^n and their Walsh-Fourier expansion.

Vertex index convention: index ``b`` encodes the point ``x(b)`` with
``x_i = +1`` when bit ``i-1`` of ``b`` is 0 and ``x_i = -1`` when it is 1.
Fourier masks use the same bit positions: mask ``m`` is the subset
``{i : bit i-1 of m is 1}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch, NonFinite, NTooLarge

MAX_N = 24


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CubeFunction:
    """Values of ``f`` at all ``2**n`` vertices; ``values`` has shape (2**n, dim)."""

    n: int
    dim: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))

    @property
    def size(self):
        return self.values.shape[0]

    def scaled(self, c):
        return CubeFunction(self.n, self.dim, self.values * c)

    def centered(self):
        return CubeFunction(self.n, self.dim, self.values - self.values.mean(axis=0))

    def __call__(self, x):
        """Value at a vertex given as a +-1 sequence."""
        return self.values[vertex_index(x)]


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """``coeffs[m]`` is the vector coefficient of the monomial ``prod_{i in S(m)} x_i``."""

    n: int
    dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _readonly(self.coeffs))


def from_values(n, dim, values):
    """Validate and wrap raw vertex values.

    ``values`` may be a flat sequence when ``dim == 1``.
    """
    n, dim = int(n), int(dim)
    if n > MAX_N:
        raise NTooLarge(f"n={n} exceeds the enumeration cap {MAX_N}")
    if n < 1:
        raise LengthMismatch(f"n must be at least 1, got {n}")
    if dim < 1:
        raise LengthMismatch(f"dim must be at least 1, got {dim}")
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1 and dim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != 1 << n or arr.shape[1] != dim:
        raise LengthMismatch(
            f"expected values of shape ({1 << n}, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("function values must be finite")
    return CubeFunction(n, dim, arr.copy())


def vertex_index(x):
    b = 0
    for i, xi in enumerate(x):
        if xi == -1:
            b |= 1 << i
        elif xi != 1:
            raise ValueError(f"vertex coordinates must be +-1, got {xi}")
    return b


def vertex(n, b):
    """The point x(b) as an int array of +-1."""
    return 1 - 2 * ((b >> np.arange(n)) & 1)


def vertices(n):
    """All vertices as a (2**n, n) array, row ``b`` is ``x(b)``."""
    b = np.arange(1 << n)[:, None]
    return (1 - 2 * ((b >> np.arange(n)) & 1)).astype(np.float64)


def fwht(a, axis=-2):
    """Unnormalized Walsh-Hadamard transform along ``axis`` (length a power of 2).

    Butterfly stages run over bits from low to high; the transform is its own
    inverse up to a factor ``2**n``.
    """
    a = np.moveaxis(np.array(a, dtype=np.float64), axis, -1)
    size = a.shape[-1]
    n = size.bit_length() - 1
    if 1 << n != size:
        raise LengthMismatch(f"transform length {size} is not a power of two")
    lead = a.shape[:-1]
    h = 1
    for _ in range(n):
        blocks = a.reshape(*lead, size // (2 * h), 2, h)
        lo = blocks[..., 0, :]
        hi = blocks[..., 1, :]
        a = np.stack((lo + hi, lo - hi), axis=-2).reshape(*lead, size)
        h *= 2
    return np.moveaxis(a, -1, axis)


def to_coefficients(f):
    coeffs = fwht(f.values) * 2.0 ** (-f.n)
    return FourierCoefficients(f.n, f.dim, coeffs)


def from_coefficients(c):
    """Re-synthesize vertex values from Fourier coefficients."""
    return CubeFunction(c.n, c.dim, fwht(c.coeffs))


def monomials(points):
    """``out[..., m] = prod_{i in S(m)} points[..., i]`` for every mask ``m``."""
    points = np.asarray(points, dtype=np.float64)
    out = np.ones(points.shape[:-1] + (1,))
    for i in range(points.shape[-1]):
        out = np.concatenate((out, out * points[..., i:i + 1]), axis=-1)
    return out


def evaluate_extension(c, point):
    """Multilinear extension ``F(point) = sum_S c_S prod_{i in S} point_i``.

    ``point`` may carry leading batch axes; the last axis has length ``n``.
    """
    point = np.asarray(point, dtype=np.float64)
    if point.shape[-1:] != (c.n,):
        raise LengthMismatch(f"point must have {c.n} coordinates, got shape {point.shape}")
    if not np.all(np.isfinite(point)):
        raise NonFinite("extension point must be finite")
    return monomials(point) @ c.coeffs


def flip_index(n, i):
    """Index permutation sending ``x`` to ``x`` with coordinate ``i`` (1-based) negated."""
    return np.arange(1 << n) ^ (1 << (i - 1))


def discrete_derivative(f, i):
    """``(D_i f)(x) = (f(x) - f(x with x_i flipped)) / 2``."""
    if not 1 <= i <= f.n:
        raise IndexOutOfRange(f"coordinate {i} outside 1..{f.n}")
    v = f.values
    return CubeFunction(f.n, f.dim, (v - v[flip_index(f.n, i)]) / 2)


def derivative_stack(values, n):
    """All discrete derivatives at once.

    ``values`` has shape (..., 2**n, dim); the result has shape
    (..., 2**n, n, dim) with ``out[..., b, i-1, :] = D_i f(x(b))``.
    """
    parts = []
    for i in range(1, n + 1):
        parts.append((values - values[..., flip_index(n, i), :]) / 2)
    return np.stack(parts, axis=-2)


def expectation(f):
    return f.values.mean(axis=0)


def function_to_dict(f, space=None):
    doc = {"n": f.n, "dim": f.dim, "values": f.values.tolist()}
    if space is not None:
        doc["space"] = space.to_dict()
    return doc


def load_function(path):
    """Read a function file; returns ``(CubeFunction, SpaceDescriptor or None)``."""
    from .spaces import space_from_dict

    with open(path) as fh:
        doc = json.load(fh)
    try:
        f = from_values(doc["n"], doc["dim"], doc["values"])
    except KeyError as exc:
        raise LengthMismatch(f"function file is missing key {exc}") from None
    space = space_from_dict(doc["space"]) if "space" in doc else None
    return f, space
