"""Scalar functionals of cube functions: entropy, Orlicz norms, gradients, moments.

Most routines have a public form taking a :class:`CubeFunction` and a private
array form working on ``values`` of shape (..., 2**n, dim) so that the search
and the verifier can evaluate whole batches of functions at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import (CubeFunction, derivative_stack, evaluate_extension,
                   to_coefficients, vertices)
from .errors import (ConfigError, DegenerateInput, DimensionMismatch,
                     ExactTooLarge, IndexOutOfRange, InvalidEpsilon,
                     InvalidExponent, NegativeInput, Overflow, ZeroMoment)
from .spaces import dual_norm, norm, singular_values

EXACT_MAX_N = 20
MC_SAMPLES = 4096
WEAK_RESTARTS = 40
WEAK_ITERS = 200
ORLICZ_MAX_ITER = 200
ORLICZ_RTOL = 1e-12
EXP_ARG_MAX = 700.0
MAX_SERIES_TERMS = 200


@dataclass(frozen=True)
class GradientMode:
    """Which Lipschitz gradient to use.

    ``tag`` is ``"gamma"`` (sum of squared derivative norms), ``"P"`` (Rademacher
    average of the signed derivative sum) or ``"weak"`` (supremum over the dual
    sphere). For ``"P"`` the sign average is ``"exact"``, ``"montecarlo"`` or
    ``"auto"`` (exact up to n = 20, Monte Carlo above).
    """

    tag: str = "P"
    strategy: str = "auto"
    samples: int = MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.tag not in ("gamma", "P", "weak"):
            raise ConfigError(f"unknown gradient mode {self.tag!r}")
        if self.strategy not in ("auto", "exact", "montecarlo"):
            raise ConfigError(f"unknown sign strategy {self.strategy!r}")
        if self.samples < 1:
            raise ConfigError("Monte Carlo sample count must be positive")

    def label(self):
        if self.tag != "P":
            return self.tag
        if self.strategy == "montecarlo":
            return f"P-mc{self.samples}"
        return "P" if self.strategy == "auto" else "P-exact"


GAMMA = GradientMode("gamma")
P_EXACT = GradientMode("P", "exact")
P_AUTO = GradientMode("P", "auto")
WEAK = GradientMode("weak")


def parse_mode(text):
    text = text.lower()
    if text in ("gamma", "g"):
        return GAMMA
    if text in ("p", "p-exact", "exact"):
        return P_EXACT
    if text.startswith("p-mc"):
        return GradientMode("P", "montecarlo", int(text[4:] or MC_SAMPLES))
    if text == "weak":
        return WEAK
    raise ConfigError(f"unknown gradient mode {text!r}")


# -- entropy and Orlicz norms -------------------------------------------------

def _scalar_values(g):
    if isinstance(g, CubeFunction):
        if g.dim != 1:
            raise DimensionMismatch("expected a scalar-valued function")
        return g.values[:, 0]
    return np.asarray(g, dtype=np.float64)


def entropy(h):
    """Ent(h) = E h log h - E h log E h for h >= 0 along the last axis, 0 log 0 = 0."""
    h = np.asarray(h, dtype=np.float64)
    if np.any(h < 0):
        raise NegativeInput("entropy needs a nonnegative function")
    m = h.mean(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(h > 0, h * np.log(h / np.where(m > 0, m, 1.0)), 0.0)
    return np.maximum(terms.mean(axis=-1), 0.0)


def entropy_sq(g):
    """E g^2 log g^2 - E g^2 log E g^2 for a nonnegative scalar function g."""
    v = _scalar_values(g)
    if np.any(v < 0):
        raise NegativeInput("entropy_sq needs g >= 0")
    return float(entropy(v * v))


def young(t, p):
    """Psi_p(t) = t^p log^{p/2}(e + t^2); Psi_2 is the L^2 log L Young function."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(over="ignore"):
        return t ** p * np.log(math.e + t * t) ** (p / 2.0)


def orlicz_norm(g, p=2.0):
    """Luxemburg norm inf{lam > 0 : E Psi_p(g / lam) <= 1} by bisection.

    The bracket is [1e-12 max g, 10 max g]; iteration stops after 200 halvings
    or once the bracket width drops below 1e-12 relative.
    """
    v = _scalar_values(g)
    if np.any(v < 0):
        raise NegativeInput("orlicz_norm needs g >= 0")
    if p < 1:
        raise InvalidExponent(f"Orlicz exponent must be >= 1, got {p}")
    top = float(v.max(initial=0.0))
    if top == 0.0:
        return 0.0
    lo, hi = 1e-12 * top, 10.0 * top
    for _ in range(ORLICZ_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if young(v / mid, p).mean() > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= ORLICZ_RTOL * hi:
            break
    return 0.5 * (lo + hi)


def m_gradient(g):
    """Talagrand's one-sided gradient Mg = (sum_i [(D_i g)_+]^2)^{1/2}."""
    if g.dim != 1:
        raise DimensionMismatch("m_gradient needs a scalar function")
    d = derivative_stack(g.values, g.n)[..., 0]
    pos = np.maximum(d, 0.0)
    return CubeFunction(g.n, 1, np.sqrt((pos * pos).sum(axis=-1))[:, None])


def dirichlet_form(g):
    """E sum_i (D_i g)^2 for a scalar function."""
    d = derivative_stack(g.values, g.n)
    return float((d * d).sum(axis=(-2, -1)).mean())


# -- Lipschitz gradients ------------------------------------------------------

def _sign_matrix(n):
    """Sign vectors with delta_1 = +1; delta and -delta give the same norm."""
    if n == 1:
        return np.ones((1, 1))
    tail = vertices(n - 1)
    return np.concatenate((np.ones((tail.shape[0], 1)), tail), axis=1)


def _mc_signs(seed, vertex, k, n):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(vertex),))
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.choice(np.array([-1.0, 1.0]), size=(k, n))


def _p_strategy(mode, n):
    if mode.strategy == "exact":
        if n > EXACT_MAX_N:
            raise ExactTooLarge(f"exact sign enumeration needs n <= {EXACT_MAX_N}, got {n}")
        return "exact"
    if mode.strategy == "auto":
        return "exact" if n <= EXACT_MAX_N else "montecarlo"
    return "montecarlo"


def _p_gradient(space, dstack, n, mode, ids=None):
    """Rademacher average of ||sum delta_i D_i f||^2 for every vertex.

    ``ids`` names the vertex of each row of ``dstack``; it keys the Monte
    Carlo generator so that a vertex sees the same signs however it is batched.
    """
    lead = dstack.shape[:-3]
    nv = dstack.shape[-3]
    dim = dstack.shape[-1]
    if _p_strategy(mode, n) == "exact":
        signs = _sign_matrix(n)
        out = np.empty(lead + (nv,))
        per_vertex = signs.shape[0] * dim * max(1, int(np.prod(lead, dtype=np.int64)))
        chunk = max(1, (1 << 22) // per_vertex)
        for start in range(0, nv, chunk):
            part = dstack[..., start:start + chunk, :, :]
            combos = np.einsum("sn,...vnd->...vsd", signs, part)
            r = norm(space, combos)
            out[..., start:start + chunk] = (r * r).mean(axis=-1)
        return out
    out = np.empty(lead + (nv,))
    ids = range(nv) if ids is None else ids
    for v, vid in enumerate(ids):
        signs = _mc_signs(mode.seed, vid, mode.samples, n)
        combos = np.einsum("sn,...nd->...sd", signs, dstack[..., v, :, :])
        r = norm(space, combos)
        out[..., v] = (r * r).mean(axis=-1)
    return out


def _weak_gradient_ascent(space, dstack, seed=0):
    """Lower bound on sup over the dual sphere of sum_i <xi, D_i f>^2.

    Projected gradient ascent with radial projection onto the dual sphere
    (exact projection for this 2-homogeneous objective), 40 random restarts.
    """
    lead = dstack.shape[:-2]
    dim = dstack.shape[-1]
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(lead + (WEAK_RESTARTS, dim))
    xi /= dual_norm(space, xi)[..., None]
    vmat = dstack[..., None, :, :]

    def objective(z):
        pair = np.einsum("...rnd,...rd->...rn", np.broadcast_to(vmat, z.shape[:-1] + vmat.shape[-2:]), z)
        return (pair * pair).sum(axis=-1), pair

    best, pair = objective(xi)
    step = np.ones(best.shape)
    for _ in range(WEAK_ITERS):
        grad = 2.0 * np.einsum("...rn,...nd->...rd", pair, dstack)
        cand = xi + step[..., None] * grad
        cnorm = dual_norm(space, cand)
        ok = cnorm > 0
        cand = cand / np.where(ok, cnorm, 1.0)[..., None]
        val, cpair = objective(cand)
        improve = ok & (val >= best)
        xi = np.where(improve[..., None], cand, xi)
        pair = np.where(improve[..., None], cpair, pair)
        best = np.where(improve, val, best)
        step = np.where(improve, step * 1.5, step * 0.5)
    return best.max(axis=-1)


def _gradient_values(values, n, space, mode):
    """Squared gradient at every vertex for a batch of value arrays."""
    if values.shape[-1] != space.ambient_dim:
        raise DimensionMismatch(
            f"function dim {values.shape[-1]} does not match {space.label()} ({space.ambient_dim})")
    if mode.tag == "P":
        _p_strategy(mode, n)
    return _gradient_from_stack(derivative_stack(values, n), n, space, mode)


def _gradient_from_stack(dstack, n, space, mode, ids=None):
    if mode.tag == "gamma" or (mode.tag == "P" and space.is_hilbert):
        # Cross terms of E ||sum delta_i v_i||^2 cancel in an inner-product space.
        r = norm(space, dstack)
        return (r * r).sum(axis=-1)
    if mode.tag == "P":
        return _p_gradient(space, dstack, n, mode, ids)
    if space.is_hilbert:
        sv = singular_values(dstack)
        return sv[..., 0] ** 2
    return _weak_gradient_ascent(space, dstack, seed=mode.seed)


def is_exact_gradient(space, mode):
    """False when the gradient is only an ascent lower bound (weak mode outside Hilbert spaces)."""
    return not (mode.tag == "weak" and not space.is_hilbert)


def gradient_field(f, space, mode=P_AUTO):
    """Squared gradient at all 2**n vertices, as an array."""
    return _gradient_values(f.values, f.n, space, mode)


def gradient_sq(f, space, mode, x):
    """Squared gradient at vertex index ``x``.

    Gamma: sum_i ||D_i f(x)||^2. P: E_delta ||sum_i delta_i D_i f(x)||^2.
    Weak: sup over the dual sphere of sum_i <xi, D_i f(x)>^2, exact in
    scalar/Euclidean spaces and an ascent lower bound otherwise (see
    :func:`is_exact_gradient`).
    """
    if not 0 <= x < f.size:
        raise IndexOutOfRange(f"vertex index {x} outside 0..{f.size - 1}")
    if f.dim != space.ambient_dim:
        raise DimensionMismatch(
            f"function dim {f.dim} does not match {space.label()} ({space.ambient_dim})")
    if mode.tag == "P":
        _p_strategy(mode, f.n)
    flips = x ^ (1 << np.arange(f.n))
    dstack = ((f.values[x] - f.values[flips]) / 2)[None]
    return float(_gradient_from_stack(dstack, f.n, space, mode, ids=[x])[0])


def sup_gradient_sq(f, space, mode=P_AUTO):
    return float(gradient_field(f, space, mode).max())


def lipschitz_normalize(f, space, mode=P_AUTO):
    """Rescale ``f`` so that its sup squared gradient equals 1.

    Every gradient is 2-homogeneous, so dividing by the square root of the sup
    is an exact projection onto the Lipschitz constraint.
    """
    s = sup_gradient_sq(f, space, mode)
    if not s > 0:
        raise DegenerateInput("cannot normalize a constant function")
    return f.scaled(1.0 / math.sqrt(s))


# -- moments ------------------------------------------------------------------

def norms(f, space, center=True):
    """||f(x) - E f||_E (or ||f(x)||_E) at every vertex."""
    v = f.values
    if center:
        v = v - v.mean(axis=0)
    return norm(space, v)


def moment_from_norms(r, p):
    return float(np.mean(r ** p))


def log_derivative_from_norms(r, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(r > 0, r ** p * np.log(np.where(r > 0, r, 1.0)), 0.0)
    return float(terms.mean())


def moment(f, space, p, center=True):
    """a(p) = E ||f - E f||^p (or E ||f||^p when ``center`` is False)."""
    if not p >= 1:
        raise InvalidExponent(f"moment exponent must be >= 1, got {p}")
    return moment_from_norms(norms(f, space, center), p)


def beta(f, space, p, center=True):
    """log a(p) / p."""
    a = moment(f, space, p, center)
    if a <= 0:
        raise ZeroMoment("a(p) = 0: the function is constant")
    return math.log(a) / p


def moment_log_derivative(f, space, p, center=True):
    """a'(p) = E ||f||^p log ||f||, with 0^p log 0 = 0."""
    if not p >= 1:
        raise InvalidExponent(f"moment exponent must be >= 1, got {p}")
    return log_derivative_from_norms(norms(f, space, center), p)


def beta_derivative_from_norms(r, p):
    a = moment_from_norms(r, p)
    if a <= 0:
        raise ZeroMoment("a(p) = 0: the function is constant")
    return log_derivative_from_norms(r, p) / (p * a) - math.log(a) / (p * p)


def _check_exp_args(r, tau):
    arg = tau * r * r
    if np.any(arg > EXP_ARG_MAX):
        raise Overflow(f"exponent argument {arg.max():.1f} exceeds {EXP_ARG_MAX}")
    return arg


def exp_moment(f, space, tau, center=True):
    """E exp(tau ||f - E f||^2)."""
    if not tau > 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    arg = _check_exp_args(norms(f, space, center), tau)
    return float(np.exp(arg).mean())


def sigma_partial_sums(f, space, tau, terms, center=True):
    """Partial sums S_k = sum_{j<=k} tau^j a(2j) / j!, k = 0..terms-1.

    Each summand is averaged from per-vertex terms built by the recurrence
    t_j = t_{j-1} tau r^2 / j, which avoids forming r^{2j} and j! separately.
    """
    if not tau > 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    if not 1 <= terms <= MAX_SERIES_TERMS:
        raise ConfigError(f"number of terms must be in 1..{MAX_SERIES_TERMS}")
    arg = _check_exp_args(norms(f, space, center), tau)
    t = np.ones_like(arg)
    total = 0.0
    out = []
    for j in range(terms):
        if j:
            t = t * arg / j
        total += float(t.mean())
        out.append(total)
    return out


# -- chord slopes of the separately convex extension --------------------------

def section_values(coeffs, space, p, base, i, s):
    """h(s) = ||F(base with coordinate i set to s)||^{p/2} for an array of s."""
    s = np.asarray(s, dtype=np.float64)
    pts = np.broadcast_to(np.asarray(base, dtype=np.float64), s.shape + (coeffs.n,)).copy()
    pts[..., i - 1] = s
    return norm(space, evaluate_extension(coeffs, pts)) ** (p / 2.0)


def outward_chord_slope(f, space, p, x, i, eps, coeffs=None):
    """Slope of h over the interval leaving the cube from vertex ``x`` along ``i``.

    With ``x_i = +1`` this is (h(1 + eps) - h(1)) / eps; with ``x_i = -1`` it is
    (h(-1 - eps) - h(-1)) / eps, i.e. the slope measured in the outward
    direction. Signed; it is nondecreasing in ``eps`` because h is convex.
    """
    if not eps > 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {eps}")
    if not p >= 2:
        raise InvalidExponent(f"chord slopes need p >= 2, got {p}")
    if not 1 <= i <= f.n:
        raise IndexOutOfRange(f"coordinate {i} outside 1..{f.n}")
    if coeffs is None:
        coeffs = to_coefficients(f)
    base = vertices(f.n)[x]
    xi = base[i - 1]
    h = section_values(coeffs, space, p, base, i, np.array([xi, xi * (1.0 + eps)]))
    return float((h[1] - h[0]) / eps)
