"""Matrix-valued functions: the two matrix Lipschitz gradients and moment bounds.

A matrix function is a :class:`CubeFunction` with ``dim = d*d`` whose values
are real d x d matrices stored row-major. ``p = inf`` means the operator norm.
"""

from __future__ import annotations

import math

import numpy as np

from . import spaces
from .cube import CubeFunction, derivative_stack
from .errors import (DimensionMismatch, InvalidExponent, InvalidRange,
                     NotLipschitz, PreconditionViolated, ZeroDenominator)
from .functionals import P_AUTO, GradientMode, gradient_field, gradient_sq
from .spaces import (as_matrices, psd_sqrt_singular_values, schatten_from_sv,
                     singular_values)
from .util import pmap
from .verifier import LIP_TOL, judge


def matrix_dim(f):
    d = int(round(math.sqrt(f.dim)))
    if d * d != f.dim:
        raise DimensionMismatch(f"dim {f.dim} is not a perfect square")
    return d


def matrix_space(p, d):
    if not p >= 2:
        raise InvalidExponent(f"matrix exponent must be >= 2, got {p}")
    return spaces.operator(d) if math.isinf(p) else spaces.schatten(p, d)


def _k_from_stack(dmats, p):
    """K_p for derivative matrices of shape (..., n, d, d)."""
    row = np.einsum("...nij,...nkj->...ik", dmats, dmats)
    col = np.einsum("...nji,...njk->...ik", dmats, dmats)
    return (schatten_from_sv(psd_sqrt_singular_values(row), p)
            + schatten_from_sv(psd_sqrt_singular_values(col), p))


def k_sq_p_field(f, p):
    """K_p at every vertex: ||(sum D_i f D_i f^T)^{1/2}||_p + ||(sum D_i f^T D_i f)^{1/2}||_p.

    The square roots of the two Gram sums are taken through their Jacobi
    eigenvalues.
    """
    if not p >= 2:
        raise InvalidExponent(f"matrix exponent must be >= 2, got {p}")
    d = matrix_dim(f)
    dmats = as_matrices(derivative_stack(f.values, f.n), d)
    return _k_from_stack(dmats, p)


def k_sq_p(f, p, x):
    if not p >= 2:
        raise InvalidExponent(f"matrix exponent must be >= 2, got {p}")
    d = matrix_dim(f)
    dmats = as_matrices(derivative_stack(f.values, f.n)[x], d)
    return float(_k_from_stack(dmats, p))


def p_sq_p_raw(f, p, x, mode=P_AUTO):
    """E_delta ||sum delta_i D_i f(x)||_p^2 (no outer root)."""
    return gradient_sq(f, matrix_space(p, matrix_dim(f)), _as_p(mode), x)


def p_sq_p(f, p, x, mode=P_AUTO):
    """(E_delta ||sum delta_i D_i f(x)||_p^2)^{1/2}, the rooted matrix P-gradient."""
    return math.sqrt(p_sq_p_raw(f, p, x, mode))


def p_sq_p_field(f, p, mode=P_AUTO):
    return np.sqrt(gradient_field(f, matrix_space(p, matrix_dim(f)), _as_p(mode)))


def _as_p(mode):
    if mode.tag != "P":
        return GradientMode("P", mode.strategy, mode.samples, mode.seed)
    return mode


def khintchine_report(f, p, x, mode=P_AUTO):
    """Ratio P_p / K_p at vertex x next to the factor min(sqrt p, sqrt log d)."""
    k = k_sq_p(f, p, x)
    if k <= 0:
        raise ZeroDenominator("K_p vanishes at this vertex (locally constant f)")
    raw = p_sq_p_raw(f, p, x, mode)
    pr = math.sqrt(raw)
    d = matrix_dim(f)
    factor = min(math.sqrt(p), math.sqrt(math.log(d))) if d > 1 else 0.0
    params = {"p": p, "d": d, "x": int(x), "ratio": pr / k, "factor": factor,
              "P_rooted": pr, "P_raw": raw, "K": k}
    return judge("khintchine", pr, k, params, report_only=True)


def khintchine_field(f, p, mode=P_AUTO):
    """:func:`khintchine_report` at every vertex with K_p > 0, batched."""
    d = matrix_dim(f)
    ks = k_sq_p_field(f, p)
    raws = gradient_field(f, matrix_space(p, d), _as_p(mode))
    factor = min(math.sqrt(p), math.sqrt(math.log(d))) if d > 1 else 0.0
    out = []
    for x, (k, raw) in enumerate(zip(ks, raws)):
        if k <= 0:
            continue
        k, pr = float(k), math.sqrt(raw)
        params = {"p": p, "d": d, "x": x, "ratio": pr / k, "factor": factor,
                  "P_rooted": pr, "P_raw": float(raw), "K": float(k)}
        out.append(judge("khintchine", pr, k, params, report_only=True))
    return out


def check_schatten_vs_operator(a, p):
    """||A||_p <= d^{1/p} ||A||_op."""
    a = np.asarray(a, dtype=np.float64)
    d = a.shape[-1]
    sv = singular_values(a)
    lhs = float(schatten_from_sv(sv, p))
    rhs = d ** (1.0 / p) * float(sv[0])
    return judge("schatten_vs_operator", lhs, rhs, {"p": p, "d": d})


def m2_bound(p, d):
    """Both branches of the S_p moment bound; a branch is None outside its range."""
    L = math.log(d)
    first = p if 2 <= p <= L else None
    second = math.sqrt((2 * p - 1) + (L - 1) ** 2) if p >= L else None
    return first, second


def m3_bound(p, d, c2=1.0):
    L = math.log(d)
    first = c2 * d ** (1.0 / p) * p ** 1.5 if 2 <= p <= L else None
    second = c2 * math.sqrt(L) * math.sqrt((2 * p - 1) + (L - 1) ** 2) if p >= L else None
    return first, second


def _require_mean_zero(f):
    mean = f.values.mean(axis=0)
    scale = max(1.0, float(np.abs(f.values).max(initial=0.0)))
    if np.abs(mean).max() > 1e-9 * scale:
        raise PreconditionViolated("matrix moment bounds need E f = 0")


def _lipschitz(value, what):
    if value > 1.0 + LIP_TOL:
        raise NotLipschitz(f"sup {what} = {value:.6g} > 1")


def check_matrix_moments(f, p, variant, c2=1.0, mode=P_AUTO):
    """Moment bounds for mean-zero matrix functions.

    m1: operator-norm P-gradient <= 1 gives (E||f||_op^p)^{1/p} <= log d for
    p in [1, log d]. m2: rooted S_p P-gradient <= 1 gives the two-branch bound
    (p below log d, sqrt((2p-1) + (log d - 1)^2) above). m3: K_inf <= 1 gives
    the c2-scaled chain value; reported only, since c2 is unspecified.
    """
    d = matrix_dim(f)
    _require_mean_zero(f)
    L = math.log(d)
    params = {"variant": variant, "p": p, "d": d, "log_d": L}
    if variant == "m1":
        if not 1 <= p <= L:
            raise InvalidRange(f"m1 needs 1 <= p <= log d = {L:.4g}")
        _lipschitz(float(gradient_field(f, spaces.operator(d), _as_p(mode)).max()),
                   "operator-norm P gradient^2")
        r = spaces.norm(spaces.operator(d), f.values)
        return judge("m1", float(np.mean(r ** p)) ** (1.0 / p), L, params)
    if variant == "m2":
        if not p >= 2:
            raise InvalidRange("m2 needs p >= 2")
        _lipschitz(float(p_sq_p_field(f, p, mode).max()), "rooted P_p")
        first, second = m2_bound(p, d)
        params.update(bound_low=first, bound_high=second)
        rhs = min(b for b in (first, second) if b is not None)
        r = spaces.norm(matrix_space(p, d), f.values)
        return judge("m2", float(np.mean(r ** p)) ** (1.0 / p), rhs, params)
    if variant == "m3":
        if not p >= 2:
            raise InvalidRange("m3 needs p >= 2")
        _lipschitz(float(k_sq_p_field(f, math.inf).max()), "K_inf")
        first, second = m3_bound(p, d, c2)
        params.update(bound_low=first, bound_high=second, c2=c2)
        rhs = min(b for b in (first, second) if b is not None)
        r = spaces.norm(matrix_space(p, d), f.values)
        return judge("m3", float(np.mean(r ** p)) ** (1.0 / p), rhs, params, soft=True)
    raise InvalidRange(f"unknown variant {variant!r}")


def normalize_matrix_function(f, p, variant, mode=P_AUTO):
    """Scale ``f`` so the Lipschitz quantity of ``variant`` has sup exactly 1."""
    d = matrix_dim(f)
    if variant == "m1":
        s = math.sqrt(float(gradient_field(f, spaces.operator(d), _as_p(mode)).max()))
    elif variant == "m2":
        s = float(p_sq_p_field(f, p, mode).max())
    elif variant == "m3":
        s = float(k_sq_p_field(f, math.inf).max())
    else:
        raise InvalidRange(f"unknown variant {variant!r}")
    if s <= 0:
        return f
    return f.scaled(1.0 / s)


def random_matrix_function(n, d, rng):
    vals = rng.standard_normal((1 << n, d * d))
    vals -= vals.mean(axis=0)
    return CubeFunction(n, d * d, vals)


def _matrix_trial(n, d, p_list, seed, t, c2):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
    out = []
    base = random_matrix_function(n, d, rng)
    L = math.log(d)
    for p in p_list:
        for variant in ("m1", "m2", "m3"):
            if variant == "m1" and not 1 <= p <= L:
                continue
            if variant != "m1" and p < 2:
                continue
            f = normalize_matrix_function(base, p, variant)
            res = check_matrix_moments(f, p, variant, c2)
            res.params["trial"] = t
            out.append(res)
        if p >= 2:
            for res in khintchine_field(base, p):
                res.params["trial"] = t
                out.append(res)
    return out


def run_matrix_suite(n, d, p_list, trials, seed, c2=1.0, random_matrices=0):
    """Moment checks and Khintchine ratios over random mean-zero matrix functions,
    plus the Schatten/operator comparison on ``random_matrices`` Gaussian matrices."""
    per_trial = pmap(lambda t: _matrix_trial(n, d, p_list, seed, t, c2), range(trials))
    results = [r for rs in per_trial for r in rs]
    if random_matrices:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trials,)))
        mats = rng.standard_normal((random_matrices, d, d))
        sv = singular_values(mats)
        for k, p in enumerate(p for p in p_list if p >= 1):
            lhs = schatten_from_sv(sv, p)
            rhs = d ** (1.0 / p) * sv[:, 0]
            slack = rhs - lhs
            j = int(np.argmin(slack))
            worst = judge("schatten_vs_operator", lhs[j], rhs[j],
                          {"p": p, "d": d, "count": random_matrices})
            bad = slack < -1e-9 * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
            if bad.any():
                worst.status = "fail"
            worst.params["failures"] = int(bad.sum())
            results.append(worst)
    return results


def khintchine_summary(results):
    ratios = [r.params["ratio"] for r in results if r.name == "khintchine"]
    if not ratios:
        return {"count": 0}
    return {"count": len(ratios), "min": min(ratios), "max": max(ratios)}
