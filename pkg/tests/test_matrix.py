import math

import numpy as np
import pytest

from hconc import spaces
from hconc.cube import CubeFunction, derivative_stack
from hconc.errors import (DimensionMismatch, InvalidExponent, InvalidRange,
                          NotLipschitz, PreconditionViolated, ZeroDenominator)
from hconc.matrix import (check_matrix_moments, check_schatten_vs_operator,
                          k_sq_p, k_sq_p_field, khintchine_field, khintchine_report,
                          khintchine_summary, m2_bound, m3_bound, matrix_dim,
                          normalize_matrix_function, p_sq_p, p_sq_p_field,
                          random_matrix_function, run_matrix_suite)
from hconc.verifier import summarize


def linear_matrix(mats):
    """f(x) = sum_i x_i A_i for a list of d x d matrices."""
    mats = np.asarray(mats, dtype=float)
    n, d = mats.shape[0], mats.shape[1]
    xs = np.array([[1 - 2 * ((b >> i) & 1) for i in range(n)] for b in range(1 << n)])
    vals = np.einsum("bi,ijk->bjk", xs, mats).reshape(1 << n, d * d)
    return CubeFunction(n, d * d, vals)


def schatten_np(a, p):
    sv = np.linalg.svd(a, compute_uv=False)
    return float(sv.max()) if math.isinf(p) else float((sv ** p).sum() ** (1 / p))


def psd_sqrt_np(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.T


def k_oracle(f, p, x):
    d = matrix_dim(f)
    ds = derivative_stack(f.values, f.n)[x].reshape(f.n, d, d)
    row = sum(a @ a.T for a in ds)
    col = sum(a.T @ a for a in ds)
    return schatten_np(psd_sqrt_np(row), p) + schatten_np(psd_sqrt_np(col), p)


def test_k_and_p_examples():
    f = linear_matrix([np.eye(3)])
    assert k_sq_p(f, 3, 0) == pytest.approx(2 * 3 ** (1 / 3), abs=1e-12)
    assert p_sq_p(f, 3, 0) == pytest.approx(3 ** (1 / 3), abs=1e-12)
    e11 = np.zeros((2, 2))
    e11[0, 0] = 1
    g = linear_matrix([e11])
    r = khintchine_report(g, 4, 1)
    assert r.params["K"] == pytest.approx(2) and r.params["P_rooted"] == pytest.approx(1)
    assert r.params["ratio"] == pytest.approx(0.5)
    assert r.status == "report"


def test_k_matches_numpy_oracle(rng):
    for _ in range(10):
        f = random_matrix_function(3, 4, rng)
        for p in (2.0, 3.0, math.inf):
            field = k_sq_p_field(f, p)
            for x in range(8):
                assert field[x] == pytest.approx(k_oracle(f, p, x), rel=1e-10)


def test_p_field_is_rooted_p_gradient(rng):
    f = random_matrix_function(3, 3, rng)
    field = p_sq_p_field(f, 4.0)
    for x in range(8):
        assert field[x] == pytest.approx(p_sq_p(f, 4.0, x), rel=1e-12)
        assert field[x] ** 2 == pytest.approx(
            np.mean([schatten_np(sum(s * a for s, a in zip(
                signs, derivative_stack(f.values, 3)[x].reshape(3, 3, 3))), 4.0) ** 2
                for signs in np.array(np.meshgrid(*[[1, -1]] * 3)).T.reshape(-1, 3)]),
            rel=1e-10)


def test_khintchine_ratio_bounded(rng):
    for _ in range(5):
        f = random_matrix_function(3, 5, rng)
        for res in khintchine_field(f, 3.0):
            assert 0 < res.params["ratio"] <= 1 + 1e-12
            assert res.params["factor"] == pytest.approx(min(math.sqrt(3), math.sqrt(math.log(5))))


def test_khintchine_zero_denominator():
    f = CubeFunction(1, 4, np.ones((2, 4)))
    with pytest.raises(ZeroDenominator):
        khintchine_report(f, 2, 0)
    assert khintchine_field(f, 2) == []


def test_schatten_vs_operator(rng):
    for _ in range(200):
        d = int(rng.integers(1, 9))
        a = rng.standard_normal((d, d))
        p = float(rng.uniform(1, 10))
        r = check_schatten_vs_operator(a, p)
        assert r.status == "pass"
        assert r.lhs == pytest.approx(schatten_np(a, p), rel=1e-10)
    r = check_schatten_vs_operator(np.eye(4), 2)
    assert r.lhs == pytest.approx(r.rhs) and r.status == "pass"


def test_bound_branches():
    L = math.log(8)
    assert m2_bound(2, 8) == (2, None)
    assert m2_bound(2.5, 8) == (None, pytest.approx(math.sqrt(4 + (L - 1) ** 2)))
    lo, hi = m2_bound(L, 8)
    assert lo == pytest.approx(hi)
    lo, hi = m3_bound(2, 8, 1.0)
    assert lo == pytest.approx(8 ** 0.5 * 2 ** 1.5) and hi is None


def test_matrix_moment_checks(rng):
    base = random_matrix_function(3, 8, rng)
    for p in (2.0, 2.5):
        for variant in ("m2", "m3"):
            f = normalize_matrix_function(base, p, variant)
            assert check_matrix_moments(f, p, variant).status in ("pass", "report")
        assert check_matrix_moments(normalize_matrix_function(base, p, "m2"),
                                    p, "m2").status == "pass"
    f = normalize_matrix_function(base, 2.0, "m1")
    assert check_matrix_moments(f, 2.0, "m1").status == "pass"


def test_matrix_moment_errors(rng):
    base = random_matrix_function(2, 4, rng)
    with pytest.raises(InvalidRange):
        check_matrix_moments(normalize_matrix_function(base, 2, "m1"), 2.0, "m1")
    with pytest.raises(NotLipschitz):
        check_matrix_moments(base.scaled(100), 2.0, "m2")
    shifted = CubeFunction(2, 16, base.values + 1)
    with pytest.raises(PreconditionViolated):
        check_matrix_moments(shifted, 2.0, "m2")
    with pytest.raises(DimensionMismatch):
        matrix_dim(CubeFunction(1, 3, np.zeros((2, 3))))
    with pytest.raises(InvalidExponent):
        k_sq_p_field(base, 1.5)


def test_zero_function_passes_all_variants():
    f = CubeFunction(2, 9, np.zeros((4, 9)))
    assert check_matrix_moments(f, 1.0, "m1").status == "pass"
    for variant in ("m2", "m3"):
        assert check_matrix_moments(f, 2.0, variant).status == "pass"


def test_matrix_suite_small():
    res = run_matrix_suite(2, 4, (2.0, 2.5), 3, seed=5, random_matrices=50)
    s = summarize(res)
    assert s["fail"] == 0
    k = khintchine_summary(res)
    assert k["count"] > 0 and k["min"] > 0
    again = run_matrix_suite(2, 4, (2.0, 2.5), 3, seed=5, random_matrices=50)
    assert [r.to_dict() for r in res] == [r.to_dict() for r in again]
