import math

import numpy as np
import pytest

from hconc import spaces
from hconc.errors import (DimensionMismatch, InvalidExponent, NotPSD,
                          UnsupportedSpace)
from hconc.spaces import (cotype_of, dual_norm, norm, psd_sqrt_singular_values,
                          singular_values, space_from_dict, symmetric_eigenvalues)


def test_euclidean_norm():
    assert norm(spaces.euclidean(2), [3, 4]) == pytest.approx(5)


def test_schatten_two_is_frobenius(rng):
    for d in (1, 2, 5):
        a = rng.standard_normal(d * d)
        assert norm(spaces.schatten(2, d), a) == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_schatten_four_rank_one():
    assert norm(spaces.schatten(4, 2), [1, 1, 1, 1]) == pytest.approx(2, abs=1e-12)


def test_scalar_and_operator(rng):
    assert norm(spaces.scalar(), [-2.5]) == 2.5
    a = rng.standard_normal((4, 4))
    assert norm(spaces.operator(4), a.ravel()) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


def test_norm_errors():
    with pytest.raises(DimensionMismatch):
        norm(spaces.euclidean(3), [1, 2])
    with pytest.raises(InvalidExponent):
        spaces.schatten(1.5, 2)
    with pytest.raises(UnsupportedSpace):
        space_from_dict({"kind": "lq", "d": 2})


def test_singular_value_examples():
    assert np.allclose(singular_values(np.diag([3.0, -2.0])), [3, 2])
    assert np.allclose(singular_values(np.eye(5)), np.ones(5))
    assert np.allclose(singular_values([[1.0, 1.0], [1.0, 1.0]]), [2, 0], atol=1e-15)
    assert np.array_equal(singular_values(np.zeros((3, 3))), np.zeros(3))


def test_singular_values_against_lapack(rng):
    for d in range(1, 17):
        a = rng.standard_normal((20, d, d)) * rng.uniform(0.01, 100)
        ours = singular_values(a)
        ref = np.linalg.svd(a, compute_uv=False)
        assert np.all(np.abs(ours - ref) <= 1e-10 * ref[:, :1])
        assert np.all(np.diff(ours, axis=-1) <= 0)


def test_singular_values_rectangular(rng):
    a = rng.standard_normal((3, 7))
    assert np.allclose(singular_values(a), np.linalg.svd(a, compute_uv=False), rtol=1e-12)


def test_squared_singular_values_sum_to_frobenius(rng):
    for _ in range(50):
        d = int(rng.integers(1, 9))
        a = rng.standard_normal((d, d))
        s = singular_values(a)
        assert (s ** 2).sum() == pytest.approx((a ** 2).sum(), rel=1e-9)


def test_symmetric_eigenvalues_against_lapack(rng):
    b = rng.standard_normal((30, 6, 6))
    s = b + b.transpose(0, 2, 1)
    assert np.allclose(symmetric_eigenvalues(s), np.linalg.eigvalsh(s)[:, ::-1], atol=1e-11)


def test_psd_sqrt_clamps_and_rejects():
    assert np.allclose(psd_sqrt_singular_values(np.diag([4.0, -1e-12])), [2, 0])
    with pytest.raises(NotPSD):
        psd_sqrt_singular_values(np.diag([1.0, -1e-6]))


def test_cotype_registry():
    assert cotype_of(spaces.schatten(3, 4)) == (3.0, 1.0)
    q, c = cotype_of(spaces.operator(8))
    assert q == pytest.approx(2.0794415416798357) and c == 1.0
    assert cotype_of(spaces.euclidean(5)) == (2.0, 1.0)
    assert cotype_of(spaces.scalar()) == (2.0, 1.0)
    with pytest.raises(UnsupportedSpace):
        cotype_of(spaces.operator(2))


SPACES = [spaces.scalar(), spaces.euclidean(4), spaces.schatten(2, 3),
          spaces.schatten(3.5, 3), spaces.operator(3)]


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label())
def test_norm_axioms(space, rng):
    for _ in range(200):
        u = rng.standard_normal(space.ambient_dim)
        v = rng.standard_normal(space.ambient_dim)
        c = rng.standard_normal() * 5
        assert norm(space, c * u) == pytest.approx(abs(c) * norm(space, u), rel=1e-10, abs=1e-12)
        assert norm(space, u + v) <= norm(space, u) + norm(space, v) + 1e-10


def test_schatten_monotone_in_p(rng):
    for _ in range(200):
        d = int(rng.integers(1, 7))
        a = rng.standard_normal(d * d)
        p, q = sorted(rng.uniform(2, 12, size=2))
        assert norm(spaces.schatten(q, d), a) <= norm(spaces.schatten(p, d), a) + 1e-10


def test_schatten_vs_operator_scaling(rng):
    for _ in range(200):
        d = int(rng.integers(1, 9))
        p = float(rng.choice([2, 3, 4, 10]))
        a = rng.standard_normal(d * d)
        assert norm(spaces.schatten(p, d), a) <= d ** (1 / p) * norm(spaces.operator(d), a) + 1e-10


def test_dual_norm_pairing(rng):
    # |<xi, v>| <= ||xi||_* ||v|| (trace pairing), with equality attainable.
    for space in SPACES:
        for _ in range(50):
            xi = rng.standard_normal(space.ambient_dim)
            v = rng.standard_normal(space.ambient_dim)
            assert abs(xi @ v) <= dual_norm(space, xi) * norm(space, v) + 1e-10


def test_space_json_round_trip():
    for space in SPACES:
        assert space_from_dict(space.to_dict()) == space
    assert spaces.schatten(4, 2).ambient_dim == 4
    assert spaces.euclidean(3).ambient_dim == 3
