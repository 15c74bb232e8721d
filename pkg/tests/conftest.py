import itertools

import numpy as np
import pytest

from hconc.cube import CubeFunction, vertices


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def fn(n, values):
    """Scalar or vector CubeFunction from a list/array of values."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return CubeFunction(n, arr.shape[1], arr)


def from_formula(n, formula, dim=1):
    """Tabulate ``formula(x)`` over the cube using the package's vertex order."""
    pts = vertices(n)
    vals = np.array([np.atleast_1d(formula(x)) for x in pts], dtype=float)
    return CubeFunction(n, dim, vals.reshape(1 << n, dim))


def all_signs(n):
    """Every sign vector, enumerated independently of the package."""
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
