"""Acceptance criteria 1-10, one test each.

Every test appends a ``criterion N: PASS|FAIL ...`` line that is printed in
the terminal summary, and fails if the criterion does not hold.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from hconc import spaces
from hconc.cube import to_coefficients
from hconc.extremal import SearchConfig, baseline_witness, maximize_beta, sharpness_report
from hconc.functionals import GAMMA, P_AUTO, P_EXACT, sup_gradient_sq
from hconc.matrix import (check_matrix_moments, khintchine_field,
                          normalize_matrix_function, random_matrix_function)
from hconc.spaces import schatten_from_sv, singular_values
from hconc.verifier import (TAU_KE, check_beta_ode, check_deriv_bound, check_diff1,
                            check_ent_orlicz, check_entGT, check_exp_moment,
                            check_gamma_comparison, check_lsi, check_orlicz2,
                            check_separate_convexity, check_sqrtp, check_talagrand,
                            random_function, random_nonnegative, random_sparse,
                            tolerance)

P_GRID = tuple(float(p) for p in range(2, 17))
SPACE_KINDS = (spaces.scalar(), spaces.euclidean(3), spaces.schatten(3, 3), spaces.operator(3))
CHAIN_SPACES = (spaces.scalar(), spaces.euclidean(3), spaces.schatten(3, 3))


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def seeded(*key):
    return np.random.default_rng(np.random.SeedSequence(entropy=2024, spawn_key=key))


def nonnegative_population():
    rng = seeded(1)
    return [random_nonnegative(int(rng.integers(1, 9)), rng) for _ in range(1000)]


def test_criterion_1_lsi_suite():
    start = time.perf_counter()
    fails = 0
    for g in nonnegative_population():
        fails += check_lsi(g).status == "fail"
        fails += check_entGT(g).status == "fail"
    elapsed = time.perf_counter() - start
    record(1, fails == 0 and elapsed < 30,
           f"lsi+entGT on 1000 g: {fails} failures, {elapsed:.2f}s (< 30s)")


def test_criterion_2_orlicz_entropy_suite():
    fails = sum(check_ent_orlicz(g).status == "fail" for g in nonnegative_population())
    rng = seeded(2)
    reports = [check_talagrand(random_sparse(int(rng.integers(1, 9)), rng)) for _ in range(200)]
    ratios = [r.params["ratio"] for r in reports if r.params["ratio"] is not None]
    ok = fails == 0 and len(reports) == 200 and all(r.status == "report" for r in reports)
    record(2, ok, f"ent_orlicz {fails} failures; 200 half-zero reports, "
                  f"max ratio {max(ratios):.4f}")


def test_criterion_3_convexity_chain():
    rng = seeded(3)
    conv_fail = 0
    for k in range(10_000):
        space = SPACE_KINDS[(k // 25) % 4]
        if k % 25 == 0:
            f = random_function(space, int(rng.integers(1, 5)), rng)
            coeffs = to_coefficients(f)
        p = float((2, 4, 8)[k % 3])
        s1, s2 = rng.uniform(-3, 3, 2)
        r = check_separate_convexity(f, space, p, int(rng.integers(1 << f.n)),
                                     int(rng.integers(1, f.n + 1)), s1, s2, coeffs)
        conv_fail += r.status == "fail"
    deriv_fail = 0
    for space in SPACE_KINDS:
        for _ in range(200):
            f = random_function(space, int(rng.integers(1, 5)), rng)
            coeffs = to_coefficients(f)
            for p in (2.0, 4.0, 8.0):
                for eps in (1e-3, 1.0):
                    deriv_fail += check_deriv_bound(f, space, p, eps, coeffs).status == "fail"
    record(3, conv_fail == 0 and deriv_fail == 0,
           f"separate_convexity 10^4 instances: {conv_fail} failures; "
           f"deriv_bound 200 f x 4 spaces: {deriv_fail} failures")


def test_criterion_4_moment_chain():
    fails = 0
    count = 0
    for s_idx, space in enumerate(CHAIN_SPACES):
        for m_idx, mode in enumerate((GAMMA, P_EXACT)):
            rng = seeded(4, s_idx, m_idx)
            for _ in range(300):
                f = random_function(space, int(rng.integers(1, 5)), rng, normalize=mode)
                sup = sup_gradient_sq(f, space, mode)
                for p in P_GRID:
                    for check in (check_orlicz2, check_diff1, check_beta_ode):
                        fails += check(f, space, p, mode, sup).status == "fail"
                        count += 1
    record(4, fails == 0, f"orlicz2/diff1/beta_ode {count} checks: {fails} failures")


def test_criterion_5_gamma_comparison():
    rows = []
    ok = True
    for n in (2, 4, 8, 16):
        f = baseline_witness(n).function
        r = check_gamma_comparison(f, spaces.scalar(), P_GRID, P_EXACT)
        good = r.params["premise"] and r.status == "pass" and r.params["gamma_fd_residual"] < 1e-6
        ok &= good
        rows.append(f"n={n} fd={r.params['gamma_fd_residual']:.1e}")
    record(5, ok, "gamma_comparison on baseline family: " + ", ".join(rows))


def test_criterion_6_sqrtp():
    f = baseline_witness(4).function
    s = spaces.scalar()
    r4 = check_sqrtp(f, s, 4, P_EXACT, C=1.0)
    r2 = check_sqrtp(f, s, 2, P_EXACT, C=1.0)
    exact = (abs(r4.lhs - 2.5 ** 0.25) <= 1e-9 and abs(r4.rhs - math.sqrt(8)) <= 1e-9
             and abs(r2.lhs - 1.0) <= 1e-9 and abs(r2.rhs - 2.0) <= 1e-9
             and r4.status == r2.status == "pass")
    rng = seeded(6)
    fails = 0
    for _ in range(200):
        g = random_function(s, int(rng.integers(1, 7)), rng, normalize=P_AUTO, center=True)
        for p in P_GRID:
            fails += check_sqrtp(g, s, p, P_AUTO, C=1.0).status == "fail"
    record(6, exact and fails == 0,
           f"baseline p=4 lhs {r4.lhs:.10f} <= {r4.rhs:.10f}, p=2 lhs {r2.lhs:.10f} <= 2; "
           f"random scalar suite {fails} fail statuses")


def test_criterion_7_exp_moment_series():
    rng = seeded(7)
    worst = 0.0
    fails = 0
    rhs_ok = True
    for space in SPACE_KINDS[:3]:
        Q, C = spaces.cotype_of(space)
        for _ in range(100):
            f = random_function(space, int(rng.integers(1, 6)), rng, normalize=P_AUTO,
                                center=True)
            r = check_exp_moment(f, space, 1.0, P_AUTO, TAU_KE)
            worst = max(worst, r.params["series_gap"])
            fails += r.status == "fail" or r.params["series_gap"] >= 1e-8
            rhs_ok &= abs(r.rhs - math.exp(C * C * Q * Q)) <= tolerance(r.rhs, r.rhs)
    record(7, fails == 0 and rhs_ok,
           f"300 functions, worst |exp_moment - series(150)| = {worst:.2e} (< 1e-8)")


def test_criterion_8_matrix_suite():
    rng = seeded(8)
    bad = 0
    for d in range(1, 9):
        mats = rng.standard_normal((1250, d, d))
        sv = singular_values(mats)
        for p in (1.0, 2.0, 2.5, 4.0):
            lhs = schatten_from_sv(sv, p)
            rhs = d ** (1.0 / p) * sv[:, 0]
            bad += int(np.sum(rhs - lhs < -1e-9 * np.maximum(1, np.maximum(lhs, rhs))))
    m2_fail = 0
    ratios = []
    for k in range(50):
        base = random_matrix_function(int(rng.integers(1, 5)), 8, rng)
        for p in (2.0, 2.5):
            f = normalize_matrix_function(base, p, "m2")
            m2_fail += check_matrix_moments(f, p, "m2").status == "fail"
            ratios += [r.params["ratio"] for r in khintchine_field(base, p)]
    ok = bad == 0 and m2_fail == 0 and min(ratios) > 0
    record(8, ok, f"schatten_vs_operator 10^4 matrices: {bad} failures; "
                  f"m2 100 functions: {m2_fail} failures; Khintchine ratios "
                  f"[{min(ratios):.4f}, {max(ratios):.4f}]")


def test_criterion_9_extremal_search():
    start = time.perf_counter()
    cfg = SearchConfig(n=4, p=8.0, iterations=5000, restarts=8, seed=0)
    w = maximize_beta(cfg)
    base = baseline_witness(4, 8.0).achieved
    rep = sharpness_report(4.0, 0.25, w)
    elapsed = time.perf_counter() - start
    ok = (w.constraint_residual <= 1e-8 and w.achieved >= base - 1e-9
          and rep["target"] == 4.0 and elapsed < 300)
    record(9, ok, f"achieved {w.achieved:.12f} vs baseline {base:.12f}, residual "
                  f"{w.constraint_residual:.1e}, sharpness gap {rep['gap']:.4f}, "
                  f"{elapsed:.1f}s (< 300s)")


def test_criterion_10_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"report{k}.json"
        proc = subprocess.run([sys.executable, "-m", "hconc", "verify", "--seed", "7",
                               "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode in (0, 1), proc.stderr
        outs.append(path.read_bytes())
    record(10, outs[0] == outs[1], f"verify --seed 7 twice: {len(outs[0])} bytes, "
                                   f"identical={outs[0] == outs[1]}")
