"""Executable checks for the log-Sobolev / moment-growth inequality chain.

Every check returns a :class:`CheckResult`. Inequalities whose constants are
explicit are judged ``pass``/``fail``; those involving unknown universal
constants are emitted with status ``report`` and a configurable placeholder.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spaces
from .cube import (CubeFunction, derivative_stack, evaluate_extension,
                   to_coefficients, vertices)
from .errors import (ConfigError, DegenerateDraw, EmptyGrid, HconcError,
                     NegativeInput, NotLipschitz, PreconditionViolated,
                     ZeroMoment)
from .functionals import (GAMMA, P_AUTO, GradientMode, beta_derivative_from_norms,
                          dirichlet_form, entropy, entropy_sq, exp_moment,
                          is_exact_gradient, log_derivative_from_norms,
                          m_gradient, moment_from_norms, norms, orlicz_norm,
                          section_values, sigma_partial_sums, sup_gradient_sq)
from .spaces import cotype_of, norm
from .util import pmap

TAU_KE = 1.0 / (4.0 * math.e)
LIP_TOL = 1e-9
SERIES_TERMS = 150
SERIES_TOL = 1e-8
GAMMA_FD_STEP = 1e-4
GAMMA_FD_TOL = 1e-6
MAX_REDRAWS = 10


def tolerance(lhs, rhs):
    return 1e-9 * max(1.0, abs(lhs), abs(rhs))


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float
    slack: float
    status: str
    params: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != "fail"

    def to_dict(self):
        return {"check": self.name, "status": self.status, "lhs": self.lhs,
                "rhs": self.rhs, "slack": self.slack, "params": self.params}


def judge(name, lhs, rhs, params=None, report_only=False, soft=False):
    """Build a result for ``lhs <= rhs``.

    ``report_only`` never passes or fails; ``soft`` passes when the bound holds
    and reports (instead of failing) when it does not.
    """
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    if report_only:
        status = "report"
    elif slack >= -tolerance(lhs, rhs):
        status = "pass"
    else:
        status = "report" if soft else "fail"
    return CheckResult(name, lhs, rhs, slack, status, dict(params or {}))


def _scalar(g):
    if g.dim != 1:
        raise ConfigError("this check takes a scalar function")
    if np.any(g.values < 0):
        raise NegativeInput("this check needs g >= 0")
    return g.values[:, 0]


def _require_lipschitz(f, space, mode, sup_grad=None):
    if not is_exact_gradient(space, mode):
        raise ConfigError(f"{mode.label()} gradient is not exact on {space.label()}")
    s = sup_gradient_sq(f, space, mode) if sup_grad is None else sup_grad
    if s > 1.0 + LIP_TOL:
        raise NotLipschitz(f"sup {mode.label()} gradient^2 = {s:.6g} > 1")
    return s


# -- scalar log-Sobolev family ------------------------------------------------

def check_lsi(g):
    """Ent(g^2) <= 2 E sum_i (D_i g)^2."""
    _scalar(g)
    return judge("lsi", entropy_sq(g), 2.0 * dirichlet_form(g), {"n": g.n})


def check_entGT(g):
    """Ent(g^2) <= 4 E (Mg)^2."""
    _scalar(g)
    mg = m_gradient(g).values[:, 0]
    return judge("entGT", entropy_sq(g), 4.0 * float(np.mean(mg * mg)), {"n": g.n})


def check_ent_orlicz(g):
    """Ent(g^2) <= 2 ||g||^2 in L^2 log L."""
    _scalar(g)
    lam = orlicz_norm(g, 2.0)
    return judge("ent_orlicz", entropy_sq(g), 2.0 * lam * lam, {"n": g.n, "orlicz": lam})


def check_talagrand(g, kappa2=2.0):
    """||g||^2_{L^2 log L} against kappa2 E (Mg)^2, report only.

    Needs at least half of the vertices to be zeros of g.
    """
    v = _scalar(g)
    if np.count_nonzero(v == 0) * 2 < v.size:
        raise PreconditionViolated("g must vanish on at least half of the cube")
    lam = orlicz_norm(g, 2.0)
    mg = m_gradient(g).values[:, 0]
    em2 = float(np.mean(mg * mg))
    params = {"n": g.n, "kappa2": kappa2}
    if em2 == 0.0:
        params.update(ratio=None, skipped="0/0: g vanishes identically")
        return CheckResult("talagrand", lam * lam, 0.0, -lam * lam, "report", params)
    params["ratio"] = lam * lam / em2
    return judge("talagrand", lam * lam, kappa2 * em2, params, report_only=True)


# -- convexity chain ----------------------------------------------------------

def check_separate_convexity(f, space, p, x, i, s1, s2, coeffs=None):
    """||F||^{p/2} restricted to the line through vertex x along e_i is midpoint convex."""
    if coeffs is None:
        coeffs = to_coefficients(f)
    base = vertices(f.n)[x]
    h = section_values(coeffs, space, p, base, i, np.array([s1, s2, 0.5 * (s1 + s2)]))
    params = {"p": p, "x": int(x), "i": int(i), "s1": float(s1), "s2": float(s2),
              "space": space.label()}
    return judge("separate_convexity", h[2], 0.5 * (h[0] + h[1]), params)


def check_deriv_bound(f, space, p, eps, coeffs=None):
    """(D_i ||f||^{p/2})_+ at every vertex is dominated by the outward chord slope.

    The right side is |h(x_i (1 + eps)) - h(x_i)| / eps where h is
    ||F||^{p/2} along coordinate i; the worst (x, i) pair is reported.
    """
    if coeffs is None:
        coeffs = to_coefficients(f)
    n = f.n
    g = norm(space, f.values) ** (p / 2.0)
    dg = derivative_stack(g[:, None], n)[..., 0]
    lhs = np.maximum(dg, 0.0)
    verts = vertices(n)
    pts = np.repeat(verts[:, None, :], n, axis=1)
    idx = np.arange(n)
    pts[:, idx, idx] = verts * (1.0 + eps)
    h_out = norm(space, evaluate_extension(coeffs, pts)) ** (p / 2.0)
    h_in = norm(space, evaluate_extension(coeffs, verts)) ** (p / 2.0)
    rhs = np.abs(h_out - h_in[:, None]) / eps
    slack = rhs - lhs
    scale = 1e-9 * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    worst = np.unravel_index(np.argmin(slack / scale), slack.shape)
    params = {"p": p, "eps": eps, "x": int(worst[0]), "i": int(worst[1]) + 1,
              "space": space.label()}
    res = judge("deriv_bound", lhs[worst], rhs[worst], params)
    if np.any(slack < -scale):
        res.status = "fail"
    return res


# -- moment chain -------------------------------------------------------------

def check_orlicz2(f, space, p, mode=P_AUTO, sup_grad=None):
    """Ent(||f||^p) <= p^2 a(p)^{1-2/p} for Lipschitz f (uncentered norms)."""
    _require_lipschitz(f, space, mode, sup_grad)
    r = norms(f, space, center=False)
    a = moment_from_norms(r, p)
    params = {"p": p, "mode": mode.label(), "space": space.label()}
    return judge("orlicz2", float(entropy(r ** p)), p * p * a ** (1.0 - 2.0 / p), params)


def check_diff1(f, space, p, mode=P_AUTO, sup_grad=None):
    """a'(p) <= a(p) log a(p) / p + p a(p)^{1-2/p}."""
    _require_lipschitz(f, space, mode, sup_grad)
    r = norms(f, space, center=False)
    a = moment_from_norms(r, p)
    lhs = log_derivative_from_norms(r, p)
    rhs = (a * math.log(a) / p if a > 0 else 0.0) + p * a ** (1.0 - 2.0 / p)
    return judge("diff1", lhs, rhs, {"p": p, "mode": mode.label(), "space": space.label()})


def check_beta_ode(f, space, p, mode=P_AUTO, sup_grad=None):
    """0 <= beta'(p) <= exp(-2 beta(p)) with beta'(p) from the exact a'(p).

    The monotonicity half is recorded in ``params["monotone"]`` and turns the
    status to fail when beta'(p) < -1e-9.
    """
    _require_lipschitz(f, space, mode, sup_grad)
    r = norms(f, space, center=False)
    a = moment_from_norms(r, p)
    if a <= 0:
        raise ZeroMoment("a(p) = 0: the function vanishes identically")
    bprime = beta_derivative_from_norms(r, p)
    beta_p = math.log(a) / p
    params = {"p": p, "mode": mode.label(), "space": space.label(), "beta": beta_p,
              "monotone": bprime >= -LIP_TOL}
    res = judge("beta_ode", bprime, math.exp(-2.0 * beta_p), params)
    if not params["monotone"]:
        res.status = "fail"
    return res


def gamma_bound(x, Q, C=1.0):
    """1/2 log(2x + C^2 Q^2 - 2Q), the explicit solution of gamma' = exp(-2 gamma)."""
    return 0.5 * math.log(2.0 * x + C * C * Q * Q - 2.0 * Q)


def sqrtp_bound(p, Q, C_E=1.0, C=1.0):
    """Right side of the sqrt(p) moment-growth bound with the outer constant C."""
    if p >= Q:
        return C * math.sqrt(2.0 * p + C_E * C_E * Q * Q - 2.0 * Q)
    return C_E * Q


def _beta_values(r, grid):
    out = []
    for p in grid:
        a = moment_from_norms(r, p)
        out.append(math.log(a) / p if a > 0 else -math.inf)
    return out


def check_gamma_comparison(f, space, p_grid, mode=P_AUTO, center=True, sup_grad=None):
    """beta(p) <= gamma(p) on the grid points p >= Q, given beta(Q) <= gamma(Q).

    When the premise fails the status is ``report``. The identity
    gamma' = exp(-2 gamma) is re-checked by central differences at every grid
    point; a residual >= 1e-6 is a failure.
    """
    Q, C = cotype_of(space)
    grid = sorted(float(p) for p in p_grid if p >= Q)
    if not grid:
        raise EmptyGrid(f"no grid point is >= Q = {Q:g}")
    _require_lipschitz(f, space, mode, sup_grad)
    r = norms(f, space, center)
    beta_q = _beta_values(r, [Q])[0]
    gamma_q = gamma_bound(Q, Q, C)
    betas = _beta_values(r, grid)
    gammas = [gamma_bound(p, Q, C) for p in grid]
    diffs = [b - g for b, g in zip(betas, gammas)]
    worst = int(np.argmax(diffs))
    h = GAMMA_FD_STEP
    fd = max(abs((gamma_bound(p + h, Q, C) - gamma_bound(p - h, Q, C)) / (2 * h)
                 - math.exp(-2.0 * gamma_bound(p, Q, C))) for p in grid)
    premise = beta_q <= gamma_q + tolerance(beta_q, gamma_q)
    params = {"Q": Q, "C": C, "space": space.label(), "mode": mode.label(),
              "beta_Q": beta_q, "gamma_Q": gamma_q, "premise": premise,
              "worst_p": grid[worst], "gamma_fd_residual": fd,
              "grid": grid}
    res = judge("gamma_comparison", betas[worst], gammas[worst], params,
                report_only=not premise)
    if fd >= GAMMA_FD_TOL:
        res.status = "fail"
    return res


def check_sqrtp(f, space, p, mode=P_AUTO, C=1.0, sup_grad=None):
    """(E||f - Ef||^p)^{1/p} against the sqrt(p)-growth bound with constant C.

    Passes when the bound holds with the chosen C, reports otherwise (the
    universal constant is unspecified).
    """
    _require_lipschitz(f, space, mode, sup_grad)
    Q, C_E = cotype_of(space)
    a = moment_from_norms(norms(f, space, center=True), p)
    lhs = a ** (1.0 / p)
    params = {"p": p, "Q": Q, "C_E": C_E, "C": C, "mode": mode.label(),
              "space": space.label(), "branch": "p>=Q" if p >= Q else "p<=Q"}
    return judge("sqrtp", lhs, sqrtp_bound(p, Q, C_E, C), params, soft=True)


def check_exp_moment(f, space, c0=1.0, mode=P_AUTO, tau=TAU_KE, sup_grad=None):
    """E exp(tau ||f - Ef||^2) against exp(c0 C^2 Q^2), report only.

    Also recomputes the left side from 150 terms of the moment series; a gap
    above 1e-8 marks the result as failed.
    """
    _require_lipschitz(f, space, mode, sup_grad)
    Q, C = cotype_of(space)
    lhs = exp_moment(f, space, tau)
    series = sigma_partial_sums(f, space, tau, SERIES_TERMS)[-1]
    gap = abs(series - lhs)
    params = {"tau": tau, "tau_is_1_over_4e": abs(tau - TAU_KE) < 1e-15,
              "c0": c0, "Q": Q, "C": C, "series_terms": SERIES_TERMS,
              "series_gap": gap, "mode": mode.label(), "space": space.label()}
    res = judge("exp_moment", lhs, math.exp(c0 * C * C * Q * Q), params, report_only=True)
    if gap >= SERIES_TOL:
        res.status = "fail"
    return res


# -- instance generation ------------------------------------------------------

def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_function(space, n, seed, normalize=None, center=False):
    """Gaussian values at every vertex, optionally centered and Lipschitz-normalized.

    ``seed`` may be an int or a Generator. A draw whose sup gradient vanishes
    is redrawn up to 10 times.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    rng = _rng(seed)
    for _ in range(MAX_REDRAWS):
        vals = rng.standard_normal((1 << n, space.ambient_dim))
        if center:
            vals -= vals.mean(axis=0)
        f = CubeFunction(n, space.ambient_dim, vals)
        if normalize is None:
            return f
        s = sup_gradient_sq(f, space, normalize)
        if s > 0:
            return f.scaled(1.0 / math.sqrt(s))
    raise DegenerateDraw(f"sup gradient vanished in {MAX_REDRAWS} draws")


def random_nonnegative(n, seed):
    """Square of a Gaussian field on the cube."""
    z = _rng(seed).standard_normal(1 << n)
    return CubeFunction(n, 1, (z * z)[:, None])


def random_sparse(n, seed):
    """Nonnegative g vanishing on a uniformly random half of the vertices."""
    rng = _rng(seed)
    z = rng.standard_normal(1 << n)
    g = z * z
    g[rng.permutation(1 << n)[: (1 << n) // 2]] = 0.0
    return CubeFunction(n, 1, g[:, None])


# -- suites ------------------------------------------------------------------

@dataclass
class SuiteConfig:
    n: int = 4
    space: spaces.SpaceDescriptor = field(default_factory=spaces.scalar)
    trials: int = 20
    seed: int = 0
    p_grid: tuple = tuple(float(p) for p in range(2, 17))
    mode: GradientMode = GAMMA
    tau: float = TAU_KE
    c0_report: float = 1.0
    kappa2_report: float = 2.0
    sqrtp_C: float = 1.0
    eps: tuple = (1e-3, 1.0)
    conv_per_trial: int = 10

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 1 <= self.n <= 16:
            raise ConfigError("suite n must be in 1..16")
        if not self.p_grid or any(not p >= 1 for p in self.p_grid):
            raise ConfigError("p_grid entries must be >= 1")
        if any(not e > 0 for e in self.eps):
            raise ConfigError("chord epsilons must be positive")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not is_exact_gradient(self.space, self.mode):
            raise ConfigError(f"{self.mode.label()} gradient is not exact on {self.space.label()}")
        cotype_of(self.space)

    def to_dict(self):
        d = asdict(self)
        d["space"] = self.space.to_dict()
        d["mode"] = self.mode.label()
        d["p_grid"] = list(self.p_grid)
        d["eps"] = list(self.eps)
        return d


def _named(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except HconcError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def _trial(cfg, t):
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(t,))
    rng = np.random.default_rng(ss)
    space, n = cfg.space, cfg.n
    out = []

    def add(res):
        res.params.setdefault("n", n)
        res.params["trial"] = t
        out.append(res)

    g = random_nonnegative(n, rng)
    add(_named("lsi", check_lsi, g))
    add(_named("entGT", check_entGT, g))
    add(_named("ent_orlicz", check_ent_orlicz, g))
    add(_named("talagrand", check_talagrand, random_sparse(n, rng), cfg.kappa2_report))

    f = random_function(space, n, rng, normalize=cfg.mode)
    sup = sup_gradient_sq(f, space, cfg.mode)
    coeffs = to_coefficients(f)
    chord_ps = [p for p in cfg.p_grid if p >= 2]
    for p in chord_ps:
        add(_named("orlicz2", check_orlicz2, f, space, p, cfg.mode, sup))
        add(_named("diff1", check_diff1, f, space, p, cfg.mode, sup))
        add(_named("beta_ode", check_beta_ode, f, space, p, cfg.mode, sup))
        for eps in cfg.eps:
            add(_named("deriv_bound", check_deriv_bound, f, space, p, eps, coeffs))
    if chord_ps:
        for k in range(cfg.conv_per_trial):
            p = chord_ps[k % len(chord_ps)]
            x = int(rng.integers(1 << n))
            i = int(rng.integers(1, n + 1))
            s1, s2 = rng.uniform(-3.0, 3.0, size=2)
            add(_named("separate_convexity", check_separate_convexity,
                       f, space, p, x, i, s1, s2, coeffs))

    fp = random_function(space, n, rng, normalize=P_AUTO, center=True)
    sup_p = sup_gradient_sq(fp, space, P_AUTO)
    for p in cfg.p_grid:
        add(_named("sqrtp", check_sqrtp, fp, space, p, P_AUTO, cfg.sqrtp_C, sup_p))
    Q = cotype_of(space)[0]
    if any(p >= Q for p in cfg.p_grid):
        add(_named("gamma_comparison", check_gamma_comparison,
                   fp, space, cfg.p_grid, P_AUTO, True, sup_p))
    add(_named("exp_moment", check_exp_moment, fp, space, cfg.c0_report, P_AUTO,
               cfg.tau, sup_p))
    return out


def run_suite(config):
    """Run every check over ``config.trials`` seeded instances.

    Trial ``t`` draws from SeedSequence(seed, spawn_key=(t,)), so the result
    list is identical however trials are scheduled. Results are sorted by
    (check name, trial).
    """
    config.validate()
    per_trial = pmap(lambda t: _trial(config, t), range(config.trials))
    flat = [(res.name, t, k, res) for t, rs in enumerate(per_trial) for k, res in enumerate(rs)]
    flat.sort(key=lambda item: item[:3])
    return [item[3] for item in flat]


def summarize(results, seed=None):
    counts = {"pass": 0, "fail": 0, "report": 0}
    for r in results:
        counts[r.status] += 1
    counts["seed"] = seed
    ratios = [r.params["ratio"] for r in results
              if r.name == "talagrand" and r.params.get("ratio") is not None]
    if ratios:
        counts["talagrand_max_ratio"] = max(ratios)
    return counts


def report(results, config=None):
    """Report document: results, summary and (optionally) the suite config."""
    doc = {"results": [r.to_dict() for r in results],
           "summary": summarize(results, None if config is None else config.seed)}
    if config is not None:
        doc["config"] = config.to_dict()
    return doc
