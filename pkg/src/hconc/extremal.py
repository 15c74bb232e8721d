"""Search for Lipschitz functions with large moments (sharpness probes).

The objective is the centered moment ``(E ||f - Ef||^p)^{1/p}`` over functions
whose sup gradient is at most 1. Every gradient is 2-homogeneous, so the
constraint is enforced exactly by global rescaling; the search therefore
climbs the scale-invariant ratio ``moment / sqrt(sup gradient)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spaces
from .cube import CubeFunction, function_to_dict, vertices
from .errors import BudgetExceeded, ConfigError, DegenerateInput, OutOfRange
from .functionals import (EXACT_MAX_N, P_AUTO, GradientMode, _gradient_values,
                          is_exact_gradient, lipschitz_normalize,
                          sup_gradient_sq)
from .util import pmap

FD_STEP = 1e-4
MAX_VARIABLES = 4096
RESIDUAL_TOL = 1e-8

__all__ = ["SearchConfig", "Witness", "lipschitz_normalize", "baseline_witness",
           "maximize_beta", "sharpness_report", "achieved_value"]


@dataclass
class SearchConfig:
    n: int = 4
    space: spaces.SpaceDescriptor = field(default_factory=spaces.scalar)
    p: float = 8.0
    mode: GradientMode = P_AUTO
    iterations: int = 200
    restarts: int = 4
    step: float = 0.05
    seed: int = 0
    mean_zero: bool = True
    perturbation: float = 0.1
    keep_traces: bool = False

    def validate(self):
        if self.iterations < 1 or self.restarts < 1:
            raise ConfigError("iterations and restarts must be at least 1")
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if not self.p >= 1:
            raise ConfigError("p must be >= 1")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if not is_exact_gradient(self.space, self.mode):
            raise ConfigError(f"{self.mode.label()} gradient is not exact on {self.space.label()}")
        if self.n > EXACT_MAX_N or (1 << self.n) * self.space.ambient_dim > MAX_VARIABLES:
            raise BudgetExceeded(
                f"search over 2^{self.n} x {self.space.ambient_dim} values exceeds the budget")


@dataclass
class Witness:
    function: CubeFunction
    achieved: float
    constraint_residual: float
    history: list
    p: float
    space: spaces.SpaceDescriptor = field(default_factory=spaces.scalar)
    traces: list = field(default_factory=list)

    def to_dict(self):
        doc = function_to_dict(self.function, self.space)
        doc.update(achieved=self.achieved, p=self.p, residual=self.constraint_residual,
                   history=list(self.history))
        return doc


def achieved_value(f, space, p):
    """(E ||f - E f||^p)^{1/p}."""
    r = spaces.norm(space, f.values - f.values.mean(axis=0))
    return float(np.mean(r ** p)) ** (1.0 / p)


def _witness(f, space, mode, p, history, traces=()):
    f = lipschitz_normalize(f, space, mode)
    residual = sup_gradient_sq(f, space, mode) - 1.0
    return Witness(f, achieved_value(f, space, p), residual, list(history), p, space,
                   list(traces))


def baseline_values(n, space):
    """Normalized Rademacher sum sum_i x_i / sqrt(n) along the first coordinate."""
    vals = np.zeros((1 << n, space.ambient_dim))
    vals[:, 0] = vertices(n).sum(axis=1) / math.sqrt(n)
    return vals


def baseline_witness(n, p=2.0, space=None, mode=P_AUTO):
    """The normalized Rademacher sum; both P and Gamma gradients equal 1 everywhere."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    space = spaces.scalar() if space is None else space
    f = CubeFunction(n, space.ambient_dim, baseline_values(n, space))
    residual = sup_gradient_sq(f, space, mode) - 1.0
    value = achieved_value(f, space, p)
    return Witness(f, value, residual, [value], p, space)


def _ratio(batch, n, space, mode, p, mean_zero):
    """Scale-invariant objective for a batch of shape (B, 2**n, dim)."""
    if mean_zero:
        batch = batch - batch.mean(axis=-2, keepdims=True)
    sup = _gradient_values(batch, n, space, mode).max(axis=-1)
    centered = batch - batch.mean(axis=-2, keepdims=True)
    r = spaces.norm(space, centered)
    value = np.mean(r ** p, axis=-1) ** (1.0 / p)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sup > 0, value / np.sqrt(np.where(sup > 0, sup, 1.0)), 0.0)


def _project(vals, n, space, mode, mean_zero):
    if mean_zero:
        vals = vals - vals.mean(axis=0)
    sup = _gradient_values(vals, n, space, mode).max()
    if not sup > 0:
        return None
    return vals / math.sqrt(sup)


def _restart(cfg, r):
    n, space, mode, p = cfg.n, cfg.space, cfg.mode, cfg.p
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(r,)))
    x = None
    while x is None:
        noise = rng.standard_normal((1 << n, space.ambient_dim))
        start = baseline_values(n, space) + cfg.perturbation * noise
        x = _project(start, n, space, mode, cfg.mean_zero)
    shape = x.shape
    m = x.size
    basis = np.eye(m).reshape((m,) + shape)
    current = float(_ratio(x[None], n, space, mode, p, cfg.mean_zero)[0])
    best, best_x = current, x
    eta = cfg.step
    trace = []
    for _ in range(cfg.iterations):
        probes = np.concatenate((x[None] + FD_STEP * basis, x[None] - FD_STEP * basis))
        vals = _ratio(probes, n, space, mode, p, cfg.mean_zero)
        grad = ((vals[:m] - vals[m:]) / (2 * FD_STEP)).reshape(shape)
        gnorm = float(np.sqrt((grad * grad).sum()))
        if gnorm > 0:
            cand = _project(x + eta * math.sqrt(m) * grad / gnorm, n, space, mode, cfg.mean_zero)
            value = -math.inf if cand is None else float(
                _ratio(cand[None], n, space, mode, p, cfg.mean_zero)[0])
            if value > current:
                x, current = cand, value
                eta = min(eta * 1.2, 1.0)
            else:
                eta *= 0.5
        if eta < 1e-12:
            eta = cfg.step
        if current > best:
            best, best_x = current, x
        trace.append(best)
    return best, best_x, trace


def maximize_beta(config):
    """Projected finite-difference ascent with restarts.

    Each restart starts from the baseline plus a seeded Gaussian perturbation,
    takes central-difference gradients (h = 1e-4) of the normalized objective,
    re-centers when ``mean_zero`` and rescales onto the constraint. The baseline
    is kept as incumbent, so the result is never below it.
    """
    config.validate()
    base = baseline_witness(config.n, config.p, config.space, config.mode)
    runs = pmap(lambda r: _restart(config, r), range(config.restarts))
    history = [b for b, _, _ in runs]
    traces = [t for _, _, t in runs] if config.keep_traces else []
    best_value, best_vals = base.achieved, base.function.values
    for value, vals, _ in runs:
        if value > best_value:
            best_value, best_vals = value, vals
    f = CubeFunction(config.n, config.space.ambient_dim, best_vals)
    if sup_gradient_sq(f, config.space, config.mode) <= 0:
        raise DegenerateInput("search collapsed to a constant function")
    w = _witness(f, config.space, config.mode, config.p, history, traces)
    if w.achieved < base.achieved:
        w = base
        w.history = history
        w.traces = traces
    return w


def sharpness_report(Q, tau, witness):
    """Compare the witness at p = tau Q^2 with the target moment Q.

    When the target is met, the one-term lower bound (tau / 2) Q^2 on log Sigma
    follows; the report is informational only.
    """
    if not tau > 0 or not Q > 0:
        raise ConfigError("Q and tau must be positive")
    p = tau * Q * Q
    if p < 1:
        raise OutOfRange(f"tau Q^2 = {p:.4g} < 1: moment regime out of range")
    achieved = achieved_value(witness.function, witness.space, p)
    met = achieved >= Q
    one_term = (p * math.log(tau) + 2 * p * math.log(Q) - p * math.log(p) + p
                - math.log(Q / 2.0))
    return {
        "Q": Q, "tau": tau, "p": p, "achieved": achieved, "target": Q,
        "target_met": met, "gap": Q - achieved,
        "log_sigma_lower_bound": tau * Q * Q / 2.0 if met else None,
        "one_term_expression": one_term if met else None,
        "witness_residual": witness.constraint_residual,
        "space": witness.space.label(),
    }
