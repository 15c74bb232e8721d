"""Command-line entry point: ``hconc {verify,moments,matrix,extremal,info}``.

Exit status is 0 when no check failed, 1 on a failed check or a computational
error (reported as a JSON record on stdout), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from . import spaces
from .cube import load_function
from .errors import ConfigError, HconcError
from .extremal import SearchConfig, maximize_beta, sharpness_report
from .functionals import moment_from_norms, norms, parse_mode
from .matrix import khintchine_summary, run_matrix_suite
from .util import dumps, format_float, write_json
from .verifier import (TAU_KE, SuiteConfig, gamma_bound, report, run_suite,
                       sqrtp_bound, summarize)


class UsageError(Exception):
    pass


def parse_grid(text):
    """``start:end:step`` (inclusive end) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) == 2:
                parts.append(1.0)
            start, end, step = parts
            if step <= 0 or end < start:
                raise ValueError
            count = int(math.floor((end - start) / step + 1e-9)) + 1
            return tuple(start + k * step for k in range(count))
        return tuple(float(t) for t in text.split(",") if t)
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:end:step") from None


def _space_from_args(args):
    kind = args.space
    try:
        if kind == "scalar":
            return spaces.scalar()
        if kind == "euclidean":
            return spaces.euclidean(args.d)
        if kind == "schatten":
            return spaces.schatten(args.p, args.d)
        return spaces.operator(args.d)
    except HconcError as exc:
        raise UsageError(str(exc)) from None


def _mode(text):
    try:
        return parse_mode(text)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _add_space(parser, p_default=4.0):
    parser.add_argument("--space", choices=spaces.KINDS, default="scalar")
    parser.add_argument("--d", type=int, default=3, help="vector/matrix dimension")
    parser.add_argument("--p", type=float, default=p_default, help="Schatten exponent")


def build_parser():
    parser = argparse.ArgumentParser(prog="hconc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the randomized inequality suite")
    v.add_argument("--n", type=int, default=4)
    _add_space(v)
    v.add_argument("--mode", default="gamma", help="gamma | p | p-mc<k> | weak")
    v.add_argument("--p-grid", default="2:16:1")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tau", type=float, default=TAU_KE)
    v.add_argument("--c0", type=float, default=1.0)
    v.add_argument("--kappa2", type=float, default=2.0)
    v.add_argument("--sqrtp-c", type=float, default=1.0)
    v.add_argument("--eps", default="0.001,1")
    v.add_argument("--out", default="report.json")

    m = sub.add_parser("moments", help="moment curve of a function file")
    m.add_argument("--fn", required=True, help="function JSON file")
    _add_space(m)
    m.add_argument("--p-grid", default="2:16:1")
    m.add_argument("--uncentered", action="store_true")
    m.add_argument("--sqrtp-c", type=float, default=1.0)
    m.add_argument("--csv", default=None)

    x = sub.add_parser("matrix", help="matrix-valued moment checks and Khintchine ratios")
    x.add_argument("--n", type=int, default=4)
    x.add_argument("--d", type=int, default=8)
    x.add_argument("--p-grid", default="2,2.5")
    x.add_argument("--trials", type=int, default=10)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--c2", type=float, default=1.0)
    x.add_argument("--matrices", type=int, default=1000,
                   help="random matrices for the Schatten/operator comparison")
    x.add_argument("--out", default="matrix.json")

    e = sub.add_parser("extremal", help="search for near-extremal Lipschitz functions")
    e.add_argument("--n", type=int, default=4)
    _add_space(e)
    e.add_argument("--moment", type=float, default=8.0, help="moment exponent to maximize")
    e.add_argument("--mode", default="p")
    e.add_argument("--iters", type=int, default=200)
    e.add_argument("--restarts", type=int, default=4)
    e.add_argument("--step", type=float, default=0.05)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--Q", type=float, default=None, help="sharpness target")
    e.add_argument("--tau", type=float, default=0.25)
    e.add_argument("--out", default="witness.json")

    sub.add_parser("info", help="list supported spaces and cotype data")
    return parser


def _check_positive(name, value, minimum=1):
    if value < minimum:
        raise UsageError(f"--{name} must be >= {minimum}")


def cmd_verify(args):
    _check_positive("trials", args.trials)
    _check_positive("n", args.n)
    try:
        eps = tuple(float(t) for t in args.eps.split(",") if t)
    except ValueError:
        raise UsageError(f"bad --eps {args.eps!r}") from None
    cfg = SuiteConfig(n=args.n, space=_space_from_args(args), trials=args.trials,
                      seed=args.seed, p_grid=parse_grid(args.p_grid),
                      mode=_mode(args.mode), tau=args.tau, c0_report=args.c0,
                      kappa2_report=args.kappa2, sqrtp_C=args.sqrtp_c, eps=eps)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    results = run_suite(cfg)
    write_json(args.out, report(results, cfg))
    summary = summarize(results, cfg.seed)
    print(dumps(summary))
    return 1 if summary["fail"] else 0


def moment_rows(f, space, grid, center=True, C=1.0):
    """(p, a(p), beta(p), gamma(p) or None, sqrt(p)-growth bound) per grid point."""
    Q, C_E = spaces.cotype_of(space)
    r = norms(f, space, center)
    rows = []
    for p in grid:
        a = moment_from_norms(r, p)
        b = math.log(a) / p if a > 0 else -math.inf
        g = gamma_bound(p, Q, C_E) if p >= Q else None
        rows.append((p, a, b, g, sqrtp_bound(p, Q, C_E, C)))
    return rows


def cmd_moments(args):
    f, space = load_function(args.fn)
    if space is None:
        space = _space_from_args(args)
    grid = parse_grid(args.p_grid)
    if any(p < 1 for p in grid):
        raise UsageError("p-grid entries must be >= 1")
    rows = moment_rows(f, space, grid, not args.uncentered, args.sqrtp_c)
    header = ["p", "a_p", "beta_p", "gamma_p", "sqrtp_bound"]

    def cells(row):
        return [format_float(v).strip('"') if v is not None else "" for v in row]

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(cells(row))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(cells(row))
    return 0


def cmd_matrix(args):
    _check_positive("trials", args.trials)
    _check_positive("n", args.n)
    _check_positive("d", args.d, 3)
    _check_positive("matrices", args.matrices, 0)
    grid = parse_grid(args.p_grid)
    if any(p < 1 for p in grid):
        raise UsageError("p-grid entries must be >= 1")
    results = run_matrix_suite(args.n, args.d, grid, args.trials, args.seed, args.c2,
                               args.matrices)
    summary = summarize(results, args.seed)
    summary["khintchine"] = khintchine_summary(results)
    doc = {"results": [r.to_dict() for r in results], "summary": summary,
           "config": {"n": args.n, "d": args.d, "p_grid": list(grid), "trials": args.trials,
                      "seed": args.seed, "c2": args.c2, "matrices": args.matrices}}
    write_json(args.out, doc)
    print(dumps(summary))
    return 1 if summary["fail"] else 0


def cmd_extremal(args):
    _check_positive("iters", args.iters)
    _check_positive("restarts", args.restarts)
    _check_positive("n", args.n)
    if not args.step > 0:
        raise UsageError("--step must be positive")
    cfg = SearchConfig(n=args.n, space=_space_from_args(args), p=args.moment,
                       mode=_mode(args.mode), iterations=args.iters,
                       restarts=args.restarts, step=args.step, seed=args.seed)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    w = maximize_beta(cfg)
    doc = w.to_dict()
    if args.Q is not None:
        try:
            doc["sharpness"] = sharpness_report(args.Q, args.tau, w)
        except HconcError as exc:
            doc["sharpness"] = {"Q": args.Q, "tau": args.tau, "note": str(exc)}
    write_json(args.out, doc)
    print(dumps({"achieved": w.achieved, "residual": w.constraint_residual,
                 "history": w.history, "sharpness": doc.get("sharpness")}))
    return 0


def cmd_info(args):
    print(dumps({"spaces": spaces.registry()}))
    return 0


COMMANDS = {"verify": cmd_verify, "moments": cmd_moments, "matrix": cmd_matrix,
            "extremal": cmd_extremal, "info": cmd_info}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hconc {args.command}: {exc}", file=sys.stderr)
        return 2
    except (HconcError, OSError, ValueError) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
