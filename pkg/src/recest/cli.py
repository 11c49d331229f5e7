"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 condition violated (``check``
only), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from recest.core import NonFiniteUpdate, run_trajectory
from recest.diagnostics import (
    ConditionReport,
    GridSpec,
    MaxDepth,
    check_B1,
    check_B2,
    check_M_conditions,
    check_R_conditions,
    conditional_moments,
    k_trace,
    ktrace_csv,
    plateaus,
    quadrature,
    r_condition_inputs,
    script_n_trace,
)
from recest.diagnostics.reports import REPORT_VERSION, to_jsonable
from recest.harness import (
    EXPLOSIVE_T_CAP,
    MonteCarloConfig,
    ReplicationError,
    default_workers,
    estimate_rate,
    run_monte_carlo,
)
from recest.models import IIDScheme, UnknownModel, get_model

EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, EXIT_NUMERIC = 0, 1, 2, 3
CONDITIONS = ("B1", "B2", "M", "R", "G")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _vec(text: str):
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or comma list: {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("values must be finite")
    return vals


def _int_list(text: str):
    try:
        return [int(float(s)) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad checkpoint list: {text!r}") from None


def _common(p, t_max=1000):
    p.add_argument("--model", required=True)
    p.add_argument("--theta", type=_vec, default=[1.0], help="true parameter")
    p.add_argument("--theta0", type=_vec, default=[0.0], help="initial estimate")
    p.add_argument("--t-max", type=int, default=t_max)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recest", description="Recursive parameter estimation experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="one trajectory of the recursion")
    _common(p, t_max=100)

    p = sub.add_parser("rate", help="Monte Carlo rate experiment")
    _common(p, t_max=10_000)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--checkpoints", type=_int_list, default=None)
    p.add_argument("--delta", type=float, default=0.4)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: RECEST_WORKERS or 1)")

    p = sub.add_parser("check", help="check a hypothesis set")
    _common(p, t_max=10_000)
    p.add_argument("--condition", required=True)
    p.add_argument("--c", type=float, default=1.0, help="weight C (scalar models)")
    p.add_argument("--u-max", type=float, default=1.9)
    p.add_argument("--n-points", type=int, default=41)
    p.add_argument("--threshold", type=float, default=1e6, help="B2 bound")
    p.add_argument("--epsilon", type=float, default=0.5, help="R3 exponent / G annulus")
    p.add_argument("--eps-tilde", type=float, default=0.05)
    p.add_argument("--m1-threshold", type=float, default=0.01)
    p.add_argument("--plateau-tol", type=float, default=0.01)

    p = sub.add_parser("oracle", help="closed form against quadrature")
    p.add_argument("--model", required=True)
    p.add_argument("--quantity", choices=("b", "m2"), required=True)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-6, help="allowed |closed - quadrature|")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.add_argument("--output", "-o", default="-")

    p = sub.add_parser("ktrace", help="K-trace (and N statistic for additive families)")
    _common(p, t_max=1000)
    p.add_argument("--delta", type=float, default=0.4)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1, help="annulus for the N statistic")
    return parser


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False) + "\n"


def _model(name):
    try:
        return get_model(name)
    except UnknownModel:
        raise UsageError(f"unknown model {name!r}") from None


def _check_dim(scheme, *vecs):
    for v in vecs:
        if len(v) != scheme.dim:
            raise UsageError(f"parameter {v} has dimension {len(v)}, model expects {scheme.dim}")


def cmd_simulate(args) -> int:
    scheme = _model(args.model)
    _check_dim(scheme, args.theta, args.theta0)
    if args.t_max < 0:
        raise UsageError("--t-max must be >= 0")
    recs = run_trajectory(scheme, args.theta, args.theta0, args.t_max, args.seed)
    if args.format == "json":
        rows = [{"t": r.t, "x": r.x, "theta_hat": r.theta_hat, "gamma": r.gamma, "psi": r.psi,
                 "increment": r.increment, "skipped": r.skipped} for r in recs]
        _write(args.output, _json({"spec_version": REPORT_VERSION, "model": args.model, "steps": rows}))
        return EXIT_OK

    def cell(a):
        return ";".join(_fmt(v) for v in np.ravel(a))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "theta_hat", "gamma", "psi", "increment", "skipped"])
    for r in recs:
        w.writerow([r.t, cell(r.x), cell(r.theta_hat), cell(r.gamma), cell(r.psi),
                    cell(r.increment), int(r.skipped)])
    _write(args.output, buf.getvalue())
    return EXIT_OK


def _default_checkpoints(t_max):
    lo = min(100, t_max)
    if t_max <= lo:
        return [max(1, t_max // 4), max(2, t_max // 2), t_max]
    n = int(round(2 * math.log10(t_max / lo))) + 1
    pts = np.unique(np.round(np.logspace(math.log10(lo), math.log10(t_max), max(n, 3))).astype(int))
    return pts.tolist()


def cmd_rate(args) -> int:
    scheme = _model(args.model)
    _check_dim(scheme, args.theta, args.theta0)
    if not 0 < args.delta < 0.5:
        raise UsageError("--delta must lie in the open interval (0, 1/2)")
    if args.reps < 30:
        raise UsageError("--reps must be >= 30")
    if args.model == "ar1" and abs(args.theta[0]) > 1 and args.t_max > EXPLOSIVE_T_CAP:
        raise UsageError(f"explosive AR(1) needs --t-max <= {EXPLOSIVE_T_CAP}")
    cps = args.checkpoints if args.checkpoints is not None else _default_checkpoints(args.t_max)
    if len(cps) < 3:
        raise UsageError("at least 3 checkpoints are needed")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    try:
        cfg = MonteCarloConfig(args.reps, args.t_max, tuple(cps), args.seed, tuple(args.theta),
                               tuple(args.theta0), args.delta, "model")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    workers = args.threads if args.threads is not None else default_workers()
    ens = run_monte_carlo(scheme, cfg, workers=workers)
    if args.format == "csv":
        _write(args.output, ens.to_csv())
        return EXIT_OK
    report = estimate_rate(ens)
    out = report.to_dict()
    out["seed"] = args.seed
    out["theta"] = args.theta
    out["theta0"] = args.theta0
    out["t_max"] = args.t_max
    _write(args.output, _json(out))
    return EXIT_OK


def _grid(args):
    if not args.u_max > 0:
        raise UsageError("--u-max must be positive")
    try:
        return GridSpec.symmetric(args.u_max, args.n_points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _g_report(scheme, recs, args) -> ConditionReport:
    nt = script_n_trace(scheme, recs, args.theta, args.theta0, epsilon=args.epsilon)
    g3 = plateaus(nt.g3_partial_sum, args.plateau_tol)
    g2 = not plateaus(nt.g2_partial_sum, args.plateau_tol)
    return ConditionReport(
        condition="G-trace",
        region={"t_max": len(recs), "annulus": [args.epsilon, 1.0 / args.epsilon]},
        verdicts=np.array([g2, g3]),
        witnesses={"g2_total": float(nt.g2_partial_sum[-1]), "g3_total": float(nt.g3_partial_sum[-1]),
                   "N_final": float(nt.N[-1])},
        holds=bool(g2 and g3),
        parameters={"epsilon": args.epsilon, "plateau_tol": args.plateau_tol,
                    "sub_conditions": ["G2 (divergent)", "G3 (plateau)"]},
        notes=["G2 asks for divergence on a set of positive probability; "
               "this is a single-trajectory check"],
    )


def cmd_check(args) -> int:
    cond = args.condition.upper()
    if cond not in CONDITIONS:
        raise UsageError(f"unknown condition {args.condition!r}; choose from {', '.join(CONDITIONS)}")
    scheme = _model(args.model)
    _check_dim(scheme, args.theta, args.theta0)
    additive = hasattr(scheme, "fam")
    if cond in ("B1", "B2"):
        if not isinstance(scheme, IIDScheme):
            raise UsageError(f"{cond} applies to i.i.d. models only")
        grid = _grid(args)
        C = args.c * np.eye(scheme.dim)
        rep = check_B1(scheme, C, grid) if cond == "B1" else check_B2(scheme, grid, threshold=args.threshold)
    elif cond == "M":
        if not additive:
            raise UsageError("M applies to additive exponential families only")
        recs = run_trajectory(scheme, args.theta, args.theta0, args.t_max, args.seed)
        rep = check_M_conditions(scheme.fam, _grid(args), [r.x for r in recs], args.m1_threshold)
    elif cond == "R":
        if not 0 < args.epsilon < 1:
            raise UsageError("--epsilon must lie in (0, 1)")
        recs = run_trajectory(scheme, args.theta, args.theta0, args.t_max, args.seed)
        s = r_condition_inputs(scheme, recs, args.theta, args.theta0, args.eps_tilde)
        rep = check_R_conditions(s["a"], s["lambda"], s["P"], s["moment"], args.epsilon,
                                 plateau_tol=args.plateau_tol)
    else:
        if not additive:
            raise UsageError("G applies to additive exponential families only")
        if not 0 < args.epsilon < 1:
            raise UsageError("--epsilon must lie in (0, 1)")
        recs = run_trajectory(scheme, args.theta, args.theta0, args.t_max, args.seed)
        rep = _g_report(scheme, recs, args)
    out = rep.to_dict()
    out["model"] = args.model
    if rep.witnesses.get("u") is not None:
        out["violating_u"] = to_jsonable(rep.violations().get("u", []))
    _write(args.output, _json(out))
    return EXIT_OK if rep.holds else EXIT_VIOLATED


def cmd_oracle(args) -> int:
    scheme = _model(args.model)
    if getattr(scheme, "density", None) is None or not scheme.has_drift or scheme.dim != 1:
        raise UsageError(f"model {args.model!r} has no density with closed-form moments")
    u = args.u
    b, M, _ = conditional_moments(scheme, 0.0, u)
    closed = float(b[0]) if args.quantity == "b" else float(M[0, 0])

    def integrand(x):
        p = float(np.asarray(scheme.psi(1, np.array([u]), x, None)).reshape(-1)[0])
        return (p if args.quantity == "b" else p * p) * scheme.density(0.0, x)

    quad = quadrature(integrand, args.quad_tol)
    diff = abs(closed - quad)
    _write(args.output, _json({"spec_version": REPORT_VERSION, "model": args.model,
                               "quantity": args.quantity, "u": u, "closed_form": closed,
                               "quadrature": quad, "abs_diff": diff, "tol": args.tol}))
    return EXIT_OK if diff <= args.tol else EXIT_NUMERIC


def cmd_ktrace(args) -> int:
    scheme = _model(args.model)
    _check_dim(scheme, args.theta, args.theta0)
    if not 0 <= args.delta < 0.5:
        raise UsageError("--delta must lie in [0, 1/2)")
    if not scheme.has_drift:
        raise UsageError(f"model {args.model!r} has no closed-form moments")
    recs = run_trajectory(scheme, args.theta, args.theta0, args.t_max, args.seed)
    C = args.c * np.eye(scheme.dim)
    kt = k_trace(scheme, recs, args.theta, args.theta0, C=C, delta=args.delta)
    nt = None
    if hasattr(scheme, "fam"):
        nt = script_n_trace(scheme, recs, args.theta, args.theta0, epsilon=args.epsilon)
    if args.format == "json":
        out = {"spec_version": REPORT_VERSION, "model": args.model, "delta": args.delta,
               "t": kt.t, "V": kt.V, "dV": kt.dV, "drift": kt.drift, "moment": kt.moment,
               "K": kt.K, "premise_partial_sum": kt.premise_partial_sum}
        if nt is not None:
            out["scriptN"] = nt.N
        _write(args.output, _json(out))
    else:
        _write(args.output, ktrace_csv(kt, nt))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "rate": cmd_rate, "check": cmd_check,
            "oracle": cmd_oracle, "ktrace": cmd_ktrace}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"recest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonFiniteUpdate, ReplicationError, MaxDepth, ArithmeticError) as exc:
        print(f"recest: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"recest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
