"""Command-line front end: ``entmeter measure | check | verify``.

Exit codes: 0 success, 1 input error (including unknown suite names), 2 solver
failure, 3 a negative answer: non-membership for ``check`` and at least one
failed trial for ``verify``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import Callable, Sequence

from . import channel_measures as cm
from . import divergences as dv
from . import harness
from . import state_measures as st
from .channels import is_cpptp
from .fileio import FileFormatError, load_channel, load_operator
from .operators import DEFAULT_RANK_TOL
from .sdp import FEAS_TOL, GAP_TOL, MAX_ITER, SOLVERS, SolverError

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_NONMEMBER = 0, 1, 2, 3

log = logging.getLogger("entmeter")


def _state(fn: Callable, rank: bool = False):
    def run(args, opts):
        rho = load_operator(args.input)
        if rank:
            return fn(rho, rank_tol=args.rank_tol, **opts)
        return fn(rho, **opts)

    return run


def _channel(fn: Callable):
    def run(args, opts):
        return fn(load_channel(args.input), **opts)

    return run


def _emin_channel(args, opts):
    return cm.min_rains_channel_lower(
        load_channel(args.input), samples=args.samples, restarts=args.restarts, seed=args.seed,
        rank_tol=args.rank_tol, **opts,
    )


def _divergence(name: str):
    def run(args, opts):
        if args.sigma is None:
            raise FileFormatError(f"{name} needs --sigma FILE")
        rho, sigma = load_operator(args.input), load_operator(args.sigma)
        if rho.layout.dims != sigma.layout.dims:
            raise FileFormatError(f"rho dims {rho.layout.dims} and sigma dims {sigma.layout.dims} differ")
        if name == "dmax":
            d = dv.max_relative_entropy(rho, sigma, rank_tol=args.rank_tol)
        else:
            if args.alpha is None:
                raise FileFormatError("renyi needs --alpha")
            d = dv.sandwiched_renyi(rho, sigma, args.alpha, rank_tol=args.rank_tol)
        raw = 2.0 ** d.value if d.finite else math.inf
        return st.MeasureReport(
            measure=name, value=d.value, raw=raw, primal_value=raw, dual_value=raw, gap=0.0,
            status="closed-form",
        )

    return run


MEASURES: dict[str, Callable] = {
    "en-state": _state(st.log_negativity_state),
    "en-channel": _channel(cm.log_negativity_channel),
    "rmax-state": _state(st.max_rains_state),
    "rmax-channel": _channel(cm.max_rains_channel),
    "kappa-state": _state(st.kappa_entanglement_state),
    "kappa-channel": _channel(cm.kappa_entanglement_channel),
    "emin-state": _state(st.min_rains_state, rank=True),
    "w0-state": _state(st.one_shot_exact_distillable, rank=True),
    "emin-channel-lb": _emin_channel,
    "dmax": _divergence("dmax"),
    "renyi": _divergence("renyi"),
}

CHECKS = ("ppt", "ppt-prime", "cpptp")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6f}" if math.isfinite(x) else str(x)
    return str(x)


def _print_report(report: st.MeasureReport, output: str) -> None:
    d = report.to_dict()
    if output == "json":
        print(json.dumps(d, default=harness.serialize, indent=2))
        return
    for key in ("measure", "value", "raw", "primal_value", "dual_value"):
        print(f"{key:<13} {_fmt(d[key])}")
    print(f"{'gap':<13} {d['gap']:.2e}")
    print(f"{'status':<13} {d['status']}")
    if report.rank is not None:
        print(f"{'rank':<13} {report.rank}")
    if report.lower_bound:
        print(f"{'lower_bound':<13} True")


def _input_error(exc: BaseException) -> int:
    print(f"entmeter: input error: {exc}", file=sys.stderr)
    return EXIT_INPUT


def cmd_measure(args) -> int:
    opts = {"gap_tol": args.gap_tol, "feas_tol": args.feas_tol, "max_iter": args.max_iter, "solver": args.solver}
    try:
        report = MEASURES[args.measure](args, opts)
    except SolverError as exc:
        print(f"entmeter: solver failure: {exc}", file=sys.stderr)
        sol = getattr(exc, "solution", None)
        if args.output == "json" and sol is not None:
            print(json.dumps({"measure": args.measure, "status": sol.status, "solver": sol.summary()},
                             default=harness.serialize, indent=2))
        return EXIT_SOLVER
    except (OSError, ValueError, KeyError) as exc:
        return _input_error(exc)
    _print_report(report, args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        if args.kind == "cpptp":
            member = is_cpptp(load_channel(args.input), tol=args.tol)
        else:
            rho = load_operator(args.input)
            fn = st.is_ppt if args.kind == "ppt" else st.is_ppt_prime
            member = fn(rho, tol=args.tol)
    except (OSError, ValueError) as exc:
        return _input_error(exc)
    if args.output == "json":
        print(json.dumps({"check": args.kind, "member": member}))
    else:
        print(f"{args.kind}: {'member' if member else 'not a member'}")
    return EXIT_OK if member else EXIT_NONMEMBER


def cmd_verify(args) -> int:
    try:
        harness.resolve(args.suite)
        cfg = harness.SuiteConfig(
            seed=args.seed, trials=args.trials, slack=args.slack, suites=tuple(args.suite), workers=args.workers,
        )
    except (KeyError, ValueError) as exc:
        return _input_error(exc.args[0] if exc.args else exc)

    def progress(name, k, margin):
        log.info("%s trial %d margin %.3e", name, k, margin)

    report = harness.run_suite(cfg, progress=progress)
    if args.report:
        try:
            report.write(args.report)
        except OSError as exc:
            return _input_error(exc)
    if args.output == "json":
        for line in report.lines():
            print(line)
    else:
        print(f"{'property':<22} {'trials':>6} {'fail':>5} {'worst slack':>12} {'sec':>7}")
        for r in report.results:
            print(f"{r.name:<22} {r.trials:>6} {len(r.failures):>5} {r.worst_slack:>12.3e} {r.seconds:>7.2f}")
    return EXIT_OK if report.passed else EXIT_NONMEMBER


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entmeter", description="SDP entanglement measures for states and channels")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("table", "json"), default="table")

    m = sub.add_parser("measure", parents=[common], help="evaluate one measure on a state or channel file")
    m.add_argument("measure", choices=sorted(MEASURES))
    m.add_argument("input", help="operator file (states, dmax, renyi) or channel file")
    m.add_argument("--gap-tol", type=float, default=GAP_TOL)
    m.add_argument("--feas-tol", type=float, default=FEAS_TOL)
    m.add_argument("--max-iter", type=int, default=MAX_ITER)
    m.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    m.add_argument("--solver", choices=SOLVERS, default="auto")
    m.add_argument("--sigma", help="second operator file for dmax and renyi")
    m.add_argument("--alpha", type=float, help="order for renyi")
    m.add_argument("--samples", type=int, default=8, help="random inputs for emin-channel-lb")
    m.add_argument("--restarts", type=int, default=8, help="local restarts for emin-channel-lb")
    m.add_argument("--seed", type=int, default=0, help="seed for emin-channel-lb")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("check", parents=[common], help="set membership test")
    c.add_argument("kind", choices=CHECKS)
    c.add_argument("input")
    c.add_argument("--tol", type=float, default=1e-9)
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify", parents=[common], help="run randomized property suites")
    v.add_argument("suite", nargs="+", help=f"one or more of: {', '.join(harness.suite_names())}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=5)
    v.add_argument("--slack", type=float, default=None)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--report", help="write the JSON-lines suite report here")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
