"""Command-line entry point: ``usc-polariton run`` and ``usc-polariton compare``.

Exit codes: 0 success, 1 comparison outside tolerance, 2 invalid configuration
or incompatible runs, 3 solver failure, 4 file-system failure.

``USC_POLARITON_THREADS`` caps the BLAS thread pools; it is applied before
numpy is imported.
"""
from __future__ import annotations

import argparse
import os
import sys

THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _limit_threads():
    count = os.environ.get("USC_POLARITON_THREADS")
    if count:
        for var in THREAD_VARIABLES:
            os.environ[var] = count


def build_parser():
    parser = argparse.ArgumentParser(prog="usc-polariton",
                                     description="Run and compare polariton dissipation scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file (or a bundled scenario name)")
    run.add_argument("config")
    run.add_argument("--out", required=True, help="output directory")
    cmp = sub.add_parser("compare", help="compare one exported table of two runs")
    cmp.add_argument("run_a")
    cmp.add_argument("run_b")
    cmp.add_argument("--quantity", required=True,
                     help="trajectory, spectrum, weight or moments, optionally table:column")
    cmp.add_argument("--tol", type=float, required=True)
    sub.add_parser("list", help="list bundled scenarios")
    return parser


def _run(args):
    from numpy.linalg import LinAlgError

    from .errors import ConfigError, PolaritonError
    from .scenario import load_scenario, run_scenario
    try:
        scenario = load_scenario(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 4
    try:
        manifest = run_scenario(scenario, args.out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    except (PolaritonError, ArithmeticError, LinAlgError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(f"{manifest['name']}: wrote {', '.join(manifest['outputs'])} to {args.out} "
          f"in {manifest['wall_time_s']:.1f} s")
    return 0


def _compare(args):
    from .scenario import SchemaMismatch, compare_runs
    try:
        rows = compare_runs(args.run_a, args.run_b, args.quantity)
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read runs: {exc}", file=sys.stderr)
        return 4
    print(f"{'column':<14}{'max_abs':>14}{'rms':>14}")
    worst = 0.0
    for name, max_abs, rms in rows:
        print(f"{name:<14}{max_abs:>14.6g}{rms:>14.6g}")
        worst = max(worst, max_abs)
    within = worst <= args.tol
    print(f"{'within' if within else 'outside'} tolerance {args.tol:g} (max {worst:.6g})")
    return 0 if within else 1


def main(argv=None):
    _limit_threads()
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    if args.command == "compare":
        return _compare(args)
    from .scenario import bundled_scenarios
    print("\n".join(bundled_scenarios()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
