"""Command-line front end.

Commands
--------
sample   draw X values (direct / compound / beta method)
tail     exact lower-tail probabilities on a (t, lambda) grid
bounds   full bound report table on a (t, lambda) grid
poisson  comparison probabilities for two independent Poissons
tree     root-finding success-rate sweeps on (n, k) grids
verify   run the self-verification suite; exit status 1 on any failure

Exit statuses: 0 success, 1 verification failure, 2 usage or configuration
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import DEFAULT_SEED, RunConfig
from .sampling import SimParams
from .tables import (
    POISSON_COLUMNS,
    SAMPLE_COLUMNS,
    TAIL_COLUMNS,
    build_poisson_rows,
    build_sample_rows,
    build_tail_rows,
    emit_tail_table,
    emit_tree_experiment,
    write_table,
)
from .verify import run_verify_suite

_EXIT_OK = 0
_EXIT_VERIFY_FAILED = 1
_EXIT_USAGE = 2
_EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodtail",
        description="Samplers, exact tails, bounds, and tree experiments "
                    "for the clipped partial-sum product.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="master seed (default %(default)s)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       dest="output_format")
        p.add_argument("--out", dest="output_path", default=None,
                       help="output file (stdout if omitted)")

    p = sub.add_parser("sample", help="draw samples of X")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--method", choices=("direct", "compound", "beta"),
                   default="direct")
    p.add_argument("--beta-shape", dest="beta_shape", type=float, default=None)
    add_common(p)

    p = sub.add_parser("tail", help="exact tail probabilities")
    p.add_argument("--t", dest="t_grid", type=float, nargs="+", required=True)
    p.add_argument("--lambda", dest="lambda_grid", type=float, nargs="+",
                   required=True)
    add_common(p)

    p = sub.add_parser("bounds", help="full bound report table")
    p.add_argument("--t", dest="t_grid", type=float, nargs="+", required=True)
    p.add_argument("--lambda", dest="lambda_grid", type=float, nargs="+",
                   required=True)
    add_common(p)

    p = sub.add_parser("poisson", help="two-Poisson comparison probabilities")
    p.add_argument("--mu", dest="mu_grid", type=float, nargs="+", required=True)
    p.add_argument("--nu", dest="nu_grid", type=float, nargs="+", required=True)
    add_common(p)

    p = sub.add_parser("tree", help="root-finding success-rate sweep")
    p.add_argument("--n", dest="n_grid", type=int, nargs="+", required=True)
    p.add_argument("--k", dest="k_grid", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=200)
    add_common(p)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--report", default=None,
                   help="write the JSON report here (stdout if omitted)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tolerance-scale", dest="tolerance_scale", type=float,
                   default=1.0, help="multiply every tolerance (0 forces "
                                     "every check to fail)")
    p.add_argument("--quick", action="store_true",
                   help="reduced sample sizes for a fast smoke run")
    return parser


def _run_verify(args) -> int:
    config = RunConfig(command="verify", seed=args.seed,
                       tolerance_scale=args.tolerance_scale)
    if args.quick:
        config.mc_samples = 20_000
        config.ks_samples = 20_000
        config.gof_samples = 20_000
        config.reroot_trees = 40
        config.tree_n = 200
        config.tree_trials = 40
    report = run_verify_suite(config)
    text = report.to_json() + "\n"
    if args.report is None:
        sys.stdout.write(text)
    else:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(text)
        failed = [c.name for c in report.checks if not c.passed]
        status = "PASS" if report.overall_pass else f"FAIL ({', '.join(sorted(set(failed)))})"
        print(f"verification {status}: {len(report.checks)} checks, "
              f"{report.elapsed_seconds:.1f}s, report -> {args.report}")
    return _EXIT_OK if report.overall_pass else _EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "sample":
            params = SimParams(lam=args.lam, beta_shape=args.beta_shape,
                               rng_seed=args.seed)
            rows = build_sample_rows(params, args.method, args.count, args.seed)
            write_table(rows, SAMPLE_COLUMNS, args.output_format,
                        args.output_path)
        elif args.command == "tail":
            rows = build_tail_rows(args.t_grid, args.lambda_grid)
            write_table(rows, TAIL_COLUMNS, args.output_format,
                        args.output_path)
        elif args.command == "bounds":
            config = RunConfig(command="bounds", seed=args.seed,
                               t_grid=tuple(args.t_grid),
                               lambda_grid=tuple(args.lambda_grid),
                               output_format=args.output_format,
                               output_path=args.output_path)
            emit_tail_table(config)
        elif args.command == "poisson":
            rows = build_poisson_rows(args.mu_grid, args.nu_grid)
            write_table(rows, POISSON_COLUMNS, args.output_format,
                        args.output_path)
        elif args.command == "tree":
            config = RunConfig(command="tree", seed=args.seed,
                               n_grid=tuple(args.n_grid),
                               k_grid=tuple(args.k_grid),
                               trials=args.trials,
                               output_format=args.output_format,
                               output_path=args.output_path)
            emit_tree_experiment(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return _EXIT_IO
    return _EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
