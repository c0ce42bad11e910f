"""Command-line interface: one executable with subcommands.

    lipext validate --input inst.json
    lipext extend   --input inst.json --output result.json [--seed 42]
    lipext gaussmax --m 2 10 100 --trials 100000 [--tail-grid 0 1 2 3]
    lipext growth   --n 16 64 256 --mrule 64n --seeds 42

Exit codes: 0 success, 2 bad input or flags, 3 numerical failure.
LIPEXT_THREADS caps worker threads (0 or unset = auto); results are
identical for every setting.
"""

from __future__ import annotations

import argparse
import sys

from ._version import __version__
from .analysis import coordwise_baseline, growth_experiment
from .errors import (
    DimensionMismatchError,
    DomainError,
    LipextError,
    MetricError,
    MissingCoordinatesError,
    NonFiniteError,
    ParseError,
    RankDeficientError,
    SchemaError,
    SolverFailureError,
    ZeroDistanceDistinctValuesError,
)
from .fileio import (
    parse_instance,
    result_payload,
    write_growth_report,
    write_json,
    write_max_square_report,
    write_tail_report,
)
from .gauss import default_sample_count, max_square_mc, tail_prob_check
from .jl_ext import DEFAULT_PAIR_BLOCK, build, certificate, evaluate, exactness_check
from .metric import check_query_consistency

_INPUT_ERRORS = (
    ParseError,
    SchemaError,
    MetricError,
    NonFiniteError,
    DomainError,
    DimensionMismatchError,
    MissingCoordinatesError,
    ZeroDistanceDistinctValuesError,
)
_NUMERICAL_ERRORS = (RankDeficientError, SolverFailureError)


def _cmd_validate(args) -> int:
    inst = parse_instance(args.input)
    if args.strict:
        check_query_consistency(inst.queries, inst.anchors.metric)
    n, p = inst.anchors.values.shape
    print(f"OK: {n} anchors, target dimension {p}, {inst.queries.q} queries "
          f"({inst.queries.mode} mode), lip_f = {inst.anchors.lip_f:.6g}")
    return 0


def _cmd_extend(args) -> int:
    inst = parse_instance(args.input)
    seed = args.seed if args.seed is not None else (
        inst.seed if inst.seed is not None else 42)
    p = inst.anchors.values.shape[1]
    samples = args.samples if args.samples is not None else (
        inst.samples if inst.samples is not None else default_sample_count(p))

    op = build(inst.anchors, seed=seed, m=samples, pair_block=args.pair_block)
    extended = evaluate(op, inst.anchors, inst.queries)
    cert = certificate(op)
    residual = exactness_check(op, inst.anchors)
    baseline = coordwise_baseline(inst.anchors, inst.queries) if args.baseline else None

    payload = result_payload(extended, cert, residual, seed, samples,
                             baseline=baseline)
    write_json(args.output, payload)
    print(f"wrote {args.output}: certified bound {cert.bound:.6g} "
          f"(rms {cert.rms_sample_lip:.6g} / s_min {cert.s_min:.6g}), "
          f"anchor residual {residual:.3g}")
    return 0


def _cmd_gaussmax(args) -> int:
    for m in args.m:
        if m < 2:
            raise DomainError(f"--m entries must be >= 2 (the bound needs it), got {m}")
    if args.trials < 1:
        raise DomainError(f"--trials must be >= 1, got {args.trials}")
    modes = (["independent", "pair_differences"] if args.dependence == "both"
             else [args.dependence])
    reports = []
    for dep in modes:
        for m in args.m:
            rep = max_square_mc(args.seed, m, args.trials, dependence=dep)
            reports.append(rep)
            print(f"m={rep.m_gaussians:<6d} {rep.dependence:<17s} "
                  f"estimate={rep.estimate:.4f} +- {rep.std_error:.4f}  "
                  f"bound={rep.paper_bound:.4f}")
    write_max_square_report(reports, f"{args.output}.csv", f"{args.output}.json")
    print(f"wrote {args.output}.csv and {args.output}.json")
    if args.tail_grid is not None:
        points = tail_prob_check(args.seed, args.tail_grid, args.trials)
        for pt in points:
            print(f"t={pt.t:<6g} empirical={pt.empirical:.6f} "
                  f"+- {pt.std_error:.6f}  bound={pt.bound:.6f}")
        write_tail_report(points, f"{args.output}_tail.csv",
                          f"{args.output}_tail.json")
        print(f"wrote {args.output}_tail.csv and {args.output}_tail.json")
    return 0


def _cmd_growth(args) -> int:
    report = growth_experiment(args.n, p_rule=args.prule, m_rule=args.mrule,
                               seeds=args.seeds, query_count=args.queries)
    for row in report.rows:
        print(f"n={row.n:<5d} m={row.m:<7d} seed={row.seed:<6d} "
              f"bound={row.bound:.4f} ref={row.theory_reference:.4f} "
              f"empirical={row.empirical_lip:.4f} "
              f"bound/sqrt(ln n)={row.bound_over_sqrt_log_n:.4f} "
              f"[{row.runtime_s:.2f}s]")
    write_growth_report(report, f"{args.output}.csv", f"{args.output}.json")
    print(f"wrote {args.output}.csv and {args.output}.json")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipext",
        description="Lipschitz extension of maps from finite metric spaces "
                    "into Euclidean space, with certified bounds.",
    )
    parser.add_argument("--version", action="version", version=f"lipext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="parse and validate an instance file")
    p_val.add_argument("--input", required=True, help="instance JSON path")
    p_val.add_argument("--strict", action="store_true",
                       help="also check explicit query distances against the "
                            "anchor metric's triangle inequalities")
    p_val.set_defaults(func=_cmd_validate)

    p_ext = sub.add_parser("extend", help="build the operator and extend to queries")
    p_ext.add_argument("--input", required=True, help="instance JSON path")
    p_ext.add_argument("--output", required=True, help="result JSON path")
    p_ext.add_argument("--seed", type=int, default=None,
                       help="embedding seed (default: instance file, then 42)")
    p_ext.add_argument("--samples", type=int, default=None,
                       help="sample rows m (default: instance file, then max(64p, 1024))")
    p_ext.add_argument("--baseline", action="store_true",
                       help="also run the coordinatewise extension baseline")
    p_ext.add_argument("--pair-block", type=int, default=DEFAULT_PAIR_BLOCK,
                       help="pair rows per kernel block")
    p_ext.set_defaults(func=_cmd_extend)

    p_gm = sub.add_parser("gaussmax",
                          help="Monte Carlo check of the max-of-squared-Gaussians bound")
    p_gm.add_argument("--m", type=int, nargs="+", required=True,
                      help="numbers of Gaussians (each >= 2)")
    p_gm.add_argument("--trials", type=int, required=True)
    p_gm.add_argument("--seed", type=int, default=42)
    p_gm.add_argument("--dependence",
                      choices=["independent", "pair_differences", "both"],
                      default="both")
    p_gm.add_argument("--tail-grid", type=float, nargs="+", default=None,
                      help="also check the Gaussian tail bound at these thresholds")
    p_gm.add_argument("--output", default="gaussmax",
                      help="report path prefix (default: gaussmax)")
    p_gm.set_defaults(func=_cmd_gaussmax)

    p_gr = sub.add_parser("growth",
                          help="certificate growth across anchor counts")
    p_gr.add_argument("--n", type=int, nargs="+", required=True)
    p_gr.add_argument("--mrule", default="64n",
                      help="sample count rule, e.g. 64n or 4096 (default 64n)")
    p_gr.add_argument("--prule", default="8",
                      help="target dimension rule (default 8)")
    p_gr.add_argument("--seeds", type=int, nargs="+", default=[42])
    p_gr.add_argument("--queries", type=int, default=64)
    p_gr.add_argument("--output", default="growth",
                      help="report path prefix (default: growth)")
    p_gr.set_defaults(func=_cmd_growth)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LipextError as exc:  # any remaining library error is an input problem
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
