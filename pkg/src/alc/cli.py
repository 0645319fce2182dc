"""Command-line entry point.

    alc dim|nsp|recover|kron|collide|interleave --config <path>
        [--seed N] [--threads N] [--fresh-matrix] [--assert]

Exit codes: 0 success, 2 config error, 3 resource limit exceeded,
4 expectation failure (only with --assert).
"""

import argparse
import json
import sys

from alc import fracdim, harness, measureop
from alc.errors import ConfigError, InvalidArgumentError, ResourceLimitError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alc")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in harness.KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config master seed")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--fresh-matrix", action="store_true",
                        help="draw a new matrix per trial")
        sp.add_argument("--assert", dest="check", action="store_true",
                        help="fail (exit 4) when an expect_* key is violated")
    return parser


def _run(cfg, args):
    if cfg.kind in ("recover", "kron"):
        stats, rows = harness.run_trials(cfg, threads=args.threads,
                                         fresh_matrix=args.fresh_matrix)
        if cfg.output_path:
            harness.emit_trial_rows(rows, cfg.output_path)
            harness.emit_stats(stats, cfg.output_path + ".stats.csv")
        print(f"trials={stats.trials} unique_correct={stats.unique_correct} "
              f"unique_wrong={stats.unique_wrong} ambiguous={stats.ambiguous} "
              f"no_solution={stats.no_solution} "
              f"empirical_error={stats.empirical_error}")
        return stats
    if cfg.kind == "dim":
        est = harness.run_dim(cfg)
        if cfg.output_path:
            fracdim.save_dimension_estimate(est, cfg.output_path)
        print(f"slope={est.slope:.6f} slope_lo={est.slope_lo:.6f} "
              f"slope_hi={est.slope_hi:.6f} r2={est.r2:.6f}")
        return est
    if cfg.kind == "nsp":
        report = harness.run_nsp(cfg)
        if cfg.output_path:
            measureop.save_nsp_report(report, cfg.output_path)
        print(f"trials={report.trials} min_gain={report.min_gain}")
        return report
    if cfg.kind == "collide":
        report = harness.run_collide(cfg)
        if cfg.output_path:
            with open(cfg.output_path, "w") as fh:
                json.dump(report.to_dict() if report else None, fh, indent=2)
        if report is None:
            print("no collision found")
        else:
            print(f"collision objective={report.objective} "
                  f"separation={report.separation}")
        return report
    # interleave
    result = harness.run_interleave(cfg)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            json.dump(result, fh, indent=2)
    print(f"trials={result['trials']} failures={result['failures']}")
    return result


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
        cfg = harness.parse_config(text, kind=args.kind)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.master_seed = args.seed

    try:
        result = _run(cfg, args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.check:
        if cfg.kind == "interleave" and result["failures"]:
            print(f"assertion failed: {result['failures']} round-trip failures",
                  file=sys.stderr)
            return 4
        failures = harness.check_expectations(cfg, result)
        if failures:
            for msg in failures:
                print(f"assertion failed: {msg}", file=sys.stderr)
            return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
