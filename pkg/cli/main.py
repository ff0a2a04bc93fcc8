"""
hdlogit - command-line interface

Usage:
    hdlogit simulate configs/table1.json
    hdlogit frontier --kappa-grid 0.05,0.1,0.2,0.3,0.4,0.5
    hdlogit infer data.csv --label-col quality --tau rss --lrt
    hdlogit subsample-study data.csv --variable alcohol --kappas 0.1,0.18,0.26 --B 100
    hdlogit fit data.csv
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from cli.commands import cmd_fit, cmd_frontier, cmd_infer, cmd_simulate, cmd_subsample_study
from config.settings import settings
from engine.errors import HDLogitError
from utils.logger import logger

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2


def _add_dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("data", help="CSV file (comma-separated, optional header row)")
    parser.add_argument(
        "--label-col",
        default=None,
        help="Label column name or 0-based index (default: last column); 0/1 or -1/+1",
    )
    parser.add_argument(
        "--no-center",
        action="store_true",
        help="Do not subtract column means before fitting",
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with global flags and one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="hdlogit",
        description="Bias-corrected inference for high-dimensional logistic regression",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate table1.json --threads 8
  %(prog)s frontier --n 1000 --reps 200
  %(prog)s infer wine.csv --label-col quality --lrt
  %(prog)s subsample-study wine.csv --variable alcohol --kappas 0.1,0.18,0.26
        """,
    )
    parser.add_argument("--seed", type=int, default=settings.SEED, help="Master seed")
    parser.add_argument(
        "--threads", type=int, default=settings.THREADS, help="Worker processes (default: all cores)"
    )
    parser.add_argument("--out", default=None, help="Output directory")
    parser.add_argument(
        "--cache-dir", default=None, help="Frontier cache directory (HDLOGIT_CACHE takes precedence)"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Run a simulation study from a JSON config")
    simulate.add_argument("config", help="Experiment config (JSON)")
    simulate.add_argument(
        "--seed-override", type=int, default=None, help="Replace the config's seed"
    )
    simulate.set_defaults(func=cmd_simulate)

    frontier = sub.add_parser("frontier", help="Build or refresh the cached existence frontier")
    frontier.add_argument("--kappa-grid", default=None, help="Comma-separated kappa knots in (0, 0.5]")
    frontier.add_argument("--n", type=int, default=settings.FRONTIER_N, help="Pilot sample size")
    frontier.add_argument("--reps", type=int, default=settings.FRONTIER_REPS, help="Replicates per probe")
    frontier.add_argument("--refresh", action="store_true", help="Rebuild even when cached")
    frontier.set_defaults(func=cmd_frontier)

    infer = sub.add_parser("infer", help="Adjusted inference on a CSV dataset")
    _add_dataset_args(infer)
    infer.add_argument("--level", type=float, default=0.95, help="Confidence level")
    infer.add_argument("--tau", choices=["rss", "ar1"], default="rss", help="Conditional-sd estimator")
    infer.add_argument("--lrt", action="store_true", help="Also compute rescaled LRT p-values")
    infer.add_argument("--kappa-grid", default=None, help="ProbeFrontier grid (default: p/n+0.02 .. 0.5)")
    infer.add_argument(
        "--resamples", type=int, default=settings.PROBE_RESAMPLES, help="Resamples per probe point"
    )
    infer.add_argument(
        "--frontier-seed", type=int, default=settings.SEED, help="Seed of the cached frontier to use"
    )
    infer.set_defaults(func=cmd_infer)

    study = sub.add_parser("subsample-study", help="MLE behavior on subsamples of decreasing size")
    _add_dataset_args(study)
    study.add_argument("--variable", required=True, help="Target covariate name or index")
    study.add_argument("--kappas", required=True, help="Comma-separated kappa values >= p/n")
    study.add_argument("--B", type=int, default=100, help="Subsamples per kappa")
    study.set_defaults(func=cmd_subsample_study)

    fit = sub.add_parser("fit", help="Classical MLE fit with Wald statistics")
    _add_dataset_args(fit)
    fit.set_defaults(func=cmd_fit)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entrypoint; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings.validate()
        if args.threads < 1:
            raise ValueError("--threads must be at least 1")
        return args.func(args)

    except HDLogitError as e:
        print(f"\n❌ Error: {e}")
        return e.exit_code

    except ValueError as e:
        print(f"\n❌ Configuration Error: {e}")
        return EXIT_CONFIG

    except Exception as e:
        print(f"\n❌ Error: {e}")
        logger.exception("Full error details:")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
