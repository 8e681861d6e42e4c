"""Command-line front end.

Exit codes: 0 success, 1 configuration error (the message names the
offending key), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .experiments import ConfigError, compare_methods, load_config, run_experiment, sweep_grid

THREADS_ENV_VAR = "MOGAFS_THREADS"


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mogafs",
        description=(
            "Multi-objective genetic algorithm for wrapper feature selection "
            "with evolutionary local improvement."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "run": "execute an experiment (replicated runs, fronts, traces, summary)",
        "compare": "compare the GA engine against MI ranking and greedy SFS",
        "sweep": "run the Cartesian product of the config's parameter grid",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the experiment seed")
        p.add_argument("--out-dir", default=None, help="override the output directory")
        p.add_argument(
            "--threads", type=int, default=None,
            help=f"evaluation threads (default: ${THREADS_ENV_VAR} or 1)",
        )
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )

    overrides = {
        "seed": args.seed,
        "output_dir": args.out_dir,
        "threads": args.threads if args.threads is not None else _default_threads(),
    }
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "run":
            result = run_experiment(cfg)
            if not args.quiet:
                print(f"summary written to {os.path.join(result.output_dir, 'summary.json')}")
        elif args.command == "compare":
            report = compare_methods(cfg)
            if not args.quiet:
                for method, stats in report["methods"].items():
                    print(
                        f"{method}: median test UAR {stats['median_uar_test']:.4f}, "
                        f"median subset size {stats['median_n_selected']:.1f}, "
                        f"median wall {stats['median_wall_seconds']:.1f}s"
                    )
        else:
            cells = sweep_grid(cfg)
            if not args.quiet:
                print(f"{len(cells)} sweep cells written to {cfg.output_dir}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # surfaced as exit code 2 per the CLI contract
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
