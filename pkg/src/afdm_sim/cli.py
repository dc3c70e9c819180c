"""Command line entry points for running and checking sweep configs."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import emit_csv, load_config, run_sweep, write_meta
from .pilots import guard_width, max_pilot_count


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afdm-sim",
        description="Monte Carlo link simulator for AFDM with superimposed pilots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep and write CSV results")
    run.add_argument("--config", required=True, help="path to the sweep config file")
    run.add_argument("--out", default=None, help="output CSV path (default: config's output)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--trials", type=int, default=None, help="override trials per point")
    run.add_argument("--workers", type=int, default=1, help="parallel worker count")

    validate = sub.add_parser("validate", help="check a config and print derived values")
    validate.add_argument("--config", required=True, help="path to the sweep config file")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    config.validate()
    if args.workers < 1:
        raise ValueError("workers must be at least 1")
    out = args.out if args.out is not None else config.output
    records = run_sweep(config, workers=args.workers)
    emit_csv(records, out)
    meta_path = write_meta(out, config)
    print(f"wrote {len(records)} records to {out}")
    print(f"wrote metadata to {meta_path}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    cfg = config.afdm_config()
    print("config OK")
    print(f"guard width = {guard_width(cfg)}")
    print(f"c1 = {cfg.c1}")
    print(f"max pilot count = {max_pilot_count(cfg)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_validate(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
