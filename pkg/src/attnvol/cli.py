"""Command-line interface: run, validate and simulate subcommands."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline, simulate
from .exceptions import AttnvolError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attnvol",
        description="Attention-driven volatility estimation pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full estimation pipeline")
    run.add_argument("--config", required=True, help="path to the run config file")
    run.add_argument("--out", default="out", help="output directory")

    val = sub.add_parser("validate", help="check a config and its data directory")
    val.add_argument("--config", required=True)

    sim = sub.add_parser("simulate", help="generate the synthetic fixture dataset")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.add_argument("--countries", type=int, default=None,
                     help="limit the number of simulated countries")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = pipeline.load_config(args.config)
        problems = pipeline.validate_config(cfg)
        if problems:
            for p in problems:
                print(f"error: {p}", file=sys.stderr)
            return 1
        result = pipeline.run_pipeline(cfg)
        if not result.country_rows:
            print("error: no country could be estimated", file=sys.stderr)
            return 1
        out = Path(args.out)
        pipeline.emit_tables(result, out, fmt="csv")
        pipeline.emit_tables(result, out, fmt="markdown")
        pipeline.emit_map_data(result, out)
        pipeline.emit_scatter_data(result, out, exclude=cfg.scatter_exclude)
        pipeline.emit_skip_log(result, out)
    except AttnvolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n_ok = len({r["country"] for r in result.country_rows})
    print(f"estimated {n_ok} countries, skipped {len(result.skipped)}; "
          f"outputs in {out}")
    return 2 if result.skipped else 0


def _cmd_validate(args) -> int:
    try:
        cfg = pipeline.load_config(args.config)
        problems = pipeline.validate_config(cfg)
    except AttnvolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return 1
    print("config OK")
    return 0


def _cmd_simulate(args) -> int:
    out = simulate.simulate_dataset(args.out, seed=args.seed,
                                    n_countries=args.countries)
    print(f"synthetic dataset written to {out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "simulate": _cmd_simulate}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
