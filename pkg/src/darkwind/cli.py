"""Command line front end: ``darkwind <experiment> --config <path>``."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .sweep import EXIT_CONFIG, EXIT_PHYSICS, EXPERIMENTS, ConfigError, PhysicsError, load_config, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkwind",
        description="Seeded parameter sweeps for dissipative qubit-cavity chains: "
                    "coherence traces, complex spectra, winding phase diagrams, "
                    "boundary contours and coherence-time surfaces.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON sweep configuration")
    parser.add_argument("--out", default=None, help="output path prefix "
                        "(default: config 'out' field, else the experiment name)")
    parser.add_argument("--workers", type=int, default=1, metavar="K",
                        help="concurrent grid-cell workers (results identical for any K)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the disorder base seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.experiment)
    except ConfigError as exc:
        print(f"darkwind: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.disorder = dataclasses.replace(cfg.disorder, base_seed=args.seed)
    if args.workers < 1:
        print("darkwind: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, out_prefix=args.out, workers=args.workers)
    except PhysicsError as exc:
        print(f"darkwind: invalid physics input: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    raise SystemExit(main())
