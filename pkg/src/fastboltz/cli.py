"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import (CflViolationError, CheckpointError, ConfigError,
                     NumericFailure, StiffnessError)
from .runner import parse_config, run
from .scenarios import PRESETS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fastboltz",
        description="Deterministic kinetic solver: spectral collisions, "
                    "finite-volume transport, AP time stepping.")
    p.add_argument("--scenario", choices=sorted(PRESETS),
                   help="named scenario preset")
    p.add_argument("--config", help="YAML config file (flags override keys)")
    p.add_argument("--epsilon", type=float, help="Knudsen number")
    p.add_argument("--nx", type=int, help="spatial cells (first axis)")
    p.add_argument("--ny", type=int, help="spatial cells (second axis)")
    p.add_argument("--nv", type=int, help="velocity nodes per axis (even)")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--t-final", type=float, dest="t_final", help="end time")
    p.add_argument("--kernel", choices=("classical", "fast"),
                   help="collision kernel path")
    p.add_argument("--mode", choices=("explicit", "imex"),
                   help="time integration mode")
    p.add_argument("--m-angles", type=int, dest="m_angles",
                   help="fast-kernel angle count")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--threads", type=int,
                   help="worker thread cap (best effort)")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every",
                   help="checkpoint cadence in steps (default: 10%% of run)")
    p.add_argument("--resume", help="checkpoint file to resume from")
    p.add_argument("--verbose", action="store_true", help="info-level logging")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items()
             if k not in ("config", "verbose") and v is not None}
    try:
        manifest = parse_config(args.config, flags)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run(manifest)
    except (ConfigError, CheckpointError, CflViolationError,
            StiffnessError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if result.failed:
        print(f"numeric failure: {result.message}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"completed {result.steps} steps to t = {result.final_time:g}; "
          f"artifacts in {result.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
