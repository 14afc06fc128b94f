"""Command-line entry point: ``fdnls <experiment> [--config path] [flags]``."""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENTS, ConfigError, parse_config, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdnls",
        description=(
            "Spectral laboratory for the fractional discrete NLS on a periodic "
            "lattice: simulation, continuum-limit rate studies, modulational "
            "instability, and dispersive-kernel probes."
        ),
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file (flags override its values)")
        p.add_argument("--alpha", type=float, help="Levy index in (0, 2]")
        p.add_argument("--mu", type=int, choices=(-1, 1), help="nonlinearity sign")
        p.add_argument("--M", type=int, help="lattice size (h = pi/M)")
        p.add_argument("--M-ref", dest="M_ref", type=int, help="reference grid size")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--t-end", dest="t_end", type=float, help="final time")
        p.add_argument("--seed", type=int, help="64-bit seed for randomized data")
        p.add_argument("--out", help="output directory (default fdnls-out)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in ("alpha", "mu", "M", "M_ref", "dt", "t_end", "seed", "out")
        if getattr(args, key, None) is not None
    }
    overrides["experiment"] = args.experiment
    try:
        cfg = parse_config(args.config if args.config else {}, overrides)
    except (ConfigError, OSError) as exc:
        print(f"fdnls: config error: {exc}", file=sys.stderr)
        return 2
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
