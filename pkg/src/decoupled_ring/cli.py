"""Command-line front end: ``decoupled-ring <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .commands import (
    cmd_eigs,
    cmd_floquet,
    cmd_simulate,
    cmd_sweep_alternating,
    cmd_sweep_uniform,
)
from .config import PRESETS, RunConfig, load_config, load_preset
from .errors import RingError
from .verify import render_report, run_checks

SWEEPS = {"sweep-uniform", "sweep-alternating", "floquet"}
HELP = {
    "simulate": "integrate the ring from a decoupled state and write the trajectory",
    "eigs": "closed-form block eigenvalues over psi_grid (detuning must be 0)",
    "sweep-uniform": "max transverse eigenvalue over alpha_grid x psi_grid",
    "sweep-alternating": "max transverse Floquet exponent over alpha_grid x omega_grid",
    "floquet": "all block Floquet exponents over omega_grid at the config's alpha",
    "verify": "run the self-check suite and print one line per check",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decoupled-ring", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in HELP.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--out", type=Path, help="output file (default: config 'output' or stdout)")
        if name == "verify":
            p.add_argument("--seed", type=int, default=0, help="seed for the random draws")
            continue
        source = p.add_mutually_exclusive_group()
        source.add_argument("--config", type=Path, help="JSON run configuration")
        source.add_argument("--preset", choices=PRESETS, help="bundled configuration")
        if name in SWEEPS:
            p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        if name in ("sweep-alternating", "floquet"):
            p.add_argument("--floquet-steps", type=int, help="RK4 steps per period (overrides config)")
    return parser


def _load(args) -> RunConfig:
    if args.config is not None:
        config = load_config(args.config)
    elif args.preset is not None:
        config = load_preset(args.preset)
    else:
        config = RunConfig()
    steps = getattr(args, "floquet_steps", None)
    if steps is not None:
        config = config.with_(floquet_steps=steps)
    return config


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, newline="\n")


def run(args) -> int:
    if args.command == "verify":
        results = run_checks(seed=args.seed)
        _emit(render_report(results), args.out)
        return 0 if all(r.passed for r in results) else 1

    config = _load(args)
    out = args.out if args.out is not None else (Path(config.output) if config.output else None)
    workers = getattr(args, "workers", 1)
    if workers < 1:
        raise RingError(f"--workers must be >= 1, got {workers}")
    if args.command == "simulate":
        text = cmd_simulate(config)
    elif args.command == "eigs":
        text = cmd_eigs(config)
    elif args.command == "sweep-uniform":
        text = cmd_sweep_uniform(config, workers)
    elif args.command == "sweep-alternating":
        text = cmd_sweep_alternating(config, workers)
    else:
        text = cmd_floquet(config, workers)
    _emit(text, out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except RingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
