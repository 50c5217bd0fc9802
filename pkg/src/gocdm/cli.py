"""``gocdm-sim`` command line: ``papr``, ``ber`` and ``chan-dump``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .channel import load_profile
from .harness import ExperimentConfig, ber_csv, chan_dump, default_frame, papr_csv, run_ber, run_papr


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_papr(args) -> None:
    cfg = _config(args)
    _write(papr_csv(run_papr(cfg)), args.out or cfg.out)


def cmd_ber(args) -> None:
    cfg = _config(args)
    _write(ber_csv(run_ber(cfg, threads=args.threads)), args.out or cfg.out)


def cmd_chan_dump(args) -> None:
    profile = load_profile(args.profile)
    p = default_frame(profile, args.M, args.N)
    sparse, paths = chan_dump(profile, p, args.seed, args.B)
    _write(sparse, args.out)
    if args.out and args.out != "-":
        out = Path(args.out)
        out.with_name(out.stem + ".paths.csv").write_text(paths)
    else:
        sys.stdout.write(paths)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gocdm-sim", description="GOCDM Monte Carlo simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("papr", help="PAPR CCDF per waveform")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_papr)

    b = sub.add_parser("ber", help="BER versus Eb/N0")
    b.add_argument("--config", required=True)
    b.add_argument("--out")
    b.add_argument("--seed", type=int)
    b.add_argument("--threads", type=int, default=None)
    b.set_defaults(func=cmd_ber)

    c = sub.add_parser("chan-dump", help="dump one channel draw and its sparse GF-domain matrix")
    c.add_argument("--profile", required=True, help="built-in name or YAML profile file")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out")
    c.add_argument("--M", type=int)
    c.add_argument("--N", type=int)
    c.add_argument("--B", type=int)
    c.set_defaults(func=cmd_chan_dump)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
