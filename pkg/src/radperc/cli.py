"""Command-line entry point: ``radperc <mode> [--config FILE] [flags]``.

Flags override config-file keys of the same name.  Exit codes: 0 success,
2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

from .runner import (MODES, ConfigError, build_config, parse_config_file, run)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument("--N", type=int, dest="N")
    sub.add_argument("--p", type=str, help="swap rate or comma-separated grid")
    sub.add_argument("--q", type=str, help="qudit dimension (integer or 'inf')")
    sub.add_argument("--k", type=int)
    sub.add_argument("--depth", type=int)
    sub.add_argument("--traj", type=int, dest="n_traj")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--batch", type=int)
    sub.add_argument("--out", dest="output_dir")
    sub.add_argument("--init", help="single:X0 | block:K:ORIGIN | custom:BITS")
    sub.add_argument("--case", choices=("i", "ii", "iii"))
    sub.add_argument("--record-every", type=int, dest="record_every")
    sub.add_argument("--input", dest="input_dir", help="input directory (fit/collapse)")
    sub.add_argument("--observable", choices=("rho", "P", "R2"))
    sub.add_argument("--window-lo", type=float, dest="window_lo")
    sub.add_argument("--window-hi", type=float, dest="window_hi")
    sub.add_argument("--p-c", type=float, dest="p_c")
    sub.add_argument("--no-otoc", action="store_const", const=False, dest="save_otoc",
                     help="skip writing the full OTOC matrix")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radperc",
                                     description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="mode", required=True, metavar="|".join(MODES))
    for mode in MODES:
        _add_common(subs.add_parser(mode))
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("config",) and v is not None}
    if "p" in overrides:
        overrides["p"] = tuple(float(v) for v in overrides["p"].split(","))
    if "q" in overrides:
        raw = overrides["q"]
        overrides["q"] = math.inf if raw.lower() in ("inf", "infinity") else float(raw)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
    except FileNotFoundError as exc:
        print(f"radperc: cannot read config: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"radperc: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = build_config(file_values, overrides)
    except ConfigError as exc:
        print(f"radperc: {exc}", file=sys.stderr)
        return 2
    try:
        out = run(cfg)
    except ConfigError as exc:
        print(f"radperc: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"radperc: I/O error: {exc}", file=sys.stderr)
        return 3
    print(f"radperc: wrote {out}/manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
