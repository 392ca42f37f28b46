"""Command-line front end: `qtl-figs render --in DIR --out DIR`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .reader import MissingColumnsError
from .render import render_run

COUPLINGS = ("jc", "displaced", "dispersive")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtl-figs", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("render", help="render figures from a completed run directory")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="run directory containing ledger.csv and entropy.csv")
    p.add_argument("--out", dest="out_dir", required=True,
                   help="directory for the rendered figure files")
    p.add_argument("--coupling", choices=COUPLINGS, default=None,
                   help="label override (default: coupling from meta.json)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        written = render_run(args.in_dir, args.out_dir, coupling=args.coupling)
    except (FileNotFoundError, MissingColumnsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
