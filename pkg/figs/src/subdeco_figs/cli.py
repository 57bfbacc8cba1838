"""Command line: regenerate figures from a directory of sweep artifacts.

    subdeco-figs --all --in <dir> --out <dir>
    subdeco-figs --fig 4 --in <dir> --out <dir>
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import SCHEMAS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="subdeco-figs",
        description="Render figures from subdeco CSV artifacts")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--all", action="store_true",
                       help="render all five figures")
    which.add_argument("--fig", type=int, choices=sorted(SCHEMAS),
                       help="render one figure")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="directory with rate.csv / distance.csv / evolve.csv")
    p.add_argument("--out", dest="out_dir", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    ids = sorted(SCHEMAS) if args.all else [args.fig]
    status = 0
    for fid in ids:
        src, _, _ = SCHEMAS[fid]
        spec = FigureSpec(figure_id=fid, csv_path=in_dir / src,
                          out_path=out_dir / f"fig{fid}.png")
        try:
            print(render(spec))
        except SchemaError as exc:
            print(f"figure {fid}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
