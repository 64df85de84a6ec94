"""Command line: render one figure from a directory of run outputs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .figures import FIGURES, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urllcbeam-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure to SVG/PNG")
    p_render.add_argument(
        "--figure", required=True, choices=sorted(FIGURES),
        help="figure id",
    )
    p_render.add_argument(
        "--in", dest="in_dir", required=True,
        help="directory holding the run's CSV/JSON outputs",
    )
    p_render.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        meta = render(args.figure, Path(args.in_dir), Path(args.out))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({meta})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
