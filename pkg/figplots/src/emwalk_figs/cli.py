"""Command line: emwalk-figs render --spec plot.json [--spec other.json ...]"""

from __future__ import annotations

import argparse
import sys

from .errors import RenderError
from .render import render
from .specs import PlotSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emwalk-figs",
                                     description="Render experiment CSVs to figures")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one or more plot specs")
    r.add_argument("--spec", action="append", required=True,
                   help="path to a plot-spec JSON file (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    status = 0
    for spec_path in args.spec:
        try:
            out = render(PlotSpec.from_file(spec_path))
            print(f"{spec_path} -> {out}")
        except RenderError as exc:
            print(f"error: {spec_path}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
