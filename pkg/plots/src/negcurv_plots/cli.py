"""``plots render --spec <file>``: figure generation from a JSON spec."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, PlotsError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from negcurv CLI artifacts"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("render", help="render one figure from a JSON spec")
    p.add_argument("--spec", required=True, help="JSON figure spec (inputs/kind/output)")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        out = render(FigureSpec.from_json(args.spec))
    except PlotsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


def main() -> None:
    raise SystemExit(run())
