"""render-figure: plot a macrorealism functional versus bias from sweep CSVs."""

from __future__ import annotations

import argparse
import sys

from . import FIGURES, CsvFormatError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render-figure",
        description="Render one violation-versus-gamma figure from spinmr sweep "
                    "CSVs (one CSV per spin value).")
    parser.add_argument("--figure", required=True, choices=sorted(FIGURES),
                        help="which functional to plot")
    parser.add_argument("--csv", required=True, nargs="+", metavar="PATH",
                        help="input sweep CSVs in the frozen schema")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(figure=args.figure, csv_paths=tuple(args.csv), out_path=args.out)
    try:
        render(spec)
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: no such file", file=sys.stderr)
        return 2
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
