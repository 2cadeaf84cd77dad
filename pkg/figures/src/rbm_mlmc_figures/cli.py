"""Figure CLI: ``rbm-mlmc-figures plot <kind> --in <csv> --out <img>``."""

from __future__ import annotations

import argparse
import sys

from .plotting import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbm-mlmc-figures",
        description="Regenerate experiment figures from harness CSV outputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_plot = sub.add_parser("plot", help="render one figure kind from a CSV")
    p_plot.add_argument("kind", choices=KINDS)
    p_plot.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    p_plot.add_argument("--out", dest="output", required=True,
                        help="output image path (.png; an .svg twin is also written)")
    p_plot.add_argument("--logx", action="store_true")
    p_plot.add_argument("--logy", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv, kind=args.kind, output=args.output,
                      logx=args.logx, logy=args.logy)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {args.output} (and the matching .png/.svg twin)")
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
