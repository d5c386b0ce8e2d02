"""Command line entry point: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .csvdata import EmptyDataError, MissingColumnError
from .figures import KINDS, FigureError, FigureSpec, render


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ntnfig", description="render a simulation result CSV")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument(
        "--in", dest="inputs", required=True, action="append", metavar="CSV",
        help="input CSV (repeat for the heatmap node table)",
    )
    p.add_argument("--out", required=True, metavar="IMAGE")
    p.add_argument("--x-label")
    p.add_argument("--y-label")
    p.add_argument("--title")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = FigureSpec(
            inputs=tuple(args.inputs),
            kind=args.kind,
            out=args.out,
            x_label=args.x_label,
            y_label=args.y_label,
            title=args.title,
        )
        out = render(spec)
    except (FigureError, MissingColumnError, EmptyDataError, OSError, ValueError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
