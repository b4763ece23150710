"""plotkit command line: render error curves from sweep CSVs."""
from __future__ import annotations

import argparse
import sys

from .curves import EmptyGroup, PlotSpec, SchemaMismatch, plot_error_curves


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("curves", help="log-log error curves with fitted slopes")
    p.add_argument("--csv", action="append", required=True,
                   help="sweep CSV path (repeatable)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--group", default="estimator",
                   help="comma-separated group-by columns")
    p.add_argument("-x", default="N")
    p.add_argument("-y", default="op_error")
    args = parser.parse_args(argv)

    spec = PlotSpec(csv_paths=tuple(args.csv), out_path=args.out,
                    group_by=args.group, x_column=args.x, y_column=args.y)
    try:
        slopes = plot_error_curves(spec)
    except (SchemaMismatch, EmptyGroup) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for label, slope in sorted(slopes.items()):
        print(f"{label}: slope {slope:+.4f}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
