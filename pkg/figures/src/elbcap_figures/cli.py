"""render-figures: turn figN.csv datasets into figN.png images."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-figures",
        description="Render fig1.csv..fig5.csv from --in DIR to PNGs in --out DIR.",
    )
    parser.add_argument("--in", dest="in_dir", required=True)
    parser.add_argument("--out", dest="out_dir", required=True)
    parser.add_argument("--only", default=None, metavar="figN",
                        help="render a single figure, e.g. --only fig2")
    args = parser.parse_args(argv)

    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    if not in_dir.is_dir():
        print(f"render-figures: input directory {in_dir} not found", file=sys.stderr)
        return 2
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.only is not None:
        name = args.only if args.only.startswith("fig") else f"fig{args.only}"
        wanted = [name]
    else:
        wanted = [f"fig{i}" for i in range(1, 6) if (in_dir / f"fig{i}.csv").exists()]
        if not wanted:
            print(f"render-figures: no figN.csv files in {in_dir}", file=sys.stderr)
            return 2

    for name in wanted:
        try:
            fig_id = int(name.removeprefix("fig"))
        except ValueError:
            print(f"render-figures: bad figure name {name!r}", file=sys.stderr)
            return 2
        spec = FigureSpec(figure_id=fig_id, csv_path=in_dir / f"{name}.csv",
                          image_path=out_dir / f"{name}.png")
        try:
            render(spec)
        except SchemaError as exc:
            print(f"render-figures: {exc}", file=sys.stderr)
            return 1
        print(f"{spec.csv_path} -> {spec.image_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
