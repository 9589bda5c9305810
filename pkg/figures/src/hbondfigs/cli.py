"""Command-line wrappers, one per figure kind.

Each accepts ``--in`` (repeatable where panels make sense), ``--out`` and,
for heat maps, ``--levels``.  Exit status is nonzero on schema mismatches,
with the offending column named on stderr.
"""

from __future__ import annotations

import argparse
import sys

from .io_schemas import SchemaError
from .render import DEFAULT_LEVELS, FigureSpec, render


def _run(kind: str, argv, multi_input: bool, with_levels: bool) -> int:
    parser = argparse.ArgumentParser(prog=f"hbondfigs-{kind}")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV" + (" (repeat for panels)" if multi_input else ""))
    parser.add_argument("--out", required=True, help="output image path")
    if with_levels:
        parser.add_argument("--levels", type=float, nargs="+",
                            default=list(DEFAULT_LEVELS),
                            help="probability dividing lines")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    if not multi_input and len(args.inputs) > 1:
        print(f"error: {kind} takes a single --in file", file=sys.stderr)
        return 1
    try:
        spec = FigureSpec(
            inputs=tuple(args.inputs),
            kind="heatmap_panels" if kind == "heatmap" else kind,
            output=args.out,
            levels=tuple(getattr(args, "levels", DEFAULT_LEVELS)),
            title=args.title,
        )
        render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


def timeseries_main(argv=None) -> int:
    return _run("timeseries", argv, multi_input=True, with_levels=False)


def heatmap_main(argv=None) -> int:
    return _run("heatmap", argv, multi_input=True, with_levels=True)


def series_main(argv=None) -> int:
    return _run("series", argv, multi_input=True, with_levels=False)


if __name__ == "__main__":
    raise SystemExit(timeseries_main())
