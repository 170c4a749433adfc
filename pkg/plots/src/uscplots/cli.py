"""Command line figure tool.

    uscplot history --in run.csv [more.csv ...] --out fig.svg
    uscplot efficiency --in scan.csv --out curve.pdf

`--label` may be repeated, one caption per input file, in order.  The
output format follows the file extension; vector formats (svg, pdf) are
the intended targets.  Exit codes: 0 success, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, plot_efficiency, plot_history

EXIT_OK = 0
EXIT_USAGE = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad input; raise instead so main()
    # owns the exit code
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="uscplot", description="render simulator CSVs as figures")
    sub = parser.add_subparsers(dest="kind", parser_class=_Parser)
    for kind, blurb in (
        ("history", "population histories against t/T"),
        ("efficiency", "efficiency against kappa on a log axis"),
    ):
        cmd = sub.add_parser(kind, help=blurb)
        cmd.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
        cmd.add_argument("--out", dest="output", required=True, metavar="IMG")
        cmd.add_argument(
            "--label",
            dest="labels",
            action="append",
            metavar="TEXT",
            help="caption for the next input file; repeat per file",
        )
    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.kind is None:
            raise _UsageError("give a figure kind: history or efficiency")
        spec = FigureSpec(
            input_csvs=tuple(args.inputs),
            kind=args.kind,
            output=args.output,
            labels=tuple(args.labels) if args.labels else None,
        )
        if spec.kind == "history":
            plot_history(spec)
        else:
            plot_efficiency(spec)
    except _UsageError as exc:
        print(f"uscplot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"uscplot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"uscplot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
