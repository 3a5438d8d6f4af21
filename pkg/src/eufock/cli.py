"""Command line driver: fixture verification runs and template emission.

Two subcommands:

    eufock verify FIXTURE [SUITE] [flags]   run a check battery, write CSV
    eufock emit-fixture TEMPLATE PATH       write a bundled fixture file

``FIXTURE`` is a path; a bare name is also resolved against the directory
in ``$EUFOCK_FIXTURE_DIR`` (with or without a ``.yaml`` suffix).  Exit
codes: 0 every check passed, 1 at least one check failed, 2 the input was
rejected (parse or validation), 3 unexpected internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ParseError, ToolkitError
from .fixtures import emit_fixture, template_names
from .reporting import VERSION
from .suites import SUITE_NAMES, RunFlags, run_suite

FIXTURE_DIR_ENV = "EUFOCK_FIXTURE_DIR"

__all__ = ["main", "build_parser", "FIXTURE_DIR_ENV"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eufock",
        description="verification batteries for mode-space field fixtures",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {VERSION}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser(
        "verify", help="run a suite over a fixture and write a CSV report"
    )
    verify.add_argument(
        "fixture",
        help=f"fixture file, or a bare name resolved under ${FIXTURE_DIR_ENV}",
    )
    verify.add_argument(
        "suite",
        nargs="?",
        default="all",
        choices=SUITE_NAMES + ("all",),
        help="which battery to run (default: all)",
    )
    verify.add_argument(
        "--tol", type=float, default=1.0, metavar="SCALE",
        help="multiply every check tolerance by SCALE (default 1)",
    )
    verify.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    verify.add_argument(
        "--max-order", type=int, default=12, metavar="N",
        help="truncation order for the exponential-identity checks",
    )
    verify.add_argument(
        "--cutoff", type=int, default=None, metavar="N",
        help="override the fixture's Fock cutoff",
    )
    verify.add_argument(
        "--epsilon-levels", type=int, default=6, metavar="N",
        help="regulator halvings for the extrapolation checks",
    )
    verify.add_argument(
        "--csv", default=None, metavar="PATH",
        help="report path (default: <fixture-stem>-<suite>.csv in the cwd)",
    )
    verify.add_argument(
        "--quiet", action="store_true", help="suppress the summary on stdout"
    )

    emit = sub.add_parser(
        "emit-fixture", help="write one of the bundled fixture templates"
    )
    emit.add_argument("template", help=f"one of: {', '.join(template_names())}")
    emit.add_argument("path", help="output file")
    return parser


def _resolve_fixture(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    base = os.environ.get(FIXTURE_DIR_ENV)
    if base:
        for cand in (Path(base) / arg, Path(base) / f"{arg}.yaml"):
            if cand.exists():
                return cand
    hint = f" (also searched {base})" if base else ""
    raise ParseError(f"fixture {arg!r} not found{hint}")


def _verify(args: argparse.Namespace) -> int:
    path = _resolve_fixture(args.fixture)
    csv_path = Path(args.csv) if args.csv else Path(f"{path.stem}-{args.suite}.csv")
    flags = RunFlags(
        seed=args.seed,
        tol_scale=args.tol,
        max_order=args.max_order,
        cutoff=args.cutoff,
        epsilon_levels=args.epsilon_levels,
        csv_path=csv_path,
        quiet=args.quiet,
    )
    report = run_suite(path, args.suite, flags)
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
        print(f"report: {csv_path}")
    return 0 if report.all_pass else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "emit-fixture":
            emit_fixture(args.template, args.path)
            print(f"wrote {args.path}")
            return 0
        return _verify(args)
    except (ParseError, ToolkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
