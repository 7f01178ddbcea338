"""Command-line interface.

`check FILE` checks one program and prints its verdict (exit code 0
Typed, 1 IllTyped, 2 Unknown, 3 Malformed). `corpus DIR` checks every
`.lama` file against its sibling `.expected` file, comparing verdicts and
(when given) reported types modulo recursive-type unfolding.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import CheckOptions, Report, check_file, DEFAULT_FUEL, TYPED
from .types import TypeParseError, parse_type, types_equal


def _add_common_flags(p):
    p.add_argument("--max-steps", type=int, default=DEFAULT_FUEL,
                   help="engine step budget before giving up (Unknown)")
    p.add_argument("--max-answers", type=int, default=1,
                   help="how many solver answers to request")
    p.add_argument("--max-constructors", type=int, default=None,
                   help="override the S-expression constructor-list bound")
    p.add_argument("--stats", action="store_true", help="print run statistics")
    p.add_argument("--emit-constraints", action="store_true",
                   help="print the generated constraints before solving")
    p.add_argument("--no-prune", action="store_true",
                   help="disable call/constructor-list pruning")


def _options(args) -> CheckOptions:
    return CheckOptions(
        fuel=args.max_steps,
        max_answers=args.max_answers,
        max_constructors=args.max_constructors,
        prune=not args.no_prune,
        emit_constraints=args.emit_constraints,
    )


def _print_report(report: Report, args, out):
    if report.constraints_rendered:
        for line in report.constraints_rendered:
            print(f"constraint: {line}", file=out)
    print(report.verdict, file=out)
    if report.verdict == TYPED:
        for line in report.render_bindings():
            print(line, file=out)
    elif report.message:
        print(report.message, file=out)
    if args.stats:
        for k, v in report.stats.items():
            print(f"{k}={v}", file=out)


def cmd_check(args, out) -> int:
    report = check_file(args.file, _options(args))
    _print_report(report, args, out)
    return report.exit_code


def _parse_expected(text: str):
    """First line: expected verdict; remaining nonempty lines: `name : type`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] not in ("Typed", "IllTyped", "Unknown", "Malformed"):
        raise ValueError("first line must be a verdict")
    expected_types = []
    for ln in lines[1:]:
        name, sep, ty = ln.partition(":")
        if not sep:
            raise ValueError(f"bad type line: {ln!r}")
        expected_types.append((name.strip(), ty.strip()))
    return lines[0], expected_types


def cmd_corpus(args, out) -> int:
    root = Path(args.dir)
    files = sorted(root.glob("*.lama"))
    failures = 0
    checked = 0
    options = _options(args)
    for f in files:
        expected_path = f.with_suffix(".expected")
        if not expected_path.exists():
            print(f"{f.name}: SKIP (no expectation file)", file=out)
            continue
        try:
            verdict, expected_types = _parse_expected(expected_path.read_text(encoding="utf-8"))
        except ValueError as exc:
            print(f"{f.name}: SKIP (bad expectation file: {exc})", file=out)
            continue
        checked += 1
        report = check_file(str(f), options)
        problems = []
        if report.verdict != verdict:
            problems.append(f"verdict {report.verdict}, expected {verdict}")
        else:
            got = dict(report.bindings)
            for name, ty_text in expected_types:
                if name not in got:
                    problems.append(f"no binding for {name}")
                    continue
                try:
                    want = parse_type(ty_text, report.table)
                except TypeParseError as exc:
                    problems.append(f"bad expected type for {name}: {exc}")
                    continue
                if not types_equal(got[name], want):
                    from .types import pretty_type

                    problems.append(
                        f"{name} : {pretty_type(got[name], report.table)}, expected {ty_text}"
                    )
        if problems:
            failures += 1
            print(f"{f.name}: FAIL ({'; '.join(problems)})", file=out)
        else:
            print(f"{f.name}: PASS ({report.verdict})", file=out)
        if args.stats:
            for k, v in report.stats.items():
                print(f"  {k}={v}", file=out)
    print(f"checked={checked} failed={failures}", file=out)
    return 1 if failures else 0


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = argparse.ArgumentParser(prog="shapecheck",
                                     description="Static shape checker for mini-Lama programs")
    sub = parser.add_subparsers(dest="command", required=True)
    p_check = sub.add_parser("check", help="check one program")
    p_check.add_argument("file")
    _add_common_flags(p_check)
    p_corpus = sub.add_parser("corpus", help="check a directory of programs")
    p_corpus.add_argument("dir")
    _add_common_flags(p_corpus)
    args = parser.parse_args(argv)
    if args.command == "check":
        return cmd_check(args, out)
    return cmd_corpus(args, out)


if __name__ == "__main__":
    sys.exit(main())
