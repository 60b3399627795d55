"""Command line front end.

Subcommands: preset (build + verify a named schedule), search (enumerate and
rank candidate schedules for a machine), verify (replay a bundle file),
report (print or compare cost reports). All outputs are JSON documents.

Exit codes: 0 clean, 2 violations, 3 infeasible parameters or bad input,
4 caps exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bundle import load_bundle
from .errors import (
    CapExceeded,
    MachineMismatch,
    OracleCapExceeded,
    ParameterInfeasible,
    ParseError,
    SymschedError,
    WindowOverflow,
)
from .machines import load_machine
from .matmul import (
    cannon,
    cannon_blocked,
    fat_tree_recursive,
    hex_systolic,
    pmh_space_bounded,
    schedule_2_5d,
)
from .search import search
from .simulate import compare_cost, report_from_json, verify

EXIT_OK = 0
EXIT_VIOLATIONS = 2
EXIT_INFEASIBLE = 3
EXIT_CAPS = 4


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text + "\n")


def _parse_levels(spec: str):
    try:
        return [tuple(int(v) for v in part.split(":")) for part in spec.split(",")]
    except ValueError as exc:
        raise ParseError(f"bad --levels spec {spec!r}; expected M:f,M:f,...") from exc


def _parse_stretch(spec: str | None):
    if spec is None:
        return None
    try:
        return tuple(int(v) for v in spec.split(","))
    except ValueError as exc:
        raise ParseError(f"bad --stretch spec {spec!r}") from exc


def cmd_preset(args) -> int:
    name = args.name
    if name == "cannon":
        bundle = cannon(args.q)
    elif name == "cannon-blocked":
        if None in (args.l, args.m, args.n):
            raise ParameterInfeasible("cannon-blocked needs --l, --m, --n and --q")
        bundle = cannon_blocked(args.l, args.m, args.n, args.q)
    elif name == "2.5d":
        if None in (args.n, args.p, args.c):
            raise ParameterInfeasible("2.5d needs --n, --p and --c")
        bundle = schedule_2_5d(args.n, args.p, args.c)
    elif name == "fat-tree":
        bundle = fat_tree_recursive(args.d)
    elif name == "pmh":
        bundle = pmh_space_bounded(_parse_levels(args.levels))
    elif name == "hex":
        bundle = hex_systolic(args.q, window=args.window)
    else:
        raise ParameterInfeasible(f"unknown preset {name}")
    if args.budget is not None:
        bundle.budget = args.budget
    report = verify(bundle, stretch=_parse_stretch(args.stretch))
    _write(bundle.to_json(), args.out_bundle)
    _write(report.to_json(), args.out_report)
    return EXIT_OK if report.ok() else EXIT_VIOLATIONS


def cmd_search(args) -> int:
    machine = load_machine(args.machine)
    result = search(machine, solution_cap=args.solution_cap,
                    enum_cap=args.enum_cap)
    _write(json.dumps(result.to_json_dict(), sort_keys=True, indent=1), args.out)
    if not result.ranked:
        return EXIT_INFEASIBLE
    return EXIT_OK if result.ranked[0]["violations"] == 0 else EXIT_VIOLATIONS


def cmd_verify(args) -> int:
    bundle = load_bundle(args.bundle)
    machine = load_machine(args.machine) if args.machine else None
    report = verify(bundle, machine=machine, stretch=_parse_stretch(args.stretch))
    _write(report.to_json(), args.out)
    return EXIT_OK if report.ok() else EXIT_VIOLATIONS


def cmd_report(args) -> int:
    with open(args.report) as fh:
        rep = report_from_json(fh.read())
    if args.against:
        with open(args.against) as fh:
            other = report_from_json(fh.read())
        _write(json.dumps(compare_cost(rep, other), sort_keys=True, indent=1),
               args.out)
        return EXIT_OK
    summary = {
        "traffic": rep.traffic,
        "total_traffic": rep.total_traffic(),
        "makespan": rep.makespan,
        "coverage": rep.coverage,
        "violations": len(rep.violations),
    }
    _write(json.dumps(summary, sort_keys=True, indent=1), args.out)
    return EXIT_OK if rep.ok() else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symsched",
        description="Build, search and verify matmul schedules on modeled machines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="construct and verify a named schedule")
    p.add_argument("name", choices=["cannon", "cannon-blocked", "2.5d",
                                    "fat-tree", "pmh", "hex"])
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--levels", type=str, default="48:1",
                   help="pmh cache levels as M:f,M:f,... innermost first")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--stretch", type=str, default=None)
    p.add_argument("--out-bundle", type=str, default=None)
    p.add_argument("--out-report", type=str, default=None)
    p.set_defaults(func=cmd_preset)

    s = sub.add_parser("search", help="enumerate and rank schedules for a machine")
    s.add_argument("--machine", required=True, help="machine config JSON path")
    s.add_argument("--solution-cap", type=int, default=64)
    s.add_argument("--enum-cap", type=int, default=200_000)
    s.add_argument("--out", type=str, default=None)
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="replay a bundle file and report")
    v.add_argument("--bundle", required=True)
    v.add_argument("--machine", default=None)
    v.add_argument("--stretch", type=str, default=None)
    v.add_argument("--out", type=str, default=None)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="summarize or compare cost reports")
    r.add_argument("--report", required=True)
    r.add_argument("--against", default=None)
    r.add_argument("--out", type=str, default=None)
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CapExceeded, OracleCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPS
    except (ParameterInfeasible, ParseError, MachineMismatch, WindowOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SymschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
