"""Command-line front end: ``nthorder generate|count|verify|fixtures``."""

from __future__ import annotations

import argparse
import json
import sys

from gmpy2 import mpq

from . import expr as E
from . import fixtures as F
from .classical import classical_determining
from .expr import Expr
from .latex import system_latex
from .quantum import enveloping_determining, quantum_determining
from .system import DeterminingSystem, IntegralAnsatz, count_equations, count_unknowns, symbolic_A
from .verify import EXIT_INVALID, CaseError, verify_path


class UsageError(Exception):
    pass


def _order(value: int) -> int:
    if value < 1:
        raise UsageError(f"order must be at least 1, got {value}")
    return value


def _rational(text: str) -> mpq:
    try:
        return mpq(text)
    except ValueError:
        raise UsageError(f"--hbar expects a rational such as 1 or 3/2, got {text!r}") from None


def build_system(order: int, mode: str, form: str = "canonical", solved: bool = False,
                 hbar: mpq | None = None) -> DeterminingSystem:
    """The determining system printed by ``generate``."""
    _order(order)
    if form == "enveloping":
        if mode != "quantum":
            raise UsageError("the enveloping form is a quantum construction")
        system = enveloping_determining(order, symbolic_A(order))
    else:
        ansatz = IntegralAnsatz.symbolic(order, solved)
        system = (quantum_determining if mode == "quantum" else classical_determining)(ansatz)
    if hbar is not None and mode == "quantum":
        value = Expr.const(hbar)
        system = DeterminingSystem(system.order, system.mode,
                                   {k: E.subs_vars(v, {E.VHBAR: value}) for k, v in system.equations.items()},
                                   system.form)
    return system


def cmd_generate(args) -> int:
    hbar = _rational(args.hbar) if args.hbar is not None else None
    system = build_system(_order(args.order), args.mode, args.form, args.solved, hbar)
    print(system.to_json() if args.output == "json" else system_latex(system))
    return 0


def cmd_count(args) -> int:
    N = _order(args.order)
    print(f"equations: {count_equations(N)}, unknowns: {count_unknowns(N)}")
    return 0


def cmd_verify(args) -> int:
    try:
        report = verify_path(args.path)
    except CaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(report.to_dict(), indent=2) if args.json else report.to_text())
    return report.exit_code


def cmd_fixtures(args) -> int:
    if args.list:
        for name in F.fixture_names():
            print(name)
        return 0
    names = None if args.all else [args.run]
    try:
        summary = F.run_all(names)
    except F.UnknownFixtureError as exc:
        print(f"error: unknown fixture {exc.args[0]!r}", file=sys.stderr)
        return EXIT_INVALID
    print(summary.to_json() if args.json else summary.to_text())
    return 0 if summary.passed else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nthorder", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="print the determining system of order N")
    gen.add_argument("--order", type=int, required=True)
    gen.add_argument("--mode", choices=("classical", "quantum"), default="quantum")
    gen.add_argument("--form", choices=("canonical", "enveloping"), default="canonical")
    gen.add_argument("--output", choices=("latex", "json"), default="latex")
    gen.add_argument("--hbar", help="bind hbar to a rational value (quantum mode)")
    gen.add_argument("--solved", action="store_true",
                     help="replace f[j,0] by the polynomials in the constants A[k,m,n]")
    gen.set_defaults(func=cmd_generate)

    cnt = sub.add_parser("count", help="number of determining equations and unknown functions")
    cnt.add_argument("--order", type=int, required=True)
    cnt.set_defaults(func=cmd_count)

    ver = sub.add_parser("verify", help="check a case document")
    ver.add_argument("path")
    ver.add_argument("--json", action="store_true")
    ver.set_defaults(func=cmd_verify)

    fx = sub.add_parser("fixtures", help="list or run the fixture corpus")
    group = fx.add_mutually_exclusive_group(required=True)
    group.add_argument("--list", action="store_true")
    group.add_argument("--run", metavar="NAME")
    group.add_argument("--all", action="store_true")
    fx.add_argument("--json", action="store_true")
    fx.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
