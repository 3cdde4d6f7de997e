"""Fixture corpus: worked cases stored as JSON and checked as exact identities.

A fixture document looks like::

    {
      "name": "example1",
      "description": "...",
      "l3_sign": 1,
      "definitions": {"V": "a/r + ...", "f12": "..."},
      "checks": [{"id": "commutes", "kind": "commutator", ...}, ...],
      "errata": [{"path": ["definitions", "f02"], "corrected": "3*alpha2*y",
                  "display": "2*alpha2*y", "reason": "..."}],
      "metadata": {...}
    }

Definitions are scalar expressions evaluated in order; later texts may use a
definition either by name or through jets ``D[name,a,b]``.  Texts stored in
the document are the forms that verify.  Every erratum names the fragment of
the printed display it replaces.  The runner reverts each erratum on its own
and records the residual of the verbatim text, so every correction must be
shown to be necessary for the fixture to pass.  ``attempts`` lists
alternative readings of a fragment; each is tried on the fully verbatim
document and its outcome is reported.

Any check may carry ``l3_sign`` to override the document's L3 convention.

Check kinds:

``equation``
    generated determining equation ``M[j,k]`` (classical or quantum) equals
    ``scale * (lhs - rhs)``; with ``"solved": true`` the leading f[j,0] are
    the polynomials in symbolic A[k,m,n].  ``modulo`` lists multiples of
    derivatives of relations that hold in the system,
    ``{"relation": ..., "derivative": [a, b], "factor": ...}``; their sum is
    subtracted from the residual before it is tested.
``systems_equal``
    the quantum and classical determining systems of the given order coincide.
``zero``
    a scalar text is identically zero.  With an ``order`` the names f[j,k],
    phi[j,K] and Q[j,k] are bound to the canonical integral of that order.
``commutator``
    [H, X] (quantum) or {H, X} (classical) vanishes.
``operators_equal``
    two operator texts expand to the same normal-ordered operator.
``canonical``
    the anticommutator decomposition of a self-adjoint operator has the
    stated hbar-free coefficients ``f`` and hbar^2 corrections ``g``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping

from gmpy2 import mpq

from . import expr as E
from .classical import (
    ClassicalObservable, classical_determining, parse_observable, poisson_bracket,
)
from .expr import Expr
from .grammar import GrammarError, parse_expr
from .operators import QuantumOperator, op_commutator, parse_operator
from .quantum import PhiTable, quantum_correction, quantum_determining, rewrite_to_canonical
from .system import IntegralAnsatz, f_name

CHECK_KINDS = ("equation", "systems_equal", "zero", "commutator", "operators_equal", "canonical")


class FixtureError(ValueError):
    pass


class UnknownFixtureError(KeyError):
    pass


# --------------------------------------------------------------------------
# registry

def _corpus():
    return resources.files(__package__).joinpath("fixtures")


def load_corpus() -> dict[str, dict]:
    out = {}
    for entry in sorted(_corpus().iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            doc = json.loads(entry.read_text(encoding="utf-8"))
            out[doc["name"]] = doc
    return out


_REGISTRY: dict[str, dict] | None = None


def registry() -> dict[str, dict]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = load_corpus()
    return _REGISTRY


def fixture_names() -> list[str]:
    return list(registry())


def get_fixture(name: str) -> dict:
    try:
        return copy.deepcopy(registry()[name])
    except KeyError:
        raise UnknownFixtureError(name) from None


# --------------------------------------------------------------------------
# reports

@dataclass
class CheckResult:
    id: str
    kind: str
    passed: bool
    residual: str

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "passed": self.passed, "residual": self.residual}


@dataclass
class ErratumResult:
    path: list
    display: str
    corrected: str
    reason: str
    display_fails: bool
    display_residuals: list[CheckResult]
    attempts: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "display": self.display,
            "corrected": self.corrected,
            "reason": self.reason,
            "display_fails": self.display_fails,
            "display_residuals": [c.to_dict() for c in self.display_residuals if not c.passed],
            "attempts": self.attempts,
        }


@dataclass
class FixtureReport:
    name: str
    description: str
    checks: list[CheckResult]
    errata: list[ErratumResult]
    metadata: dict
    display_checks: list[CheckResult] = field(default_factory=list)

    @property
    def display_verifies(self) -> bool:
        """Whether the printed text, with no correction applied, verifies."""
        return all(c.passed for c in self.display_checks)

    @property
    def checks_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def errata_confirmed(self) -> bool:
        return all(e.display_fails for e in self.errata)

    @property
    def passed(self) -> bool:
        return self.checks_pass and self.errata_confirmed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "display_verifies": self.display_verifies,
            "checks": [c.to_dict() for c in self.checks],
            "errata": [e.to_dict() for e in self.errata],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.id} ({c.kind})" + ("" if c.passed else f"  residual: {c.residual}"))
        for e in self.errata:
            state = "display fails, corrected form verifies" if e.display_fails else "display also verifies"
            lines.append(f"  erratum {'/'.join(str(p) for p in e.path)}: '{e.display}' -> '{e.corrected}' ({state})")
            for a in e.attempts:
                lines.append(f"    tried '{a['text']}': {'verifies' if a['passed'] else 'fails'}")
        return "\n".join(lines)


@dataclass
class Summary:
    reports: list[FixtureReport]

    @property
    def failures(self) -> list[FixtureReport]:
        return [r for r in self.reports if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "total": len(self.reports),
            "failed": len(self.failures),
            "fixtures": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        body = "\n".join(r.to_text() for r in self.reports)
        return f"{body}\n{len(self.reports) - len(self.failures)}/{len(self.reports)} fixtures pass"


# --------------------------------------------------------------------------
# evaluation

_JET_RANGE = 9


def _default_env() -> dict[str, Expr]:
    """Bare V and f[j,k] denote the unknown functions themselves."""
    env = {f_name(j, k): E.jet(f_name(j, k)) for j in range(_JET_RANGE) for k in range(_JET_RANGE)}
    env["V"] = E.jet("V")
    return env


class _Context:
    """Evaluation state for one fixture document."""

    def __init__(self, doc: Mapping[str, Any]):
        self.doc = doc
        self.l3_sign = int(doc.get("l3_sign", 1))
        self.defs: dict[str, Expr] = {}
        for name, text in doc.get("definitions", {}).items():
            self.defs[name] = self.scalar(text)
        self._systems: dict = {}

    @property
    def env(self) -> dict[str, Expr]:
        return {**_default_env(), **self.defs}

    def scalar(self, text: str, extra: Mapping[str, Expr] | None = None) -> Expr:
        bindings = {**self.defs, **(extra or {})}
        return E.substitute(parse_expr(text, {**_default_env(), **bindings}), bindings)

    def operator(self, text: str, mode: str, l3_sign: int | None = None):
        sign = self.l3_sign if l3_sign is None else int(l3_sign)
        if mode == "quantum":
            op = parse_operator(text, self.env, sign)
        else:
            op = parse_observable(text, self.env, sign)
        return op.substitute(self.defs)

    def ansatz(self, order: int, solved: bool) -> IntegralAnsatz:
        return IntegralAnsatz.symbolic(order, solved)

    def system(self, order: int, mode: str, solved: bool):
        key = (order, mode, solved)
        if key not in self._systems:
            ansatz = self.ansatz(order, solved)
            gen = quantum_determining if mode == "quantum" else classical_determining
            self._systems[key] = gen(ansatz)
        return self._systems[key]

    def integral_bindings(self, order: int, solved: bool) -> dict[str, Expr]:
        """f[j,0] (when solved), plus phi[j,K] and Q[j,k] of the canonical integral."""
        ansatz = self.ansatz(order, solved)
        out: dict[str, Expr] = {}
        if solved:
            for j, val in ansatz.leading.items():
                out[f_name(j, 0)] = val
        phi = PhiTable(order, ansatz.coefficient)
        for K in range(1, order + 1):
            for j in range(order + 2):
                out[f"phi[{j},{K}]"] = phi[(j, K)]
        for l in range(1, (order + 1) // 2 + 1):
            for j in range(order - 2 * l + 2):
                out[f"Q[{j},{2 * l}]"] = quantum_correction(order, j, l, ansatz.coefficient, None, phi)
        return out


def _residual_text(value) -> str:
    if isinstance(value, Expr):
        return str(value)
    if isinstance(value, (QuantumOperator, ClassicalObservable)):
        return json.dumps(value.to_dict()["terms"])
    if isinstance(value, dict):
        return json.dumps({f"{k[0]},{k[1]}": str(v) for k, v in sorted(value.items())})
    return str(value)


def _modulo(ctx: _Context, relations: list[Mapping[str, Any]]) -> Expr:
    total = E.ZERO
    for rel in relations:
        a, b = (int(v) for v in rel.get("derivative", [0, 0]))
        total = total + ctx.scalar(str(rel.get("factor", "1"))) * E.diff_n(ctx.scalar(rel["relation"]), a, b)
    return total


# Sample values for the refutation pass.  A zero operator stays zero under any
# specialization of constants, so a nonzero specialized residual is a proof of
# failure; only a zero one sends the check on to exact arithmetic.
_SAMPLES = (mpq(7, 3), mpq(11, 5), mpq(13, 17), mpq(19, 7), mpq(23, 29), mpq(31, 11), mpq(37, 41))


def _specialized(*ops):
    coeffs = [c for op in ops for c in (op.terms if isinstance(op, QuantumOperator) else op.coeffs).values()]
    consts = sorted({v for c in coeffs for v in c.variables()
                     if v[0] in (E.KIND_HBAR, E.KIND_PARAM)})
    values = {v: Expr.const(_SAMPLES[n % len(_SAMPLES)] + n // len(_SAMPLES)) for n, v in enumerate(consts)}
    return [op.map(lambda c: E.subs_vars(c, values)) for op in ops], values


def _refuted(build, ops) -> str | None:
    """Residual text when ``build`` is visibly nonzero after specializing constants."""
    try:
        special, values = _specialized(*ops)
        value = build(*special)
    except ZeroDivisionError:
        return None
    if value.is_zero():
        return None
    where = ", ".join(f"{v[1]}={values[v]}" for v in sorted(values))
    return f"nonzero at {where}: {_residual_text(value)}" if where else _residual_text(value)


def _operator_check(cid: str, kind: str, build, ops) -> CheckResult:
    text = _refuted(build, ops)
    if text is not None:
        return CheckResult(cid, kind, False, text)
    value = build(*ops)
    return CheckResult(cid, kind, value.is_zero(), _residual_text(value) if not value.is_zero() else "0")


def _parse_key(key: str) -> tuple[int, int]:
    a, b = key.split(",")
    return int(a), int(b)


def _run_check(ctx: _Context, check: Mapping[str, Any]) -> CheckResult:
    kind = check["kind"]
    cid = check.get("id", kind)
    if kind not in CHECK_KINDS:
        raise FixtureError(f"unknown check kind {kind!r}")
    if kind == "equation":
        order, mode = int(check["order"]), check.get("mode", "quantum")
        solved = bool(check.get("solved", False))
        j, k = (int(v) for v in check["equation"])
        generated = ctx.system(order, mode, solved).equations[(j, k)]
        scale = ctx.scalar(str(check.get("scale", "1")))
        display = scale * (ctx.scalar(check.get("lhs", "0")) - ctx.scalar(check["rhs"]))
        residual = generated - display
        if check.get("modulo"):
            residual = residual - _modulo(ctx, check["modulo"])
        if solved:
            residual = E.substitute(residual, ctx.integral_bindings(order, True))
        return CheckResult(cid, kind, residual.is_zero(), _residual_text(residual))
    if kind == "systems_equal":
        order, solved = int(check["order"]), bool(check.get("solved", False))
        q = ctx.system(order, "quantum", solved).equations
        c = ctx.system(order, "classical", solved).equations
        diff = {key: q[key] - c[key] for key in q if not (q[key] - c[key]).is_zero()}
        if set(q) != set(c):
            return CheckResult(cid, kind, False, "index sets differ")
        return CheckResult(cid, kind, not diff, _residual_text(diff) if diff else "0")
    if kind == "zero":
        extra = {}
        if "order" in check:
            extra = ctx.integral_bindings(int(check["order"]), bool(check.get("solved", False)))
        value = ctx.scalar(check["expr"], extra)
        return CheckResult(cid, kind, value.is_zero(), _residual_text(value))
    if kind == "commutator":
        mode = check.get("mode", "quantum")
        H = ctx.operator(check["hamiltonian"], mode, check.get("l3_sign"))
        X = ctx.operator(check["integral"], mode, check.get("l3_sign"))
        return _operator_check(cid, kind, op_commutator if mode == "quantum" else poisson_bracket, (H, X))
    if kind == "operators_equal":
        mode = check.get("mode", "quantum")
        lhs = ctx.operator(check["lhs"], mode, check.get("l3_sign"))
        rhs = ctx.operator(check["rhs"], mode, check.get("l3_sign"))
        return _operator_check(cid, kind, lambda a, b: a - b, (lhs, rhs))
    # canonical
    X = ctx.operator(check["operator"], "quantum", check.get("l3_sign"))
    f, g = rewrite_to_canonical(X, check.get("order"))
    bad = {}
    for label, got, want_text in (("f", f, check.get("f", {})), ("g", g, check.get("g", {}))):
        want = {_parse_key(k): ctx.scalar(v) for k, v in want_text.items()}
        for key in set(got) | set(want):
            d = got.get(key, E.ZERO) - want.get(key, E.ZERO)
            if not d.is_zero():
                bad[(label, key)] = d
    text = json.dumps({f"{lab}[{k[0]},{k[1]}]": str(v) for (lab, k), v in sorted(bad.items())}) if bad else "0"
    return CheckResult(cid, kind, not bad, text)


def _run_checks(doc: Mapping[str, Any]) -> list[CheckResult]:
    try:
        ctx = _Context(doc)
    except (GrammarError, ZeroDivisionError) as exc:
        return [CheckResult("definitions", "definitions", False, f"error: {exc}")]
    results = []
    for check in doc.get("checks", []):
        try:
            results.append(_run_check(ctx, check))
        except (GrammarError, ZeroDivisionError, ValueError) as exc:
            results.append(CheckResult(check.get("id", check.get("kind", "?")), check.get("kind", "?"),
                                       False, f"error: {exc}"))
    return results


def _locate(doc: dict, path: list):
    node = doc
    for p in path[:-1]:
        if isinstance(node, list) and isinstance(p, str):
            node = next(c for c in node if c.get("id") == p)
        else:
            node = node[p]
    return node, path[-1]


def _with_fragment(doc: Mapping[str, Any], path: list, old: str, new: str) -> dict:
    out = copy.deepcopy(doc)
    parent, key = _locate(out, path)
    text = parent[key]
    if text.count(old) != 1:
        raise FixtureError(f"fragment {old!r} must occur exactly once at {path}")
    parent[key] = text.replace(old, new)
    return out


def display_document(doc: Mapping[str, Any]) -> dict:
    """The document with every erratum reverted to the printed text."""
    out = copy.deepcopy(doc)
    for item in doc.get("errata", []):
        out = _with_fragment(out, list(item["path"]), item["corrected"], item["display"])
    return out


def run_document(doc: Mapping[str, Any]) -> FixtureReport:
    checks = _run_checks(doc)
    errata = []
    verbatim = display_document(doc)
    for item in doc.get("errata", []):
        path = list(item["path"])
        display_doc = _with_fragment(doc, path, item["corrected"], item["display"])
        display_checks = _run_checks(display_doc)
        attempts = []
        for alt in item.get("attempts", []):
            alt_checks = _run_checks(_with_fragment(verbatim, path, item["display"], alt))
            attempts.append({"text": alt, "passed": all(c.passed for c in alt_checks)})
        errata.append(ErratumResult(path, item["display"], item["corrected"], item.get("reason", ""),
                                    not all(c.passed for c in display_checks), display_checks, attempts))
    display_checks = _run_checks(verbatim) if errata else checks
    return FixtureReport(doc["name"], doc.get("description", ""), checks, errata,
                         dict(doc.get("metadata", {})), display_checks)


def run_fixture(name: str) -> FixtureReport:
    return run_document(get_fixture(name))


def run_all(names: list[str] | None = None) -> Summary:
    names = fixture_names() if names is None else names
    if not names:
        raise FixtureError("fixture registry is empty")
    return Summary([run_fixture(n) for n in names])


__all__ = [
    "FixtureError", "UnknownFixtureError", "CheckResult", "ErratumResult", "FixtureReport", "Summary",
    "display_document", "fixture_names", "get_fixture", "load_corpus", "registry", "run_document",
    "run_fixture", "run_all",
]
