"""Verification of user-supplied case documents.

A case document is a UTF-8 JSON object::

    {
      "mode": "quantum",
      "potential": "a/r + alpha1/x^2",
      "definitions": {"f12": "..."},            # optional, evaluated in order
      "l3_sign": 1,                             # optional, for operator text
      "integral": {"ansatz": {"N": 3, "A": {"2,0,1": "1"}, "f": {"1,2": "f12"}}}
    }

``integral`` is one of

* ``{"ansatz": {"N": .., "A": {"k,m,n": expr}, "f": {"j,k": expr}}}``: the
  canonical integral with leading part sum A[k,m,n] L3^k p1^m p2^n and lower
  coefficients f[j,2l] (k >= 2);
* ``{"terms": [...]}``: an explicit observable (``p1``/``p2`` powers) in
  classical mode or a normal-ordered operator (``dx``/``dy`` orders) in
  quantum mode;
* ``{"operator": "<text>"}``: an operator or observable in the text grammar,
  with ``p1``, ``p2``, ``L3`` and anticommutator braces.

Exit status: 0 when every residual vanishes, 1 otherwise, 2 for a malformed
document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import expr as E
from .classical import (
    ClassicalObservable,
    classical_determining,
    hamiltonian as classical_hamiltonian,
    parse_observable,
    poisson_bracket,
)
from .expr import Expr
from .grammar import GrammarError, parse_expr
from .operators import QuantumOperator, hamiltonian, op_commutator, parse_operator
from .quantum import ansatz_operator, quantum_determining
from .system import IntegralAnsatz

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class CaseError(ValueError):
    """Malformed case document."""


@dataclass
class CaseReport:
    mode: str
    residuals: dict[str, Expr] = field(default_factory=dict)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.residuals

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_FAIL

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "checked": self.checked,
            "residuals": {k: str(v) for k, v in self.residuals.items()},
        }

    def to_text(self) -> str:
        if self.passed:
            return f"PASS: {self.checked} {self.mode} residuals vanish"
        lines = [f"FAIL: {len(self.residuals)} of {self.checked} {self.mode} residuals are nonzero"]
        lines += [f"  {k} = {v}" for k, v in self.residuals.items()]
        return "\n".join(lines)


def _text(doc: Mapping[str, Any], key: str, where: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise CaseError(f"{where}: '{key}' must be a string")
    return value


def _parse(text: str, env: Mapping[str, Expr], where: str) -> Expr:
    try:
        return parse_expr(text, env)
    except GrammarError as exc:
        raise CaseError(f"{where}: {exc}\n    {text}\n    {' ' * (exc.pos or 0)}^") from exc
    except ZeroDivisionError as exc:
        raise CaseError(f"{where}: division by zero") from exc


def _key(text: str, size: int, where: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise CaseError(f"{where}: index '{text}' is not a list of integers") from None
    if len(parts) != size:
        raise CaseError(f"{where}: index '{text}' needs {size} entries")
    return parts


def _definitions(doc: Mapping[str, Any]) -> dict[str, Expr]:
    defs: dict[str, Expr] = {}
    raw = doc.get("definitions", {})
    if not isinstance(raw, dict):
        raise CaseError("'definitions' must be an object")
    for name, text in raw.items():
        if not isinstance(text, str):
            raise CaseError(f"definitions.{name} must be a string")
        defs[name] = _parse(text, defs, f"definitions.{name}")
    return defs


def _ansatz(data: Mapping[str, Any], env: Mapping[str, Expr]) -> IntegralAnsatz:
    N = data.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise CaseError("ansatz.N must be an integer >= 1")
    A = {_key(k, 3, "ansatz.A"): _parse(v, env, f"ansatz.A[{k}]") for k, v in data.get("A", {}).items()}
    f = {_key(k, 2, "ansatz.f"): _parse(v, env, f"ansatz.f[{k}]") for k, v in data.get("f", {}).items()}
    for (j, k) in f:
        if k == 0:
            raise CaseError("ansatz.f: leading coefficients come from A, not f[j,0]")
    try:
        return IntegralAnsatz(N, A, f)
    except ValueError as exc:
        raise CaseError(f"ansatz: {exc}") from exc


def _terms(data: Mapping[str, Any], mode: str, env: Mapping[str, Expr]):
    keys = ("p1", "p2") if mode == "classical" else ("dx", "dy")
    coeffs: dict[tuple[int, int], Expr] = {}
    for n, t in enumerate(data["terms"]):
        try:
            a, b = int(t[keys[0]]), int(t[keys[1]])
        except (KeyError, TypeError, ValueError):
            raise CaseError(f"integral.terms[{n}] needs integer '{keys[0]}' and '{keys[1]}'") from None
        if a < 0 or b < 0:
            raise CaseError(f"integral.terms[{n}]: negative power")
        c = _parse(_text(t, "coeff", f"integral.terms[{n}]"), env, f"integral.terms[{n}].coeff")
        coeffs[(a, b)] = coeffs.get((a, b), E.ZERO) + c
    return ClassicalObservable(coeffs) if mode == "classical" else QuantumOperator(coeffs)


def _operator(text: str, mode: str, env: Mapping[str, Expr], l3_sign: int):
    try:
        if mode == "classical":
            return parse_observable(text, env, l3_sign)
        return parse_operator(text, env, l3_sign)
    except GrammarError as exc:
        raise CaseError(f"integral.operator: {exc}\n    {text}\n    {' ' * (exc.pos or 0)}^") from exc
    except ZeroDivisionError as exc:
        raise CaseError("integral.operator: division by zero") from exc


def _bracket_residuals(H, X, mode: str) -> dict[str, Expr]:
    if mode == "classical":
        value = poisson_bracket(H, X)
        return {f"{{H,X}}[p1^{a} p2^{b}]": c for (a, b), c in sorted(value.coeffs.items())}
    value = op_commutator(H, X)
    return {f"[H,X][dx^{a} dy^{b}]": c for (a, b), c in sorted(value.terms.items())}


def verify_case(doc: Mapping[str, Any]) -> CaseReport:
    """Check a parsed case document; raises CaseError when it is malformed."""
    if not isinstance(doc, dict):
        raise CaseError("case document must be a JSON object")
    mode = doc.get("mode")
    if mode not in ("classical", "quantum"):
        raise CaseError("'mode' must be 'classical' or 'quantum'")
    env = _definitions(doc)
    V = _parse(_text(doc, "potential", "case"), env, "potential")
    l3_sign = doc.get("l3_sign", 1)
    if l3_sign not in (1, -1):
        raise CaseError("'l3_sign' must be 1 or -1")
    integral = doc.get("integral")
    if not isinstance(integral, dict):
        raise CaseError("'integral' must be an object")
    H = classical_hamiltonian(V) if mode == "classical" else hamiltonian(V)

    if "ansatz" in integral:
        ansatz = _ansatz(integral["ansatz"], env)
        gen = classical_determining if mode == "classical" else quantum_determining
        system = gen(ansatz, V)
        report = CaseReport(mode, {f"M[{j},{k}]": e for (j, k), e in system if not e.is_zero()}, len(system))
        if report.passed and mode == "quantum":
            # odd levels are not part of the system; the full commutator covers them
            report.residuals.update(_bracket_residuals(H, ansatz_operator(ansatz), mode))
        return report
    if "terms" in integral:
        X = _terms(integral, mode, env)
    elif "operator" in integral:
        X = _operator(_text(integral, "operator", "integral"), mode, env, l3_sign)
    else:
        raise CaseError("'integral' needs one of 'ansatz', 'terms' or 'operator'")
    residuals = _bracket_residuals(H, X, mode)
    return CaseReport(mode, residuals, max(len(residuals), 1))


def load_case(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CaseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def verify_path(path: str | Path) -> CaseReport:
    return verify_case(load_case(path))


__all__ = ["CaseError", "CaseReport", "EXIT_FAIL", "EXIT_INVALID", "EXIT_OK", "load_case", "verify_case",
           "verify_path"]
