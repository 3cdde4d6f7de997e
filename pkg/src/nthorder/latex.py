"""LaTeX output for expressions, determining systems and operators.

Equations are printed one per index (j, 2l) in the order of the system, each
as ``0 = ...`` with the hbar-free part first and the hbar^2 terms collected
after it.  Operators print as sums of half-anticommutators when they are
formally self-adjoint, otherwise in normal order.
"""

from __future__ import annotations

import re

from gmpy2 import mpq

from . import expr as E
from .expr import Expr
from .grammar import sorted_terms
from .operators import QuantumOperator
from .quantum import NotSelfAdjointError, anticommutator_form, hermitian_split
from .system import DeterminingSystem

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda",
    "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega",
}
_NAME = re.compile(r"^([A-Za-z]+?)(\d*)$")


def _ident(name: str) -> str:
    """``A[3,1,0]`` -> ``A_{310}``, ``alpha2`` -> ``\\alpha_{2}``, ``ft[0,2]`` -> ``\\tilde{f}_{0,2}``."""
    if "[" in name:
        head, idx = name[:-1].split("[", 1)
        parts = idx.split(",")
        sub = "".join(parts) if all(len(p) == 1 for p in parts) and len(parts) == 3 else ",".join(parts)
        base = r"\tilde{f}" if head == "ft" else _ident(head)
        return f"{base}_{{{sub}}}"
    m = _NAME.match(name)
    if m is None:
        return rf"\mathrm{{{name}}}"
    word, digits = m.groups()
    base = f"\\{word}" if word in _GREEK else (word if len(word) == 1 else rf"\mathrm{{{word}}}")
    return f"{base}_{{{digits}}}" if digits else base


def _jet(fid: str, dx: int, dy: int) -> str:
    r"""``V_{xxy}`` for the potential, ``(\partial_x^2\partial_y f)`` otherwise."""
    body = _ident(fid)
    if dx == dy == 0:
        return body
    if fid == "V":
        return f"V_{{{'x' * dx}{'y' * dy}}}"
    ops = ""
    if dx:
        ops += r"\partial_x" + (f"^{{{dx}}}" if dx > 1 else "")
    if dy:
        ops += r"\partial_y" + (f"^{{{dy}}}" if dy > 1 else "")
    return f"({ops} {body})"


def _var(v) -> str:
    kind = v[0]
    if kind == E.KIND_X:
        return "x"
    if kind == E.KIND_Y:
        return "y"
    if kind == E.KIND_R:
        return "r"
    if kind == E.KIND_I:
        return "i"
    if kind == E.KIND_HBAR:
        return r"\hbar"
    if kind == E.KIND_PARAM:
        return _ident(v[1])
    return _jet(v[1], v[2], v[3])


def _power(v, e: int) -> str:
    body = _var(v)
    if e == 1:
        return body
    return f"{body}^{{{e}}}"


def _coeff(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def poly_latex(p: dict) -> str:
    if not p:
        return "0"
    out = []
    for idx, (m, c) in enumerate(sorted_terms(p)):
        neg = c < 0
        a = -c if neg else c
        factors = " ".join(_power(v, e) for v, e in m)
        if not factors:
            body = _coeff(a)
        elif a == 1:
            body = factors
        else:
            body = f"{_coeff(a)} {factors}"
        if idx == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def expr_latex(e: Expr) -> str:
    num = poly_latex(e.num)
    if E.p_is_const(e.den):
        return num
    return rf"\frac{{{num}}}{{{poly_latex(e.den)}}}"


def _wrapped(e: Expr) -> str:
    text = expr_latex(e)
    if len(e.num) > 1 and E.p_is_const(e.den):
        return rf"\left({text}\right)"
    return text


def graded_latex(e: Expr) -> str:
    """hbar-free part first, then hbar^2 (and higher) groups."""
    groups = e.hbar_coefficients()
    if not groups:
        return "0"
    parts = []
    for deg in sorted(groups):
        val = groups[deg]
        if deg == 0:
            parts.append(expr_latex(val))
            continue
        h = r"\hbar" + (f"^{{{deg}}}" if deg > 1 else "")
        sign = "+"
        if len(val.num) == 1 and E.p_is_const(val.den):
            text = expr_latex(val)
            if text.startswith("-"):
                sign, text = "-", text[1:]
            piece = f"{h} {text}"
        else:
            piece = h + _wrapped(val)
        if parts:
            parts.append(f"{sign} {piece}")
        else:
            parts.append(piece if sign == "+" else f"-{piece}")
    return " ".join(parts)


def system_latex(system: DeterminingSystem) -> str:
    label = "M" if system.form == "canonical" else r"\tilde{M}"
    lines = [rf"{label}_{{{j},{k}}}:\quad 0 &= {graded_latex(e)}" for (j, k), e in system]
    header = f"% order {system.order}, {system.mode}, {system.form} form, {len(system)} equations"
    return "\n".join([header, r"\begin{align*}", " \\\\\n".join(lines), r"\end{align*}"])


def _momenta(a: int, b: int) -> str:
    parts = []
    if a:
        parts.append(r"\hat{p}_1" + (f"^{{{a}}}" if a > 1 else ""))
    if b:
        parts.append(r"\hat{p}_2" + (f"^{{{b}}}" if b > 1 else ""))
    return " ".join(parts)


def operator_latex(op: QuantumOperator) -> str:
    """Anticommutator form when ``op`` is self-adjoint, normal order otherwise."""
    if op.is_zero():
        return "0"
    _, skew = hermitian_split(op)
    if skew.is_zero():
        try:
            form = anticommutator_form(op)
        except NotSelfAdjointError:
            form = None
        if form is not None:
            order = op.order
            terms = []
            for (j, k), f in sorted(form.items(), key=lambda kv: (kv[0][1], kv[0][0])):
                mom = _momenta(j, order - k - j)
                terms.append(expr_latex(f) if not mom else rf"\frac12\left\{{{expr_latex(f)},\, {mom}\right\}}")
            return " + ".join(terms)
    terms = []
    for (a, b), c in sorted(op.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0])):
        d = ""
        if a:
            d += r"\partial_x" + (f"^{{{a}}}" if a > 1 else "")
        if b:
            d += r"\partial_y" + (f"^{{{b}}}" if b > 1 else "")
        terms.append(f"{_wrapped(c)} {d}".strip())
    return " + ".join(terms)


__all__ = ["expr_latex", "graded_latex", "operator_latex", "poly_latex", "system_latex"]
