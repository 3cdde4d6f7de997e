"""Text form of expressions and operators.

Grammar (whitespace-insensitive)::

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' int)?
    base   := int | 'x' | 'y' | 'r' | 'i' | 'hbar' | ident
            | 'D[' ident ',' int ',' int ']' | '(' expr ')'
            | '{' expr ',' expr '}' | '[' expr ',' expr ']'
    ident  := name ('[' int (',' int)* ']')?

``D[f,a,b]`` is the jet d^a/dx^a d^b/dy^b f.  Braces and square brackets are
the anticommutator and commutator; they are only meaningful when evaluating
into an operator algebra.  ``a/b`` requires ``b`` to be a scalar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from gmpy2 import mpq

from . import expr as E
from .expr import Expr


class GrammarError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        self.text = text
        self.pos = pos
        where = f" at column {pos + 1}" if pos is not None else ""
        super().__init__(f"{message}{where}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


@dataclass(frozen=True)
class Tok:
    kind: str  # 'int', 'name', 'op', 'end'
    value: Any
    pos: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            toks.append(Tok("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            toks.append(Tok("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()[]{},":
                raise GrammarError(f"unexpected character {ch!r}", text, m.start(3))
            toks.append(Tok("op", ch, m.start(3)))
        pos = m.end()
    toks.append(Tok("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> Tok:
        return self.toks[self.i]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok: Tok | None = None):
        tok = tok or self.peek()
        raise GrammarError(msg, self.text, tok.pos)

    def expect(self, value: str):
        t = self.next()
        if t.kind != "op" or t.value != value:
            self.fail(f"expected {value!r}", t)
        return t

    def at(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.value == value

    def parse(self):
        if self.peek().kind == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek().kind != "end":
            self.fail("unexpected trailing input")
        return node

    def expr(self):
        if self.at("-"):
            self.next()
            node = ("neg", self.term())
        else:
            if self.at("+"):
                self.next()
            node = self.term()
        while self.at("+") or self.at("-"):
            op = self.next().value
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at("*") or self.at("/"):
            op = self.next().value
            node = ("mul" if op == "*" else "div", node, self.factor())
        return node

    def factor(self):
        if self.at("-"):
            self.next()
            return ("neg", self.factor())
        node = self.base()
        if self.at("^"):
            self.next()
            node = ("pow", node, self.signed_int())
        return node

    def signed_int(self) -> int:
        paren = False
        if self.at("("):
            self.next()
            paren = True
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        t = self.next()
        if t.kind != "int":
            self.fail("expected integer exponent", t)
        if paren:
            self.expect(")")
        return sign * t.value

    def int_list(self) -> list[int]:
        vals = [self.signed_int()]
        while self.at(","):
            self.next()
            vals.append(self.signed_int())
        return vals

    def ident(self) -> str:
        t = self.next()
        if t.kind != "name":
            self.fail("expected identifier", t)
        name = t.value
        if self.at("[") and self.toks[self.i + 1].kind in ("int",) or (
            self.at("[") and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].value == "-"
        ):
            self.next()
            idx = self.int_list()
            self.expect("]")
            name = f"{name}[{','.join(str(k) for k in idx)}]"
        return name

    def base(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return ("num", t.value)
        if t.kind == "name":
            if t.value == "D" and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].value == "[":
                self.next()
                self.next()
                fid = self.ident()
                self.expect(",")
                a = self.signed_int()
                self.expect(",")
                b = self.signed_int()
                self.expect("]")
                if a < 0 or b < 0:
                    self.fail("negative jet order", t)
                return ("jet", fid, a, b)
            return ("name", self.ident())
        if t.kind == "op":
            if t.value == "(":
                self.next()
                node = self.expr()
                self.expect(")")
                return node
            if t.value in "{[":
                close = "}" if t.value == "{" else "]"
                self.next()
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(close)
                return ("anti" if t.value == "{" else "comm", a, b)
        self.fail("unexpected token" if t.kind != "end" else "unexpected end of input", t)


def parse_ast(text: str):
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# evaluation

_RESERVED_VARS = {"x": E.VX, "y": E.VY, "r": E.VR, "i": E.VI, "hbar": E.VHBAR}


def scalar_atom(name: str) -> Expr:
    if name in _RESERVED_VARS:
        return Expr.var(_RESERVED_VARS[name])
    return E.param(name)


@dataclass
class Algebra:
    """How to interpret the AST: lift scalars, resolve reserved atoms, brackets."""

    lift: Callable[[Expr], Any]
    atoms: Mapping[str, Any]
    as_scalar: Callable[[Any], Expr | None]
    anticommutator: Callable[[Any, Any], Any] | None = None
    commutator: Callable[[Any, Any], Any] | None = None


SCALARS = Algebra(lift=lambda e: e, atoms={}, as_scalar=lambda e: e)


def evaluate(node, algebra: Algebra = SCALARS, env: Mapping[str, Any] | None = None, text: str = ""):
    env = env or {}

    def ev(n):
        kind = n[0]
        if kind == "num":
            return algebra.lift(Expr.const(n[1]))
        if kind == "name":
            name = n[1]
            if name in env:
                val = env[name]
                return algebra.lift(val) if isinstance(val, Expr) else val
            if name in algebra.atoms:
                return algebra.atoms[name]
            return algebra.lift(scalar_atom(name))
        if kind == "jet":
            return algebra.lift(E.jet(n[1], n[2], n[3]))
        if kind == "neg":
            return -ev(n[1])
        if kind == "add":
            return ev(n[1]) + ev(n[2])
        if kind == "sub":
            return ev(n[1]) - ev(n[2])
        if kind == "mul":
            return ev(n[1]) * ev(n[2])
        if kind == "div":
            num = ev(n[1])
            den = algebra.as_scalar(ev(n[2]))
            if den is None:
                raise GrammarError("division by a non-scalar", text)
            if den.is_zero():
                raise GrammarError("division by zero", text)
            return num * algebra.lift(den.inverse())
        if kind == "pow":
            base = ev(n[1])
            k = n[2]
            if k < 0:
                s = algebra.as_scalar(base)
                if s is None:
                    raise GrammarError("negative power of a non-scalar", text)
                if s.is_zero():
                    raise GrammarError("division by zero", text)
                return algebra.lift(s ** k)
            result = algebra.lift(E.ONE)
            for _ in range(k):
                result = result * base
            return result
        if kind in ("anti", "comm"):
            fn = algebra.anticommutator if kind == "anti" else algebra.commutator
            if fn is None:
                raise GrammarError(f"{'anticommutator' if kind == 'anti' else 'commutator'} "
                                   "is not defined here", text)
            return fn(ev(n[1]), ev(n[2]))
        raise GrammarError(f"unknown node {kind}", text)

    return ev(node)


def parse_expr(text: str, env: Mapping[str, Expr] | None = None) -> Expr:
    """Parse a scalar expression in the text grammar."""
    return evaluate(parse_ast(text), SCALARS, env, text)


# --------------------------------------------------------------------------
# printing

def var_name(v) -> str:
    kind = v[0]
    if kind == E.KIND_JET:
        return f"D[{v[1]},{v[2]},{v[3]}]"
    return v[1]


def mono_key(vs: list):
    def key(m):
        exps = dict(m)
        return (sum(exps.values()), tuple(exps.get(v, 0) for v in vs))
    return key


def sorted_terms(p: dict) -> list:
    vs = sorted(E.p_vars(p))
    return sorted(p.items(), key=lambda mc: mono_key(vs)(mc[0]), reverse=True)


def _format_coeff(c) -> str:
    c = mpq(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: dict) -> str:
    if not p:
        return "0"
    parts = []
    for idx, (m, c) in enumerate(sorted_terms(p)):
        neg = c < 0
        a = -c if neg else c
        factors = [var_name(v) + (f"^{e}" if e != 1 else "") for v, e in m]
        if not factors:
            body = _format_coeff(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = _format_coeff(a) + "*" + "*".join(factors)
        if idx == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def format_expr(e: Expr) -> str:
    num = format_poly(e.num)
    if E.p_is_const(e.den):
        return num
    return f"({num})/({format_poly(e.den)})"
