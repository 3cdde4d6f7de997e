"""Normal-ordered differential operators sum c[a, b](x, y) d_x^a d_y^b."""

from __future__ import annotations

import json
from typing import Mapping

from . import expr as E
from .expr import Expr, diff
from .grammar import Algebra, evaluate, parse_ast, parse_expr
from .system import binom

Key = tuple[int, int]

MINUS_I_HBAR = -E.I * E.hbar


class _DerivCache:
    """Memoized mixed partials of one coefficient."""

    __slots__ = ("base", "table")

    def __init__(self, base: Expr):
        self.base = base
        self.table = {(0, 0): base}

    def get(self, a: int, b: int) -> Expr:
        key = (a, b)
        out = self.table.get(key)
        if out is None:
            if b:
                out = diff(self.get(a, b - 1), "y")
            else:
                out = diff(self.get(a - 1, 0), "x")
            self.table[key] = out
        return out


class QuantumOperator:
    """Differential operator with every coefficient standing left of the derivatives."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, Expr] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @classmethod
    def scalar(cls, value) -> "QuantumOperator":
        return cls({(0, 0): Expr.coerce(value)})

    @property
    def order(self) -> int:
        return max((a + b for a, b in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def as_scalar(self) -> Expr | None:
        if not self.terms:
            return E.ZERO
        if set(self.terms) == {(0, 0)}:
            return self.terms[(0, 0)]
        return None

    def __getitem__(self, key: Key) -> Expr:
        return self.terms.get(key, E.ZERO)

    def __add__(self, other) -> "QuantumOperator":
        other = _lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return QuantumOperator(out)

    __radd__ = __add__

    def __neg__(self) -> "QuantumOperator":
        return QuantumOperator({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "QuantumOperator":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "QuantumOperator":
        return _lift(other) - self

    def __mul__(self, other) -> "QuantumOperator":
        other = _lift(other)
        return op_mul(self, other)

    def __rmul__(self, other) -> "QuantumOperator":
        return op_mul(_lift(other), self)

    def __pow__(self, n: int) -> "QuantumOperator":
        out = QuantumOperator.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantumOperator):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"QuantumOperator({self.to_dict()})"

    def map(self, fn) -> "QuantumOperator":
        return QuantumOperator({k: fn(v) for k, v in self.terms.items()})

    def substitute(self, bindings: Mapping[str, Expr]) -> "QuantumOperator":
        return self.map(lambda e: E.substitute(e, bindings))

    def momentum_coefficients(self) -> dict[Key, Expr]:
        """Coefficients with respect to p1^a p2^b, p = -i hbar d."""
        return {k: v / MINUS_I_HBAR ** (k[0] + k[1]) for k, v in self.terms.items()}

    def to_dict(self) -> dict:
        return {"terms": [{"dx": a, "dy": b, "coeff": str(c)}
                          for (a, b), c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), -kv[0][0]))]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "QuantumOperator":
        out: dict[Key, Expr] = {}
        for t in data["terms"]:
            a, b = int(t["dx"]), int(t["dy"])
            if a < 0 or b < 0:
                raise ValueError("derivative orders must be non-negative")
            c = parse_expr(t["coeff"])
            out[(a, b)] = out[(a, b)] + c if (a, b) in out else c
        return cls(out)

    @classmethod
    def from_json(cls, text: str) -> "QuantumOperator":
        return cls.from_dict(json.loads(text))


def _lift(value) -> QuantumOperator:
    if isinstance(value, QuantumOperator):
        return value
    return QuantumOperator.scalar(value)


def op_mul(A: QuantumOperator, B: QuantumOperator) -> QuantumOperator:
    """Product A∘B, normal-ordered by the Leibniz rule."""
    out: dict[Key, Expr] = {}
    caches = {k: _DerivCache(v) for k, v in B.terms.items()}
    for (a1, b1), f in A.terms.items():
        for (a2, b2), cache in caches.items():
            for g1 in range(a1 + 1):
                c1 = binom(a1, g1)
                for g2 in range(b1 + 1):
                    dg = cache.get(g1, g2)
                    if dg.is_zero():
                        continue
                    term = f * dg * (c1 * binom(b1, g2))
                    k = (a1 - g1 + a2, b1 - g2 + b2)
                    out[k] = out[k] + term if k in out else term
    return QuantumOperator(out)


def op_commutator(A: QuantumOperator, B: QuantumOperator) -> QuantumOperator:
    return op_mul(A, B) - op_mul(B, A)


def op_anticommutator(A: QuantumOperator, B: QuantumOperator) -> QuantumOperator:
    return op_mul(A, B) + op_mul(B, A)


def formal_adjoint(A: QuantumOperator) -> QuantumOperator:
    """(f d^a)^† = (-1)^|a| d^a ∘ conj(f), re-normal-ordered."""
    out: dict[Key, Expr] = {}
    for (a, b), f in A.terms.items():
        cache = _DerivCache(f.conjugate())
        sign = -1 if (a + b) % 2 else 1
        for g1 in range(a + 1):
            for g2 in range(b + 1):
                d = cache.get(g1, g2)
                if d.is_zero():
                    continue
                term = d * (sign * binom(a, g1) * binom(b, g2))
                k = (a - g1, b - g2)
                out[k] = out[k] + term if k in out else term
    return QuantumOperator(out)


def momentum_power(a: int, b: int) -> QuantumOperator:
    """p1^a p2^b = (-i hbar)^(a+b) d_x^a d_y^b."""
    return QuantumOperator({(a, b): MINUS_I_HBAR ** (a + b)})


P1 = momentum_power(1, 0)
P2 = momentum_power(0, 1)


def angular_momentum(sign: int = 1) -> QuantumOperator:
    """L3 = x p2 - y p1 (``sign=-1`` for y p1 - x p2)."""
    return QuantumOperator({(0, 1): E.x * MINUS_I_HBAR * sign, (1, 0): -E.y * MINUS_I_HBAR * sign})


L3 = angular_momentum()


def hamiltonian(V: Expr | None = None) -> QuantumOperator:
    """H = p1^2 + p2^2 + V."""
    V = E.jet("V") if V is None else V
    h2 = -E.hbar * E.hbar
    return QuantumOperator({(2, 0): h2, (0, 2): h2, (0, 0): V})


def quantum_algebra(l3_sign: int = 1) -> Algebra:
    return Algebra(
        lift=QuantumOperator.scalar,
        atoms={"p1": P1, "p2": P2, "L3": angular_momentum(l3_sign)},
        as_scalar=lambda o: o.as_scalar(),
        anticommutator=lambda a, b: op_anticommutator(_lift(a), _lift(b)),
        commutator=lambda a, b: op_commutator(_lift(a), _lift(b)),
    )


def parse_operator(text: str, env: Mapping[str, object] | None = None, l3_sign: int = 1) -> QuantumOperator:
    """Parse e.g. ``1/4*(p2*L3^2 + L3^2*p2) + 1/2*{f, p1}``."""
    return _lift(evaluate(parse_ast(text), quantum_algebra(l3_sign), env, text))
