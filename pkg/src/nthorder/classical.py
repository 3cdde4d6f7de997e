"""Classical observables, the Poisson bracket and the classical determining system."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from . import expr as E
from .expr import Expr, diff, diff_n
from .grammar import Algebra, evaluate, parse_ast, parse_expr
from .system import DeterminingSystem, IntegralAnsatz, binom, equation_indices, leading_indices

Key = tuple[int, int]


class ClassicalObservable:
    """Polynomial in the momenta: sum of coeffs[a, b] * p1^a * p2^b."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Key, Expr] | None = None):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if not v.is_zero()}

    @classmethod
    def scalar(cls, value) -> "ClassicalObservable":
        return cls({(0, 0): Expr.coerce(value)})

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def as_scalar(self) -> Expr | None:
        if not self.coeffs:
            return E.ZERO
        if set(self.coeffs) == {(0, 0)}:
            return self.coeffs[(0, 0)]
        return None

    def __getitem__(self, key: Key) -> Expr:
        return self.coeffs.get(key, E.ZERO)

    def __add__(self, other) -> "ClassicalObservable":
        other = _lift(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return ClassicalObservable(out)

    __radd__ = __add__

    def __neg__(self) -> "ClassicalObservable":
        return ClassicalObservable({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other) -> "ClassicalObservable":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "ClassicalObservable":
        return _lift(other) - self

    def __mul__(self, other) -> "ClassicalObservable":
        other = _lift(other)
        out: dict[Key, Expr] = {}
        for (a1, b1), c1 in self.coeffs.items():
            for (a2, b2), c2 in other.coeffs.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        return ClassicalObservable(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ClassicalObservable":
        out = ClassicalObservable.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassicalObservable):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"ClassicalObservable({self.to_dict()})"

    def dx(self, wrt: str) -> "ClassicalObservable":
        return ClassicalObservable({k: diff(v, wrt) for k, v in self.coeffs.items()})

    def dp(self, axis: int) -> "ClassicalObservable":
        out = {}
        for (a, b), c in self.coeffs.items():
            e = (a, b)[axis]
            if e:
                out[(a - 1, b) if axis == 0 else (a, b - 1)] = c * e
        return ClassicalObservable(out)

    def map(self, fn) -> "ClassicalObservable":
        return ClassicalObservable({k: fn(v) for k, v in self.coeffs.items()})

    def substitute(self, bindings: Mapping[str, Expr]) -> "ClassicalObservable":
        return self.map(lambda e: E.substitute(e, bindings))

    def to_dict(self) -> dict:
        return {"terms": [{"p1": a, "p2": b, "coeff": str(c)}
                          for (a, b), c in sorted(self.coeffs.items(), key=lambda kv: (-sum(kv[0]), -kv[0][0]))]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassicalObservable":
        out: dict[Key, Expr] = {}
        for t in data["terms"]:
            a, b = int(t["p1"]), int(t["p2"])
            if a < 0 or b < 0:
                raise ValueError("momentum powers must be non-negative")
            c = parse_expr(t["coeff"])
            out[(a, b)] = out[(a, b)] + c if (a, b) in out else c
        return cls(out)

    @classmethod
    def from_json(cls, text: str) -> "ClassicalObservable":
        return cls.from_dict(json.loads(text))


def _lift(value) -> ClassicalObservable:
    if isinstance(value, ClassicalObservable):
        return value
    return ClassicalObservable.scalar(value)


P1 = ClassicalObservable({(1, 0): E.ONE})
P2 = ClassicalObservable({(0, 1): E.ONE})


def angular_momentum(sign: int = 1) -> ClassicalObservable:
    """L3 = x p2 - y p1 (``sign=-1`` gives the opposite convention)."""
    return ClassicalObservable({(0, 1): E.x * sign, (1, 0): -E.y * sign})


L3 = angular_momentum()


def hamiltonian(V: Expr | None = None) -> ClassicalObservable:
    V = E.jet("V") if V is None else V
    return ClassicalObservable({(2, 0): E.ONE, (0, 2): E.ONE, (0, 0): V})


def classical_algebra(l3_sign: int = 1) -> Algebra:
    return Algebra(
        lift=ClassicalObservable.scalar,
        atoms={"p1": P1, "p2": P2, "L3": angular_momentum(l3_sign)},
        as_scalar=lambda o: o.as_scalar(),
    )


def parse_observable(text: str, env: Mapping[str, object] | None = None, l3_sign: int = 1) -> ClassicalObservable:
    """Parse an observable such as ``p2*L3^2 + f12*p1``; p1, p2, L3 are momenta."""
    return _lift(evaluate(parse_ast(text), classical_algebra(l3_sign), env, text))


def poisson_bracket(A: ClassicalObservable, B: ClassicalObservable) -> ClassicalObservable:
    """{A, B} = sum_i dA/dq_i dB/dp_i - dA/dp_i dB/dq_i."""
    return (A.dx("x") * B.dp(0) - A.dp(0) * B.dx("x")
            + A.dx("y") * B.dp(1) - A.dp(1) * B.dx("y"))


def solve_leading(N: int, A: Mapping[tuple[int, int, int], Expr]) -> dict[int, Expr]:
    """Leading coefficients f[j,0] of sum A[k,m,n] L3^k p1^m p2^n (k+m+n = N)."""
    if N < 1:
        raise ValueError("order must be at least 1")
    out = {}
    for j in range(N + 1):
        total = E.ZERO
        for n in range(N - j + 1):
            for m in range(j + 1):
                a = A.get((N - n - m, m, n))
                c = binom(N - n - m, j - m)
                if a is None or not c:
                    continue
                total = total + Expr.coerce(a) * c * E.x ** (N - j - n) * (-E.y) ** (j - m)
        out[j] = total
    return out


def _determining_equation(ansatz: IntegralAnsatz, V: Expr, j: int, k: int) -> Expr:
    N = ansatz.order
    f = ansatz.coefficient
    return (2 * (diff(f(j - 1, k), "x") + diff(f(j, k), "y"))
            - ((j + 1) * f(j + 1, k - 2) * diff(V, "x")
               + (N - k + 2 - j) * f(j, k - 2) * diff(V, "y")))


def classical_determining(ansatz: IntegralAnsatz, V: Expr | None = None) -> DeterminingSystem:
    """Residuals of the classical determining equations, keyed by (j, 2l)."""
    Vs = E.jet("V")
    eqs = {idx: _determining_equation(ansatz, Vs, *idx) for idx in equation_indices(ansatz.order)}
    system = DeterminingSystem(ansatz.order, "classical", eqs)
    if V is not None:
        system = system.substitute({"V": V})
    return system


def linear_compatibility(N: int, A: Mapping[tuple[int, int, int], Expr], V: Expr | None = None) -> Expr:
    """Linear PDE on V required by the l = 1 block (zero when it is satisfied)."""
    V = E.jet("V") if V is None else V
    f = solve_leading(N, A)
    f = {**f, N + 1: E.ZERO}
    Vx, Vy = diff(V, "x"), diff(V, "y")
    total = E.ZERO
    for j in range(N):
        inner = (j + 1) * f[j + 1] * Vx + (N - j) * f[j] * Vy
        total = total + (-1) ** j * diff_n(inner, N - 1 - j, j)
    return total


@dataclass
class ClassicalReport:
    bracket: ClassicalObservable

    @property
    def passed(self) -> bool:
        return self.bracket.is_zero()

    @property
    def residuals(self) -> dict[Key, Expr]:
        return dict(self.bracket.coeffs)


def verify_classical(X: ClassicalObservable, H: ClassicalObservable) -> ClassicalReport:
    return ClassicalReport(poisson_bracket(H, X))


def bracket_coefficient_system(ansatz: IntegralAnsatz, V: Expr | None = None) -> dict[tuple[int, int], Expr]:
    """Independent route: minus the p1^j p2^(N-k+1-j) coefficients of {H, X}."""
    N = ansatz.order
    X = ClassicalObservable({(j, N - k - j): ansatz.coefficient(j, k)
                             for l in range(N // 2 + 1) for k in [2 * l] for j in range(N - k + 1)})
    br = poisson_bracket(hamiltonian(), X)
    out = {}
    for (j, k) in equation_indices(N):
        e = -br[(j, N - k + 1 - j)]
        out[(j, k)] = e if V is None else E.substitute(e, {"V": V})
    return out


__all__ = [
    "ClassicalObservable", "P1", "P2", "L3", "angular_momentum", "hamiltonian", "parse_observable",
    "poisson_bracket", "solve_leading", "classical_determining", "linear_compatibility",
    "verify_classical", "bracket_coefficient_system", "leading_indices",
]
