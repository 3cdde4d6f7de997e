"""Integral ansatz and determining-system containers shared by both mechanics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterator, Mapping

from . import expr as E
from .expr import Expr
from .grammar import parse_expr


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero whenever the arguments are out of range."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def f_name(j: int, k: int) -> str:
    return f"f[{j},{k}]"


def a_name(k: int, m: int, n: int) -> str:
    return f"A[{k},{m},{n}]"


def leading_indices(N: int) -> Iterator[tuple[int, int, int]]:
    """All (k, m, n) with k + m + n == N, k the power of L3."""
    for m in range(N + 1):
        for n in range(N + 1 - m):
            yield (N - m - n, m, n)


def symbolic_A(N: int) -> dict[tuple[int, int, int], Expr]:
    return {idx: E.param(a_name(*idx)) for idx in leading_indices(N)}


def equation_indices(N: int) -> list[tuple[int, int]]:
    """Index set (j, 2l) of the determining equations, ordered by (l, j)."""
    return [(j, 2 * l) for l in range((N + 1) // 2 + 1) for j in range(N - 2 * l + 2)]


def unknown_indices(N: int) -> list[tuple[int, int]]:
    return [(j, 2 * l) for l in range(N // 2 + 1) for j in range(N - 2 * l + 1)]


def count_equations(N: int) -> int:
    if N < 1:
        raise ValueError("order must be at least 1")
    return (N + 3) ** 2 // 4 if N % 2 else (N + 2) * (N + 4) // 4


def count_unknowns(N: int) -> int:
    if N < 1:
        raise ValueError("order must be at least 1")
    return (N + 1) * (N + 3) // 4 if N % 2 else (N + 2) ** 2 // 4


@dataclass(frozen=True)
class IntegralAnsatz:
    """Order-N integral with coefficient functions f[j,2l].

    When ``A`` is given the leading functions f[j,0] are the solved
    polynomials in x, y built from those constants; otherwise they stay
    symbolic jets.  Entries missing from ``f`` are symbolic jets ``f[j,k]``.
    """

    order: int
    A: Mapping[tuple[int, int, int], Expr] | None = None
    f: Mapping[tuple[int, int], Expr] = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        for (j, k) in self.f:
            if k % 2 or not (0 <= j <= self.order - k) or k < 0:
                raise ValueError(f"coefficient f[{j},{k}] outside the index range for N={self.order}")
        if self.A is not None:
            for (k, m, n) in self.A:
                if k + m + n != self.order or min(k, m, n) < 0:
                    raise ValueError(f"A[{k},{m},{n}] does not have k+m+n={self.order}")

    @classmethod
    def symbolic(cls, N: int, solved: bool = False) -> "IntegralAnsatz":
        return cls(N, symbolic_A(N) if solved else None)

    @cached_property
    def leading(self) -> dict[int, Expr]:
        from .classical import solve_leading
        return solve_leading(self.order, self.A or {})

    def coefficient(self, j: int, k: int) -> Expr:
        N = self.order
        if j < 0 or k < 0 or k % 2 or j > N - k:
            return E.ZERO
        if k == 0 and self.A is not None:
            return self.leading[j]
        if (j, k) in self.f:
            return self.f[(j, k)]
        return E.jet(f_name(j, k))


@dataclass
class DeterminingSystem:
    order: int
    mode: str  # 'classical' | 'quantum'
    equations: dict[tuple[int, int], Expr]
    form: str = "canonical"

    def __iter__(self):
        return iter(sorted(self.equations.items(), key=lambda kv: (kv[0][1], kv[0][0])))

    def __len__(self) -> int:
        return len(self.equations)

    def substitute(self, bindings: Mapping[str, Expr]) -> "DeterminingSystem":
        return DeterminingSystem(self.order, self.mode,
                                 {k: E.substitute(v, bindings) for k, v in self.equations.items()},
                                 self.form)

    def nonzero(self) -> dict[tuple[int, int], Expr]:
        return {k: v for k, v in self if not v.is_zero()}

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "mode": self.mode,
            "form": self.form,
            "equations": [{"j": j, "k": k, "expr": str(e)} for (j, k), e in self],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "DeterminingSystem":
        eqs = {(int(q["j"]), int(q["k"])): parse_expr(q["expr"]) for q in data["equations"]}
        return cls(int(data["order"]), data["mode"], eqs, data.get("form", "canonical"))

    @classmethod
    def from_json(cls, text: str) -> "DeterminingSystem":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeterminingSystem):
            return NotImplemented
        return (self.order, self.mode, self.form, self.equations) == (
            other.order, other.mode, other.form, other.equations)
