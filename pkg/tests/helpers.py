"""Random instances shared by the unit and acceptance tests."""

from __future__ import annotations

import copy
import random

from hypothesis import strategies as st

from nthorder import expr as E
from nthorder.classical import ClassicalObservable
from nthorder.expr import Expr
from nthorder.operators import QuantumOperator


def rational(rng: random.Random, lo: int = -5, hi: int = 5) -> Expr:
    return Expr.const(E.mpq(rng.randint(lo, hi), rng.randint(1, 4)))


def poly(rng: random.Random, deg: int = 2, density: float = 0.6) -> Expr:
    """Random polynomial in x, y with rational coefficients."""
    total = E.ZERO
    for a in range(deg + 1):
        for b in range(deg + 1 - a):
            if rng.random() < density:
                total = total + rational(rng) * E.x ** a * E.y ** b
    return total


def observable(rng: random.Random, degree: int = 2, deg: int = 2) -> ClassicalObservable:
    return ClassicalObservable({(a, d - a): poly(rng, deg) for d in range(degree + 1) for a in range(d + 1)})


def operator(rng: random.Random, order: int = 2, deg: int = 2, complex_coeffs: bool = True) -> QuantumOperator:
    terms = {}
    for d in range(order + 1):
        for a in range(d + 1):
            c = poly(rng, deg)
            if complex_coeffs:
                c = c + E.I * poly(rng, deg, 0.3)
            terms[(a, d - a)] = c
    return QuantumOperator(terms)


def canonical_coeffs(rng: random.Random, N: int, levels, deg: int = 2) -> dict:
    return {(j, k): poly(rng, deg) for k in levels for j in range(N - k + 1)}


ATOMS = [E.x, E.y, E.r, E.hbar, E.I, E.param("a"), E.param("omega"), E.jet("V"), E.jet("f[0,2]", 1, 0)]


@st.composite
def exprs(draw, depth=2):
    """Small polynomial expressions over Q(i)."""
    terms = draw(st.lists(st.tuples(st.integers(-6, 6), st.integers(1, 4),
                                    st.lists(st.sampled_from(ATOMS), max_size=3)), max_size=4))
    total = E.ZERO
    for n, d, factors in terms:
        t = Expr.const(E.mpq(n, d))
        for a in factors:
            t = t * a
        total = total + t
    return total


def frac_exprs():
    """Rational functions built from two polynomial strategies."""
    return st.tuples(exprs(), exprs().filter(lambda e: not e.is_zero())).map(lambda p: p[0] / p[1])


# --------------------------------------------------------------------------
# fixture mutation

TEXT_KEYS = ("lhs", "rhs", "expr", "integral", "hamiltonian", "operator")


def literal_sites(text: str) -> list[tuple[int, int]]:
    """Spans of integer literals acting as coefficients (not exponents or indices)."""
    sites, depth, i = [], 0, 0
    while i < len(text):
        ch = text[i]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch.isalpha() or ch == "_":
            while i < len(text) and (text[i].isalnum() or text[i] == "_"):
                i += 1
            continue
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            prev = text[:i].rstrip()[-1:] if text[:i].strip() else ""
            if depth == 0 and prev != "^":
                sites.append((i, j))
            i = j
            continue
        i += 1
    return sites


def text_fields(doc: dict):
    """(path, text) of every coefficient-bearing text in a fixture document."""
    for name, text in doc.get("definitions", {}).items():
        yield ["definitions", name], text
    for n, check in enumerate(doc.get("checks", [])):
        for key in TEXT_KEYS:
            if isinstance(check.get(key), str):
                yield ["checks", n, key], check[key]
        for key in ("f", "g"):
            for idx, text in check.get(key, {}).items():
                yield ["checks", n, key, idx], text


def mutation_sites(doc: dict) -> list[tuple[list, int, int]]:
    return [(path, a, b) for path, text in text_fields(doc) for a, b in literal_sites(text)]


def mutate(doc: dict, path: list, a: int, b: int, delta: int = 1) -> dict:
    out = copy.deepcopy(doc)
    node = out
    for p in path[:-1]:
        node = node[p]
    text = node[path[-1]]
    node[path[-1]] = text[:a] + str(int(text[a:b]) + delta) + text[b:]
    return out


def affected_document(doc: dict, path: list) -> dict:
    """Restrict a mutated document to the checks a mutation can reach."""
    if path[0] == "checks":
        return {**doc, "checks": [doc["checks"][path[1]]], "errata": []}
    return {**doc, "errata": []}


_REPORTS: dict = {}


def fixture_report(name: str):
    """run_fixture, memoized across test modules."""
    from nthorder.fixtures import run_fixture
    if name not in _REPORTS:
        _REPORTS[name] = run_fixture(name)
    return _REPORTS[name]
