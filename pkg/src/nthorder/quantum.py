"""Quantum integrals: symmetrized canonical form, corrections in hbar^2 and determining equations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import expr as E
from .expr import Expr, diff, diff_n
from .operators import (
    MINUS_I_HBAR, QuantumOperator, angular_momentum, formal_adjoint, hamiltonian, momentum_power,
    op_anticommutator, op_commutator, op_mul,
)
from .system import DeterminingSystem, IntegralAnsatz, binom, equation_indices, leading_indices

Key = tuple[int, int]
HBAR2 = E.hbar * E.hbar


class NotSelfAdjointError(ValueError):
    pass


class OracleDivisionError(ValueError):
    pass


# --------------------------------------------------------------------------
# canonical symmetrized form

def half_anticommutator(f: Expr, a: int, b: int) -> QuantumOperator:
    """1/2 {f, p1^a p2^b}."""
    P = momentum_power(a, b)
    F = QuantumOperator.scalar(f)
    return op_anticommutator(F, P) * Expr.const(E.mpq(1, 2))


def canonical_operator(N: int, f: Mapping[Key, Expr]) -> QuantumOperator:
    """X = 1/2 sum {f[j,k], p1^j p2^(N-k-j)}."""
    out = QuantumOperator()
    for (j, k), c in f.items():
        if c.is_zero():
            continue
        if not (0 <= j <= N - k) or k < 0:
            raise ValueError(f"f[{j},{k}] outside the index range for order {N}")
        out = out + half_anticommutator(c, j, N - k - j)
    return out


def ansatz_operator(ansatz: IntegralAnsatz) -> QuantumOperator:
    N = ansatz.order
    return canonical_operator(N, {(j, 2 * l): ansatz.coefficient(j, 2 * l)
                                  for l in range(N // 2 + 1) for j in range(N - 2 * l + 1)})


def hermitian_split(A: QuantumOperator) -> tuple[QuantumOperator, QuantumOperator]:
    adj = formal_adjoint(A)
    half = Expr.const(E.mpq(1, 2))
    return (A + adj) * half, (A - adj) * half


def anticommutator_form(A: QuantumOperator, order: int | None = None) -> dict[Key, Expr]:
    """Real f[j,k] with A = 1/2 sum {f[j,k], p1^j p2^(N-k-j)}, peeled from the top order down."""
    if not (A - formal_adjoint(A)).is_zero():
        raise NotSelfAdjointError("operator is not formally self-adjoint")
    N = A.order if order is None else order
    out: dict[Key, Expr] = {}
    rest = A
    for d in range(N, -1, -1):
        for a in range(d, -1, -1):
            c = rest[(a, d - a)]
            if c.is_zero():
                continue
            f = c / MINUS_I_HBAR ** d
            if not f.is_real():
                raise NotSelfAdjointError(f"non-real coefficient at order {d}")
            out[(a, N - d)] = f
            rest = rest - half_anticommutator(f, a, d - a)
    assert rest.is_zero()
    return out


# --------------------------------------------------------------------------
# closed-form determining equations

class PhiTable:
    """phi[j, K] (K = 2l - eps) of the normal-ordered expansion of the canonical integral."""

    def __init__(self, N: int, f):
        self.N = N
        self.f = f if callable(f) else (lambda j, k, _m=f: _m.get((j, k), E.ZERO))
        self.values: dict[Key, Expr] = {}

    def __getitem__(self, key: Key) -> Expr:
        j, K = key
        if K <= 0 or j < 0:
            return E.ZERO
        if key not in self.values:
            self.values[key] = self._compute(j, K)
        return self.values[key]

    def _compute(self, j: int, K: int) -> Expr:
        N = self.N
        l = (K + 1) // 2
        eps = 2 * l - K
        total = E.ZERO
        for b in range(1, l + 1):
            s = 2 * b - eps
            weight = (-HBAR2) ** (b - 1) * Expr.const(E.mpq(1, 2))
            for a in range(s + 1):
                c = binom(j + a, a) * binom(N - 2 * l + 2 * b - j - a, s - a)
                if not c:
                    continue
                src = self.f(j + a, 2 * l - 2 * b)
                if src.is_zero():
                    continue
                total = total + weight * c * diff_n(src, a, s - a)
        return total


def phi_table(N: int, f) -> PhiTable:
    return PhiTable(N, f)


def _vjet_cache(V: Expr):
    table: dict[Key, Expr] = {}

    def get(a: int, b: int) -> Expr:
        if (a, b) not in table:
            table[(a, b)] = diff_n(V, a, b)
        return table[(a, b)]

    return get


def quantum_correction(N: int, j: int, l: int, f, V: Expr | None = None, phi: PhiTable | None = None) -> Expr:
    """Q[j,2l]; f is a mapping or a callable (j, k) -> Expr."""
    if l < 1:
        return E.ZERO
    V = E.jet("V") if V is None else V
    fget = f if callable(f) else (lambda jj, kk: f.get((jj, kk), E.ZERO))
    phi = phi or PhiTable(N, fget)
    dV = _vjet_cache(V)
    K = 2 * l
    total = (2 * diff(phi[(j - 1, K)], "x") + 2 * diff(phi[(j, K)], "y")
             + diff_n(phi[(j, K - 1)], 2, 0) + diff_n(phi[(j, K - 1)], 0, 2))
    for n in range(l - 1):
        s = 2 * n + 3
        w = (-HBAR2) ** n
        for m in range(s + 1):
            c = binom(j + m, m) * binom(N - K + 2 * n + 4 - j - m, s - m)
            src = fget(j + m, K - 2 * n - 4)
            if c and not src.is_zero():
                total = total - w * c * dV(m, s - m) * src
    for s in range(1, K):
        w = (-HBAR2) ** ((s - 1) // 2)
        for m in range(s + 1):
            c = binom(j + m, m) * binom(N - K + s + 1 - j - m, s - m)
            src = phi[(j + m, K - s - 1)]
            if c and not src.is_zero():
                total = total - w * c * dV(m, s - m) * src
    return total


def quantum_determining(ansatz: IntegralAnsatz, V: Expr | None = None) -> DeterminingSystem:
    """M[j,2l]: the classical residual minus hbar^2 Q[j,2l]."""
    N = ansatz.order
    Vs = E.jet("V")
    f = ansatz.coefficient
    phi = PhiTable(N, f)
    Vx, Vy = diff(Vs, "x"), diff(Vs, "y")
    eqs = {}
    for (j, k) in equation_indices(N):
        classical = (2 * (diff(f(j - 1, k), "x") + diff(f(j, k), "y"))
                     - ((j + 1) * f(j + 1, k - 2) * Vx + (N - k + 2 - j) * f(j, k - 2) * Vy))
        eqs[(j, k)] = classical - HBAR2 * quantum_correction(N, j, k // 2, f, Vs, phi)
    system = DeterminingSystem(N, "quantum", eqs)
    if V is not None:
        system = system.substitute({"V": V})
    return system


# --------------------------------------------------------------------------
# commutator oracle

def extract_M_oracle(X: QuantumOperator, H: QuantumOperator, N: int) -> dict[Key, Expr]:
    """Coefficients M[j,k] of [H, X] = sum M[j,k] d_x^j d_y^(1+N-k-j) (-i hbar)^(2+N-k)."""
    C = op_commutator(H, X)
    out = {(j, k): E.ZERO for k in range(N + 2) for j in range(N + 2 - k)}
    for (a, b), c in C.terms.items():
        k = 1 + N - a - b
        if k < 0:
            raise OracleDivisionError(f"[H, X] has a term of order {a + b} above N + 1")
        m = c / MINUS_I_HBAR ** (2 + N - k)
        if E.VHBAR in E.p_vars(m.den):
            raise OracleDivisionError(f"coefficient of d^({a},{b}) is not divisible by hbar^{2 + N - k}")
        out[(a, k)] = m
    return out


def even_part(M: Mapping[Key, Expr]) -> dict[Key, Expr]:
    return {k: v for k, v in M.items() if k[1] % 2 == 0}


# --------------------------------------------------------------------------
# symmetrization schemes

@dataclass(frozen=True)
class SymmetrizationScheme:
    """Weights c[a, b]: the left factor carries a copies of the first generator and b - a of the second."""

    weights: Mapping[Key, Expr]

    def total(self) -> Expr:
        return E.expr_sum(Expr.coerce(w) for w in self.weights.values())


class SchemeError(ValueError):
    pass


def general_symmetrization(f, j: int, k: int, scheme: SymmetrizationScheme,
                           generators: tuple[QuantumOperator, QuantumOperator] | None = None) -> QuantumOperator:
    """sum c[a,b] (G1^a G2^(b-a) f G1^(j-a) G2^(k-b+a) + reversed); G defaults to (p1, p2)."""
    if not (scheme.total() - Expr.const(E.mpq(1, 2))).is_zero():
        raise SchemeError(f"weights sum to {scheme.total()}, not 1/2")
    G1, G2 = generators or (momentum_power(1, 0), momentum_power(0, 1))
    F = f if isinstance(f, QuantumOperator) else QuantumOperator.scalar(f)
    out = QuantumOperator()
    for (a, b), c in scheme.weights.items():
        if not (0 <= a <= j and 0 <= b - a <= k):
            raise SchemeError(f"weight index ({a},{b}) outside 0<=a<={j}, 0<=b-a<={k}")
        c = Expr.coerce(c)
        if c.is_zero():
            continue
        left = op_mul(G1 ** a, G2 ** (b - a))
        right = op_mul(G1 ** (j - a), G2 ** (k - b + a))
        out = out + (op_mul(op_mul(left, F), right) + op_mul(op_mul(right, F), left)) * c
    return out


def rewrite_to_canonical(S: QuantumOperator, order: int | None = None) -> tuple[dict[Key, Expr], dict[Key, Expr]]:
    """Split a self-adjoint S into 1/2{f,.} - hbar^2 1/2{g,.}: f is the hbar -> 0 part."""
    selfadj, skew = hermitian_split(S)
    if not skew.is_zero():
        raise NotSelfAdjointError("operator is not formally self-adjoint")
    F = anticommutator_form(S, order)
    zero = {E.VHBAR: E.ZERO}
    f, g = {}, {}
    for key, val in F.items():
        base = val.subs(zero)
        if not base.is_zero():
            f[key] = base
        corr = (base - val) / HBAR2
        if not corr.is_zero():
            g[key] = corr
    return f, g


# --------------------------------------------------------------------------
# enveloping-algebra form

def standard_leading(N: int, A: Mapping[tuple[int, int, int], Expr], l3_sign: int = 1) -> QuantumOperator:
    """P_N = 1/2 sum A[k,m,n] {p1^m p2^n, L3^k}."""
    L = angular_momentum(l3_sign)
    half = Expr.const(E.mpq(1, 2))
    out = QuantumOperator()
    powers = {0: QuantumOperator.scalar(1)}
    for k in range(1, N + 1):
        powers[k] = op_mul(powers[k - 1], L)
    for (k, m, n) in leading_indices(N):
        a = A.get((k, m, n))
        if a is None or Expr.coerce(a).is_zero():
            continue
        out = out + op_anticommutator(momentum_power(m, n), powers[k]) * (Expr.coerce(a) * half)
    return out


def tilde_name(j: int, k: int) -> str:
    return f"ft[{j},{k}]"


def enveloping_form(N: int, A: Mapping[tuple[int, int, int], Expr], tilde_f: Mapping[Key, Expr] | None = None,
                    l3_sign: int = 1) -> QuantumOperator:
    """X = P_N + 1/2 sum_{l>=1} {ft[j,2l], p1^j p2^(N-2l-j)}; missing ft are symbolic jets."""
    tilde_f = tilde_f or {}
    lower = {}
    for l in range(1, N // 2 + 1):
        for j in range(N - 2 * l + 1):
            lower[(j, 2 * l)] = tilde_f.get((j, 2 * l), E.jet(tilde_name(j, 2 * l)))
    return standard_leading(N, A, l3_sign) + canonical_operator(N, lower)


def enveloping_shift(N: int, A: Mapping[tuple[int, int, int], Expr], l3_sign: int = 1) -> dict[Key, Expr]:
    """psi[j,2l]: canonical lower coefficients of P_N, so that f[j,2l] = ft[j,2l] + psi[j,2l]."""
    form = anticommutator_form(standard_leading(N, A, l3_sign), N)
    return {k: v for k, v in form.items() if k[1] > 0}


def enveloping_determining(N: int, A: Mapping[tuple[int, int, int], Expr], V: Expr | None = None,
                           l3_sign: int = 1) -> DeterminingSystem:
    """Even-level commutator coefficients for X in enveloping form (symbolic ft)."""
    X = enveloping_form(N, A, None, l3_sign)
    M = extract_M_oracle(X, hamiltonian(), N)
    eqs = {k: v for k, v in M.items() if k in set(equation_indices(N))}
    system = DeterminingSystem(N, "quantum", eqs, form="enveloping")
    if V is not None:
        system = system.substitute({"V": V})
    return system
