import random

import pytest
from hypothesis import given, strategies as st

from nthorder import expr as E
from nthorder.expr import Expr
from nthorder.operators import L3, P2, QuantumOperator, formal_adjoint, hamiltonian, op_anticommutator
from nthorder.quantum import (
    NotSelfAdjointError, OracleDivisionError, SchemeError, SymmetrizationScheme, anticommutator_form,
    ansatz_operator, canonical_operator, enveloping_determining, enveloping_shift, even_part, extract_M_oracle,
    general_symmetrization, half_anticommutator, hermitian_split, quantum_correction, quantum_determining,
    rewrite_to_canonical, standard_leading,
)
from nthorder.system import IntegralAnsatz, symbolic_A

import helpers

seeds = st.integers(0, 10 ** 6)
HALF = Expr.const(E.mpq(1, 2))


def test_half_anticommutator_is_self_adjoint():
    op = half_anticommutator(E.x ** 2 * E.y, 1, 2)
    assert formal_adjoint(op) == op


@given(seeds, st.integers(1, 4))
def test_anticommutator_form_round_trip(seed, N):
    rng = random.Random(seed)
    f = helpers.canonical_coeffs(rng, N, range(N + 1), 2)
    X = canonical_operator(N, f)
    back = anticommutator_form(X, N)
    assert canonical_operator(N, back) == X
    assert {k: v for k, v in f.items() if not v.is_zero()} == back


def test_non_self_adjoint_rejected():
    op = QuantumOperator({(1, 0): E.x})
    with pytest.raises(NotSelfAdjointError):
        anticommutator_form(op)
    sa, skew = hermitian_split(op)
    assert formal_adjoint(sa) == sa and formal_adjoint(skew) == -skew


@pytest.mark.parametrize("N", [1, 2, 3])
def test_closed_form_matches_commutator(N):
    ansatz = IntegralAnsatz.symbolic(N)
    M = extract_M_oracle(ansatz_operator(ansatz), hamiltonian(), N)
    system = quantum_determining(ansatz)
    assert set(system.equations) == set(even_part(M))
    assert all((M[k] - v).is_zero() for k, v in system)


@pytest.mark.parametrize("N", [2, 3])
def test_no_second_level_corrections_for_low_orders(N):
    ansatz = IntegralAnsatz.symbolic(N, True)
    for j in range(N - 1):
        assert quantum_correction(N, j, 1, ansatz.coefficient).is_zero()


def test_fourth_order_second_level_corrections_present():
    ansatz = IntegralAnsatz.symbolic(4, True)
    assert not quantum_correction(4, 0, 1, ansatz.coefficient).is_zero()


def test_oracle_rejects_orders_above_bound():
    with pytest.raises(OracleDivisionError):
        extract_M_oracle(canonical_operator(3, {(3, 0): E.x}), hamiltonian(), 1)


def test_rewrite_to_canonical_separates_hbar():
    # {L3^2, p2}/2 has hbar^2 lower-order terms
    S = op_anticommutator(L3 * L3, P2) * HALF
    f, g = rewrite_to_canonical(S, 3)
    for key, val in f.items():
        assert val.free_of(E.VHBAR)
    back = canonical_operator(3, f) - canonical_operator(3, g) * (E.hbar * E.hbar)
    assert back == S
    assert g


def test_scheme_weights_must_sum_to_half():
    scheme = SymmetrizationScheme({(0, 0): Expr.const(1)})
    with pytest.raises(SchemeError):
        general_symmetrization(E.x, 1, 1, scheme)
    bad = SymmetrizationScheme({(3, 3): HALF})
    with pytest.raises(SchemeError):
        general_symmetrization(E.x, 1, 1, bad)


def test_trivial_scheme_is_canonical():
    scheme = SymmetrizationScheme({(0, 0): HALF})
    assert general_symmetrization(E.x * E.y, 2, 1, scheme) == half_anticommutator(E.x * E.y, 2, 1)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_enveloping_form_hbar_degree(N):
    system = enveloping_determining(N, symbolic_A(N))
    for (j, k), e in system:
        if k == 0:
            assert e.is_zero()
        assert max(e.hbar_coefficients() or [0]) <= max(k - 2, 0)


def test_fourth_order_shift_leaves_a_quadratic_in_x():
    A = symbolic_A(4)
    psi = enveloping_shift(4, A)[(0, 2)]
    a = lambda k, m, n: A[(k, m, n)]
    rest = psi - E.hbar ** 2 * (3 * E.y ** 2 * a(4, 0, 0) - HALF * 3 * a(3, 1, 0) * E.y)
    assert rest.free_of(E.VY)
    assert E.diff_n(rest, 3, 0).is_zero()


def test_standard_leading_is_self_adjoint_and_classical_at_top():
    P = standard_leading(3, symbolic_A(3))
    assert formal_adjoint(P) == P
    top = {k: v for k, v in P.momentum_coefficients().items() if sum(k) == 3}
    from nthorder.classical import solve_leading
    lead = solve_leading(3, symbolic_A(3))
    assert all((top.get((j, 3 - j), E.ZERO) - lead[j]).is_zero() for j in range(4))
