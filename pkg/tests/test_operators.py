import random

import pytest
from hypothesis import given, strategies as st

from nthorder import expr as E
from nthorder.expr import Expr
from nthorder.operators import (
    L3, MINUS_I_HBAR, P1, P2, QuantumOperator, angular_momentum, formal_adjoint, hamiltonian,
    momentum_power, op_anticommutator, op_commutator, op_mul, parse_operator,
)

import helpers

seeds = st.integers(0, 10 ** 6)


def scalar(e):
    return QuantumOperator.scalar(e)


def test_canonical_commutation():
    assert op_commutator(scalar(E.x), P1) == scalar(E.I * E.hbar)
    assert op_commutator(scalar(E.y), P2) == scalar(E.I * E.hbar)
    assert op_commutator(P1, P2).is_zero()


def test_normal_ordering_by_leibniz():
    # d_x . x = x d_x + 1
    D = QuantumOperator({(1, 0): E.ONE})
    assert op_mul(D, scalar(E.x)) == QuantumOperator({(1, 0): E.x, (0, 0): E.ONE})


def test_angular_momentum_algebra():
    assert op_commutator(L3, P1) == P2 * (E.I * E.hbar)
    assert angular_momentum(-1) == -L3
    assert op_commutator(hamiltonian(E.ZERO), L3).is_zero()


@given(seeds)
def test_associativity(seed):
    rng = random.Random(seed)
    A, B, C = (helpers.operator(rng, 1, 2) for _ in range(3))
    assert op_mul(op_mul(A, B), C) == op_mul(A, op_mul(B, C))


@given(seeds)
def test_adjoint_is_antimultiplicative_involution(seed):
    rng = random.Random(seed)
    A, B = helpers.operator(rng, 2, 2), helpers.operator(rng, 1, 2)
    assert formal_adjoint(formal_adjoint(A)) == A
    assert formal_adjoint(op_mul(A, B)) == op_mul(formal_adjoint(B), formal_adjoint(A))


def test_momenta_are_self_adjoint():
    for op in (P1, P2, L3, hamiltonian(E.x ** 2 * E.y)):
        assert formal_adjoint(op) == op


def test_momentum_power():
    assert momentum_power(2, 1) == op_mul(op_mul(P1, P1), P2)
    assert momentum_power(1, 0).terms == {(1, 0): MINUS_I_HBAR}


def test_parse_operator_braces_and_brackets():
    X = parse_operator("{x, p1} + [L3, p2]")
    want = op_anticommutator(scalar(E.x), P1) + op_commutator(L3, P2)
    assert X == want


def test_parse_operator_l3_sign():
    assert parse_operator("L3", l3_sign=-1) == angular_momentum(-1)


def test_json_round_trip():
    X = parse_operator("1/2*{x^2*y, p1*p2} + hbar^2/r")
    assert QuantumOperator.from_json(X.to_json()) == X


def test_negative_orders_rejected():
    with pytest.raises(ValueError):
        QuantumOperator.from_dict({"terms": [{"dx": -1, "dy": 0, "coeff": "1"}]})


def test_momentum_coefficients():
    X = op_mul(P1, P2) * Expr.const(3)
    assert X.momentum_coefficients() == {(1, 1): Expr.const(3)}
