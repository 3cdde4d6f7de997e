from nthorder import expr as E
from nthorder.classical import classical_determining
from nthorder.expr import Expr
from nthorder.latex import expr_latex, graded_latex, operator_latex, system_latex
from nthorder.operators import QuantumOperator, parse_operator
from nthorder.quantum import quantum_determining
from nthorder.system import IntegralAnsatz


def test_rational_coefficients_and_names():
    e = Expr.const(E.mpq(3, 2)) * E.param("A[3,1,0]") * E.x - E.param("alpha2")
    assert expr_latex(e) == r"\frac{3}{2} x A_{310} - \alpha_{2}"


def test_jets():
    assert expr_latex(E.jet("V", 2, 1)) == "V_{xxy}"
    assert expr_latex(E.jet("f[0,2]", 0, 1)) == r"(\partial_y f_{0,2})"


def test_graded_puts_hbar_last():
    e = E.x - E.hbar ** 2 * (E.y + 1)
    text = graded_latex(e)
    assert text.startswith("x")
    assert r"\hbar^{2}" in text


def test_system_block():
    text = system_latex(quantum_determining(IntegralAnsatz.symbolic(2)))
    lines = text.splitlines()
    assert lines[0] == "% order 2, quantum, canonical form, 6 equations"
    assert lines[1] == r"\begin{align*}" and lines[-1] == r"\end{align*}"
    assert sum("M_{" in l for l in lines) == 6


def test_system_output_is_deterministic():
    a = system_latex(classical_determining(IntegralAnsatz.symbolic(3)))
    b = system_latex(classical_determining(IntegralAnsatz.symbolic(3)))
    assert a == b


def test_operator_forms():
    X = parse_operator("1/2*{x, p1}")
    assert operator_latex(X) == r"\frac12\left\{x,\, \hat{p}_1\right\}"
    Y = QuantumOperator({(1, 0): E.x})
    assert r"\partial_x" in operator_latex(Y)
    assert operator_latex(QuantumOperator()) == "0"
