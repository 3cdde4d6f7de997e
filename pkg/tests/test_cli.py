import json
from pathlib import Path

import pytest

from nthorder import cli
from nthorder.classical import classical_determining
from nthorder.system import DeterminingSystem, IntegralAnsatz

CASES = Path(__file__).resolve().parents[1] / "cases"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("N, text", [(3, "equations: 9, unknowns: 6"), (4, "equations: 12, unknowns: 9"),
                                     (5, "equations: 16, unknowns: 12")])
def test_count(capsys, N, text):
    code, out, _ = run(capsys, "count", "--order", str(N))
    assert code == 0 and out.strip() == text


def test_count_rejects_order_zero(capsys):
    code, _, err = run(capsys, "count", "--order", "0")
    assert code == 2 and "order" in err


def test_generate_quantum_second_order(capsys):
    code, out, _ = run(capsys, "generate", "--order", "2", "--mode", "quantum")
    assert code == 0
    labels = [l.split(":")[0] for l in out.splitlines() if l.startswith("M_")]
    assert labels[-2:] == ["M_{0,2}", "M_{1,2}"]


@pytest.mark.parametrize("N, count", [(1, 4), (3, 9)])
def test_generate_classical_counts(capsys, N, count):
    code, out, _ = run(capsys, "generate", "--order", str(N), "--mode", "classical")
    assert code == 0
    assert sum(l.startswith("M_") for l in out.splitlines()) == count


def test_generate_json_round_trip(capsys):
    code, out, _ = run(capsys, "generate", "--order", "3", "--mode", "classical", "--output", "json")
    assert code == 0
    assert DeterminingSystem.from_json(out) == classical_determining(IntegralAnsatz.symbolic(3))


def test_generate_is_deterministic(capsys):
    first = run(capsys, "generate", "--order", "3", "--output", "json", "--solved")
    second = run(capsys, "generate", "--order", "3", "--output", "json", "--solved")
    assert first == second


def test_generate_hbar_binding(capsys):
    code, out, _ = run(capsys, "generate", "--order", "4", "--output", "json", "--solved", "--hbar", "1")
    assert code == 0 and "hbar" not in out
    code, _, err = run(capsys, "generate", "--order", "4", "--hbar", "x")
    assert code == 2 and "rational" in err


def test_generate_enveloping(capsys):
    code, out, _ = run(capsys, "generate", "--order", "3", "--form", "enveloping")
    assert code == 0 and r"\tilde{M}" in out
    code, _, _ = run(capsys, "generate", "--order", "3", "--form", "enveloping", "--mode", "classical")
    assert code == 2


def test_generate_rejects_order_zero(capsys):
    assert run(capsys, "generate", "--order", "0")[0] == 2


@pytest.mark.parametrize("name, code", [("example1.json", 0), ("example1-perturbed.json", 1),
                                        ("invalid-order.json", 2), ("missing.json", 2)])
def test_verify_exit_codes(capsys, name, code):
    got, out, err = run(capsys, "verify", str(CASES / name))
    assert got == code
    if code == 1:
        assert "M[" in out
    if code == 2:
        assert err.startswith("error:")


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", str(CASES / "example1.json"), "--json")
    assert code == 0 and json.loads(out)["passed"] is True


def test_fixtures_list(capsys):
    code, out, _ = run(capsys, "fixtures", "--list")
    assert code == 0 and len(out.split()) >= 12


def test_fixtures_run(capsys):
    code, out, _ = run(capsys, "fixtures", "--run", "example2-ode")
    assert code == 0 and "example2-ode: PASS" in out
    code, _, err = run(capsys, "fixtures", "--run", "nosuch")
    assert code == 2 and "nosuch" in err


def test_fixtures_run_json(capsys):
    code, out, _ = run(capsys, "fixtures", "--run", "n2-system", "--json")
    data = json.loads(out)
    assert code == 0 and data["failed"] == 0 and data["fixtures"][0]["passed"] is True
