import json

import pytest

from nthorder import expr as E
from nthorder import fixtures as F
from nthorder.classical import classical_determining

import helpers

EXPECTED = {
    "n2-system", "n3-third-derivs", "n3-classical-eqs", "n3-final-eq", "n4-f2-block", "n4-Q4-block",
    "n5-f2-block", "example1", "example1-classical", "example2-first", "example2-second", "example2-ode",
}


def test_registry_contents():
    names = F.fixture_names()
    assert set(names) >= EXPECTED
    assert len(names) == len(set(names))


def test_unknown_fixture():
    with pytest.raises(F.UnknownFixtureError) as info:
        F.get_fixture("nosuch")
    assert info.value.args[0] == "nosuch"


def test_empty_registry_is_an_error(monkeypatch):
    monkeypatch.setattr(F, "_REGISTRY", {})
    with pytest.raises(F.FixtureError, match="empty"):
        F.run_all()


def test_get_fixture_returns_a_copy():
    doc = F.get_fixture("n2-system")
    doc["checks"].clear()
    assert F.get_fixture("n2-system")["checks"]


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_fixture_passes(name):
    report = helpers.fixture_report(name)
    assert report.checks_pass, report.to_text()
    assert report.errata_confirmed, report.to_text()


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_errata_fragments_are_unique(name):
    doc = F.get_fixture(name)
    for item in doc["errata"]:
        parent, key = F._locate(doc, list(item["path"]))
        assert parent[key].count(item["corrected"]) == 1
        assert item["display"] != item["corrected"]


def test_display_document_reverts_every_erratum():
    doc = F.get_fixture("example1")
    shown = F.display_document(doc)
    assert shown["definitions"]["f02"] != doc["definitions"]["f02"]
    assert not all(c.passed for c in F._run_checks(shown))


def test_third_order_attempts_are_recorded():
    report = helpers.fixture_report("example2-first")
    attempts = [a for e in report.errata for a in e.attempts]
    assert {a["text"] for a in attempts} == {"8*hbar*omega^2*y^3*(2*omega*x^2+3*hbar)",
                                                 "8*hbar*omega^2*y^3*(2*omega*x^2-hbar)"}
    assert not any(a["passed"] for a in attempts)


def test_report_formats():
    report = helpers.fixture_report("example1")
    text = report.to_text()
    assert text.startswith("example1: PASS")
    assert "erratum definitions/f02" in text
    data = json.loads(report.to_json())
    assert data["passed"] and not data["display_verifies"]


def test_summary_counts():
    summary = F.Summary([helpers.fixture_report("n2-system"), helpers.fixture_report("n3-final-eq")])
    assert summary.passed
    assert summary.to_text().endswith("2/2 fixtures pass")


def test_flipped_bracket_sign_is_detected(monkeypatch):
    # flip the sign of the potential part of the bracket
    flipped = lambda ansatz, V=None: classical_determining(ansatz, -E.jet("V"))
    monkeypatch.setattr(F, "classical_determining", flipped)
    report = F.run_fixture("n3-classical-eqs")
    status = {c.id: c.passed for c in report.checks}
    assert not any(v for k, v in status.items() if k.startswith("classical"))
    assert all(v for k, v in status.items() if k.startswith("quantum"))
    assert all(c.residual != "0" for c in report.checks if c.id.startswith("classical"))


def test_malformed_check_is_reported():
    doc = {"name": "bad", "checks": [{"id": "z", "kind": "zero", "expr": "x +"}], "errata": []}
    report = F.run_document(doc)
    assert not report.passed
    assert report.checks[0].residual.startswith("error:")


def test_unknown_check_kind():
    report = F.run_document({"name": "bad", "checks": [{"kind": "nope"}]})
    assert not report.passed
    assert "unknown check kind" in report.checks[0].residual


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_every_coefficient_mutation_fails(name):
    doc = F.get_fixture(name)
    sites = helpers.mutation_sites(doc)
    assert sites
    for path, a, b in sites:
        mutated = helpers.affected_document(helpers.mutate(doc, path, a, b), path)
        assert not all(c.passed for c in F._run_checks(mutated)), (path, a)
