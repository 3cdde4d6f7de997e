import json
from pathlib import Path

import pytest

from nthorder.verify import EXIT_FAIL, EXIT_OK, CaseError, verify_case, verify_path

CASES = Path(__file__).resolve().parents[1] / "cases"


def test_example_case_passes():
    report = verify_path(CASES / "example1.json")
    assert report.passed and report.exit_code == EXIT_OK
    assert report.checked == 9


def test_classical_case_passes():
    assert verify_path(CASES / "example1-classical.json").passed


def test_perturbed_case_fails_with_residuals():
    report = verify_path(CASES / "example1-perturbed.json")
    assert report.exit_code == EXIT_FAIL
    assert report.residuals
    assert "FAIL" in report.to_text()


def test_zero_order_rejected():
    with pytest.raises(CaseError, match="N"):
        verify_path(CASES / "invalid-order.json")


def test_operator_text_route():
    doc = {"mode": "quantum", "potential": "a/r", "integral": {"operator": "L3"}}
    assert verify_case(doc).passed
    doc["integral"] = {"operator": "p1"}
    assert not verify_case(doc).passed


def test_terms_route_classical():
    doc = {"mode": "classical", "potential": "x^2 + y^2",
           "integral": {"terms": [{"p1": 2, "p2": 0, "coeff": "1"}, {"p1": 0, "p2": 0, "coeff": "x^2"}]}}
    assert verify_case(doc).passed


@pytest.mark.parametrize("doc, match", [
    ({"mode": "semi", "potential": "x", "integral": {}}, "mode"),
    ({"mode": "quantum", "potential": 3, "integral": {}}, "potential"),
    ({"mode": "quantum", "potential": "x", "integral": {}}, "integral"),
    ({"mode": "quantum", "potential": "x", "l3_sign": 2, "integral": {"operator": "L3"}}, "l3_sign"),
    ({"mode": "quantum", "potential": "x", "integral": {"ansatz": {"N": 2, "f": {"0,0": "x"}}}}, "f\\[j,0\\]"),
    ({"mode": "quantum", "potential": "x", "integral": {"ansatz": {"N": 2, "A": {"1,1": "1"}}}}, "3 entries"),
    ({"mode": "classical", "potential": "x", "integral": {"terms": [{"p1": -1, "p2": 0, "coeff": "1"}]}},
     "negative"),
])
def test_malformed_documents(doc, match):
    with pytest.raises(CaseError, match=match):
        verify_case(doc)


def test_parse_errors_point_at_column():
    doc = {"mode": "quantum", "potential": "a/r +* x", "integral": {"operator": "L3"}}
    with pytest.raises(CaseError) as info:
        verify_case(doc)
    lines = str(info.value).splitlines()
    assert lines[-2].strip() == "a/r +* x"
    assert lines[-1].endswith("^")


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(CaseError, match="invalid JSON"):
        verify_path(path)


def test_report_dict(tmp_path):
    report = verify_path(CASES / "example1-perturbed.json")
    data = report.to_dict()
    json.dumps(data)
    assert data["passed"] is False and data["residuals"]
