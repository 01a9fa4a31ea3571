#!/usr/bin/env python3
"""Tests for the command-line interface."""

import json

import pytest

from symplectic_restrictions.catalog import DATA_DIR
from symplectic_restrictions.cli import main
from symplectic_restrictions.database import get_db_manager


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBasis:
    """basis and action-table commands."""

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "basis", "--germ", "U7")
        assert code == 0
        report = json.loads(out)
        assert report["command"]["name"] == "basis"
        assert report["results"]["dimension"] == 8
        assert report["results"]["closed_degrees"] == [7, 8, 9, 10, 11, 13, 14]
        assert report["bounds"]["degree_bound"] > 0

    def test_markdown_report(self, capsys):
        code, out, _ = run(capsys, "basis", "--germ", "u7", "--format", "md")
        assert code == 0
        assert "## U7: [Λ²] dimension 8" in out

    def test_bound_too_small(self, capsys):
        code, out, err = run(capsys, "basis", "--germ", "U7", "--degree-bound", "5")
        assert code == 3
        assert out == ""
        assert err.startswith("error:")

    def test_unknown_germ(self, capsys):
        code, _, err = run(capsys, "basis", "--germ", "E8")
        assert code == 2
        assert "unknown germ" in err

    def test_action_table(self, capsys):
        code, out, _ = run(capsys, "action-table", "--germ", "U7")
        assert code == 0
        results = json.loads(out)["results"]
        assert results["fields"][0] == {"row": "X0", "label": "E", "degree": 0}
        assert results["table"]["E"]["θ1"] == {"θ1": "7"}

    def test_record_stores_the_report(self, capsys):
        code, _, _ = run(capsys, "basis", "--germ", "U8", "--record")
        assert code == 0
        stored = get_db_manager().list_reports("basis")
        assert stored
        assert stored[0]["report"]["results"]["germ"] == "U8"


class TestClassify:
    """classify command."""

    def test_normal_form(self, capsys):
        code, out, _ = run(capsys, "classify", "--germ", "U7", "--coeffs", "1,2,3,0,0,0,0")
        assert code == 0
        results = json.loads(out)["results"]
        assert results["class"]["index"] == "0"
        assert results["normal_form"] == {"θ1": "1", "θ2": "2", "θ3": "3"}
        assert results["cod"] == 0

    def test_rational_coefficients(self, capsys):
        code, out, _ = run(capsys, "classify", "--germ", "U7", "--coeffs", "0,0,1/2,0,0,0,0")
        assert code == 0
        assert json.loads(out)["command"]["coeffs"][2] == "1/2"

    def test_wrong_number_of_coefficients(self, capsys):
        code, out, err = run(capsys, "classify", "--germ", "U7", "--coeffs", "1,2")
        assert code == 2
        assert out == ""
        assert "error:" in err

    def test_float_is_rejected(self, capsys):
        code, _, _ = run(capsys, "classify", "--germ", "U7", "--coeffs", "0.5,0,0,0,0,0,0")
        assert code == 2


class TestInvariants:
    """invariants command for classes and scenes."""

    def test_signed_class(self, capsys):
        code, out, _ = run(capsys, "invariants", "--germ", "U7", "--class", "3", "--moduli", "2", "--sign", "-1")
        assert code == 0
        results = json.loads(out)["results"]
        assert results["sign"] == "-"
        assert results["moduli"] == {"c": "2"}
        invariants = results["invariants"]
        assert (invariants["ind"], invariants["Lt"], invariants["cod"], invariants["mu"]) == (1, 7, 3, 4)
        assert invariants["subsets"] == {"L2": 7}

    def test_extended_column_is_marked(self, capsys):
        code, out, _ = run(capsys, "invariants", "--germ", "U8", "--class", "8")
        assert code == 0
        assert "ind2: artifact-extended" in json.loads(out)["notes"]

    def test_class_is_required(self, capsys):
        code, _, err = run(capsys, "invariants", "--germ", "U7")
        assert code == 2
        assert "--class" in err

    def test_unsigned_class_rejects_sign(self, capsys):
        code, _, _ = run(capsys, "invariants", "--germ", "U7", "--class", "0", "--sign", "-1")
        assert code == 2

    def test_scene_file(self, capsys, tmp_path):
        path = tmp_path / "cusp.json"
        path.write_text(json.dumps({"name": "cusp", "n": 1, "branches": [["t^2", "t^3"]]}), encoding="utf-8")
        code, out, _ = run(capsys, "invariants", "--scene", str(path))
        assert code == 0
        results = json.loads(out)["results"]
        assert results["Lt"] == 3
        assert results["geometry"] is None
        assert any(note.startswith("geometry:") for note in json.loads(out)["notes"])

    def test_invalid_scene_file(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        code, _, err = run(capsys, "invariants", "--scene", str(path))
        assert code == 2
        assert "not valid JSON" in err


class TestVerify:
    """verify command with replacement tables."""

    def test_mismatch_exit_code(self, capsys, tmp_path):
        with open(DATA_DIR / "u7.json", encoding="utf-8") as handle:
            data = json.load(handle)
        top = data["classes"][-1]
        top["expected"]["cod"] = 99
        data["classes"] = [top]
        (tmp_path / "u7.json").write_text(json.dumps(data), encoding="utf-8")
        code, out, _ = run(capsys, "verify", "--family", "U7", "--golden", str(tmp_path))
        assert code == 1
        assert [f["cell"] for f in json.loads(out)["results"]["failures"]] == ["class/7/cod"]

    def test_golden_germ_is_checked(self, capsys, tmp_path):
        with open(DATA_DIR / "u7.json", encoding="utf-8") as handle:
            data = json.load(handle)
        data["equations"][0] = "x1^2 + 2*x2*x3"
        data["classes"] = data["classes"][-1:]
        (tmp_path / "u7.json").write_text(json.dumps(data), encoding="utf-8")
        code, out, _ = run(capsys, "verify", "--family", "U7", "--golden", str(tmp_path))
        assert code == 1
        failed = [f["cell"] for f in json.loads(out)["results"]["failures"]]
        assert failed == ["germ/equation/0", "germ/equation/0/vanishes"]

    def test_degree_bound_is_used(self, capsys):
        code, out, err = run(capsys, "verify", "--family", "U7", "--degree-bound", "5")
        assert code == 3
        assert out == ""
        assert "degree bound 5" in err


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
