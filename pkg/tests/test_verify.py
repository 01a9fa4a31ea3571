#!/usr/bin/env python3
"""Tests for recomputing the stored tables."""

import pytest

from symplectic_restrictions.catalog import FAMILIES, expected_tables, load_family
from symplectic_restrictions.errors import BoundExhaustedError, UnknownNameError
from symplectic_restrictions.verify import CellResult, VerifyResult, class_cells, germ_cells, run_verify


def top_class_only(family: str, top: str, **changes) -> dict:
    tables = expected_tables(family)
    entry = dict(tables["classes"][top], **changes)
    tables["classes"] = {top: entry}
    return tables


class TestResults:
    """Result bookkeeping."""

    def test_cell_result(self):
        cell = CellResult("U7", ("class", "3", "mu"), 4, 5)
        assert not cell.passed
        assert cell.as_dict() == {"family": "U7", "cell": "class/3/mu", "expected": 4, "actual": 5}

    def test_summary_counts_per_family(self):
        result = VerifyResult(1, [
            CellResult("U7", ("a",), 1, 1),
            CellResult("U7", ("b",), 1, 2),
            CellResult("U8", ("a",), "inf", "inf"),
        ])
        summary = result.as_dict()
        assert summary["passed"] is False
        assert summary["families"] == {"U7": {"cells": 2, "failed": 1}, "U8": {"cells": 1, "failed": 0}}
        assert len(summary["failures"]) == 1


class TestRun:
    """Runs against replaced golden tables."""

    def test_top_class_passes(self):
        result = run_verify("U7", seed=3, workers=2, golden={"U7": top_class_only("U7", "7")})
        assert result.passed, [cell.as_dict() for cell in result.failures]
        assert any(cell.cell == ("class", "7", "classify") for cell in result.cells)

    def test_mismatch_is_reported(self):
        result = run_verify("U7", seed=3, golden={"U7": top_class_only("U7", "7", cod=99)})
        assert [cell.cell for cell in result.failures] == [("class", "7", "cod")]
        assert result.failures[0].actual == 7

    def test_same_seed_same_cells(self):
        golden = {"U7": top_class_only("U7", "7")}
        first = run_verify("U7", seed=9, workers=1, golden=golden)
        second = run_verify("U7", seed=9, workers=4, golden=golden)
        assert first.as_dict() == second.as_dict()

    def test_unknown_family(self):
        with pytest.raises(UnknownNameError):
            run_verify("E6")

    def test_bound_reaches_the_family_load(self):
        with pytest.raises(BoundExhaustedError):
            run_verify("U7", golden={"U7": top_class_only("U7", "7")}, bound=5)


class TestGermCells:
    """Cross-checks of a golden file's germ against the loaded record."""

    def test_shipped_germ_passes(self):
        cells = germ_cells(load_family("U7"), expected_tables("U7"))
        assert all(cell.passed for cell in cells), [cell.as_dict() for cell in cells if not cell.passed]
        names = {"/".join(cell.cell) for cell in cells}
        assert {"germ/weights", "germ/equation/0", "germ/equation/1/vanishes", "germ/branch/1"} <= names

    def test_corrupted_equation_and_table_value(self):
        tables = top_class_only("U7", "7", cod=99)
        tables["germ"]["equations"][0] = "x1^2 + 2*x2*x3"
        result = run_verify("U7", seed=3, golden={"U7": tables})
        failed = {cell["cell"] for cell in result.as_dict()["failures"]}
        assert failed == {"germ/equation/0", "germ/equation/0/vanishes", "class/7/cod"}

    def test_wrong_weights_and_branch(self):
        tables = expected_tables("U8")
        tables["germ"]["weights"] = [3, 4, 1]
        tables["germ"]["branches"][2] = ["t^3", "t^4", "t^2"]
        failed = {"/".join(cell.cell) for cell in germ_cells(load_family("U8"), tables) if not cell.passed}
        assert failed == {"germ/weights", "germ/branch/2"}

    def test_unparsable_equation_fails_its_cells(self):
        tables = expected_tables("U7")
        tables["germ"]["equations"][1] = "x1*x2 +"
        cells = {"/".join(cell.cell): cell for cell in germ_cells(load_family("U7"), tables)}
        assert cells["germ/equation/1"].expected.startswith("error:")
        assert not cells["germ/equation/1/vanishes"].passed


class TestModuliSamples:
    """Classes with moduli are checked at several seeded samples."""

    @pytest.mark.parametrize("family, index", [("U8", "3,1"), ("U9", "4,1")])
    def test_samples_pass(self, family, index):
        record = load_family(family)
        expected = dict(expected_tables(family)["classes"][index], rows=())
        cells = class_cells(record, record.find_class(index), expected, seed=5, samples=3)
        assert all(cell.passed for cell in cells), [cell.as_dict() for cell in cells if not cell.passed]
        assert ("class", index, "sample3", "classify") in [cell.cell for cell in cells]
        assert not any("sample4" in cell.cell for cell in cells)

    def test_class_without_moduli_is_checked_once(self):
        record = load_family("U7")
        expected = dict(expected_tables("U7")["classes"]["7"], rows=())
        cells = class_cells(record, record.find_class("7"), expected, seed=5, samples=4)
        assert [cell.cell[-1] for cell in cells if len(cell.cell) == 3] == ["cod", "mu", "ind", "classify", "idempotent"]
        assert not any(len(cell.cell) == 4 for cell in cells)


@pytest.mark.slow
@pytest.mark.parametrize("family", FAMILIES)
def test_family_tables(family):
    result = run_verify(family)
    assert result.passed, [cell.as_dict() for cell in result.failures]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
