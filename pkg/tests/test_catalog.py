#!/usr/bin/env python3
"""Tests for the built-in germ catalog, realizing forms and scenes."""

import json
import random

import pytest
from sympy.polys.domains import QQ

from symplectic_restrictions.algebra import INF
from symplectic_restrictions.catalog import (
    DATA_DIR,
    FAMILIES,
    build_scene,
    expected_tables,
    instantiate,
    instantiate_moduli,
    load_catalog,
    load_family,
    parameter_value,
    parse_family,
    realizing_form,
    scene_satisfies_equations,
)
from symplectic_restrictions.errors import GermError, PreconditionError, UnknownNameError
from symplectic_restrictions.forms import exterior_d
from symplectic_restrictions.restriction import restrict


class TestLoading:
    """Family records and their lookups."""

    def test_names_are_case_insensitive(self, u7):
        assert load_family("u7") is u7

    def test_catalog(self, u9):
        catalog = load_catalog()
        assert list(catalog) == ["U7", "U8", "U9"]
        assert catalog["U9"] is u9

    def test_unknown_family(self):
        with pytest.raises(UnknownNameError):
            load_family("U10")

    def test_unknown_class(self, u8):
        with pytest.raises(UnknownNameError):
            u8.find_class("9")

    @pytest.mark.parametrize("family, count, branches", [("u7", 8, 2), ("u8", 11, 3), ("u9", 12, 2)])
    def test_class_counts(self, request, family, count, branches):
        record = request.getfixturevalue(family)
        assert len(record.classes) == count
        assert len(record.germ.branches) == branches
        assert record.classes[-1].is_top

    def test_u8_classes_with_a_fixed_coefficient(self, u8):
        assert [c.index for c in u8.classes][:5] == ["0", "1", "3,0_5", "3,0_inf", "2"]
        assert u8.find_class("3,0_5").template.fixed == {3: QQ(-1, 3)}

    def test_every_field_is_tangent(self, u9):
        assert all(field is not None for field in u9.fields())

    def test_tampered_realizing_form_is_rejected(self):
        with open(DATA_DIR / "u7.json", encoding="utf-8") as handle:
            data = json.load(handle)
        data["classes"][0]["completion"] = []
        with pytest.raises(GermError, match="U7\\^0: realizing form is degenerate"):
            parse_family(data)

    def test_tampered_scene_is_rejected(self):
        with open(DATA_DIR / "u7.json", encoding="utf-8") as handle:
            data = json.load(handle)
        data["classes"][0]["scene"]["branches"][1][3] = "t^3"
        with pytest.raises(GermError, match="scene"):
            parse_family(data)


class TestParameters:
    """Substituting class parameters into polynomial text."""

    def test_parameter_value(self):
        assert parameter_value("c2 - 2*c1", {"c1": QQ(3), "c2": QQ(6)}) == 0
        assert parameter_value("3*c1 + 1", {"c1": QQ(-1, 3)}) == 0

    def test_instantiate(self):
        h = instantiate("c1*t^3 + s*t^4", ("t",), {"c1": QQ(1, 2), "s": -1})
        t = h.ring.gens[0]
        assert h == QQ(1, 2) * t**3 - t**4

    def test_moduli_avoid_exclusions(self, u8):
        record = u8.find_class("2")
        rng = random.Random(0)
        for _ in range(20):
            values = instantiate_moduli(record, rng)
            assert values["c1"] not in (QQ(2), QQ(-1, 3))

    def test_row_assignment(self, u8):
        record = u8.find_class("1")
        values = instantiate_moduli(record, random.Random(0), {"assign": {"c2": "2*c1"}})
        assert values["c2"] == 2 * values["c1"]

    def test_row_avoid(self, u7):
        record = u7.find_class("0")
        rng = random.Random(0)
        for _ in range(20):
            assert instantiate_moduli(record, rng, {"avoid": ["c1"]})["c1"] != 0


class TestRealizations:
    """Symplectic forms and scenes realizing each class."""

    def test_realizing_form(self, u7):
        omega = realizing_form("U7", "0", [1, 2])
        assert omega.ring.ngens == 4
        assert exterior_d(omega).is_zero()
        assert restrict(u7.space, omega).as_dict() == {"θ1": "1", "θ2": "1", "θ3": "2"}

    def test_signed_realizing_form(self, u7):
        omega = realizing_form("U7", "6", [], sign=-1)
        assert restrict(u7.space, omega).as_dict() == {"θ7": "-1"}

    def test_wrong_number_of_moduli(self):
        with pytest.raises(PreconditionError):
            realizing_form("U7", "0", [1])

    @pytest.mark.parametrize("family", FAMILIES)
    def test_scenes_satisfy_their_equations(self, family):
        record = load_family(family)
        rng = random.Random(5)
        for class_record in record.classes:
            values = instantiate_moduli(class_record, rng)
            for sign in ((1, -1) if class_record.signed else (1,)):
                realized = build_scene(family, class_record, values, sign)
                assert realized.name == f"{family}^{class_record.index}"
                assert scene_satisfies_equations(class_record, realized, values, sign)


def test_expected_tables():
    tables = expected_tables("U7")
    assert tables["dimension"] == 8
    assert tables["classes"]["7"]["ind"] == INF
    assert tables["classes"]["0"]["rows"][1]["assign"] == {"c1": "0"}
    assert tables["classes"]["5"]["rows"][0]["values"]["L2"] == INF


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
