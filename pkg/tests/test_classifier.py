#!/usr/bin/env python3
"""Tests for infinitesimal actions and normal-form reduction."""

import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from symplectic_restrictions.catalog import instantiate_moduli, moduli_vector
from symplectic_restrictions.classifier import (
    CANONICALIZATION_NOTE,
    IRRATIONAL_ROOT_NOTE,
    action_columns,
    action_matrix,
    action_table,
    class_codimension,
    find_template,
    orbit_tangent_span,
    random_orbit_point,
    reduce,
    symmetry_group,
    tangent_fields,
)
from symplectic_restrictions.errors import NotClosedError, NotTangentError, PreconditionError
from symplectic_restrictions.forms import VectorField, basis_form
from symplectic_restrictions.germ import TangentField
from symplectic_restrictions.restriction import AlgRestriction, restrict


def nonzero_entries(table: dict) -> dict:
    return {
        field: {theta: image for theta, image in row.items() if image}
        for field, row in table.items()
        if any(row.values())
    }


class TestActionTable:
    """Lie derivatives of the closed basis along g·E."""

    @pytest.mark.parametrize("family", ["u7", "u8", "u9"])
    def test_matches_catalog(self, request, family):
        record = request.getfixturevalue(family)
        table = action_table(record.space, record.fields())
        assert nonzero_entries(table.as_dict()) == record.expected["action_table"]

    @pytest.mark.parametrize("family", ["u7", "u8", "u9"])
    def test_euler_row_is_diagonal(self, request, family):
        space = request.getfixturevalue(family).space
        table = action_table(space)
        for k, degree in zip(space.closed_indices, space.closed_degrees):
            label = space.basis[k].label
            assert table.entry("E", label) == {label: str(degree)}

    def test_u9_x2_row(self, u9):
        R = u9.germ.ring
        x2 = R.gens[1]
        assert restrict(u9.space, basis_form(R, (0, 1), x2)).as_dict() == {"θ9": "-8"}
        table = action_table(u9.space, u9.fields())
        assert table.entry("x2*E", "θ3") == {"θ9": "-152"}
        assert table.entry("x3^3*E", "θ2") == {"θ9": "-38"}

    def test_fields_raise_degree(self, u7):
        space = u7.space
        degrees = dict(zip((space.basis[k].label for k in space.closed_indices), space.closed_degrees))
        table = action_table(space).as_dict()
        for field in tangent_fields(space):
            for source, image in table[field.label].items():
                for target in image:
                    assert degrees[target] == degrees[source] + field.degree

    def test_action_matrix_of_euler(self, u7):
        euler = u7.fields()[0]
        images = action_matrix(u7.space, euler)
        assert images["θ1"].as_dict() == {"θ1": "7"}
        assert images["θ7"].as_dict() == {"θ7": "14"}

    def test_non_tangent_field_is_rejected(self, u7):
        R = u7.germ.ring
        field = TangentField(VectorField(R, [R.zero, R.zero, R.one]), (0, 0, 0), 0, "d/dx3")
        with pytest.raises(NotTangentError):
            action_columns(u7.space, field)


class TestReduce:
    """Reduction of U7 restrictions."""

    def test_normal_form_is_kept(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([1, 2, 3, 0, 0, 0, 0]), u7.templates)
        assert reduction.label.index == "0"
        assert reduction.label.as_dict()["moduli"] == ["2", "3"]
        assert reduction.normal_form.as_dict() == {"θ1": "1", "θ2": "2", "θ3": "3"}
        assert CANONICALIZATION_NOTE in reduction.trace.notes

    def test_higher_terms_are_removed(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([1, 2, 3, 5, -1, 4, 7]), u7.templates)
        assert reduction.normal_form.as_dict() == {"θ1": "1", "θ2": "2", "θ3": "3"}
        assert [step.kind for step in reduction.trace.steps if step.kind == "flow"]

    def test_scaling(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([128, 0, 0, 0, 0, 0, 0]), u7.templates)
        assert reduction.normal_form.as_dict() == {"θ1": "1"}
        assert [step.kind for step in reduction.trace.steps] == ["scale"]

    def test_irrational_scaling_root(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([2, 0, 0, 0, 0, 0, 0]), u7.templates)
        assert reduction.normal_form.as_dict() == {"θ1": "2"}
        assert IRRATIONAL_ROOT_NOTE in reduction.trace.notes

    def test_irrational_root_frames(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([2, 3, 0, 0, 0, 0, 0]), u7.templates)
        assert reduction.label.index == "0"
        assert reduction.normal_form.as_dict()["θ1"] == "2"
        assert reduction.normal_form.as_dict()["θ2"] in ("3", "-3")
        d1, d2 = space.closed_degrees[:2]
        modulus = reduction.label.moduli[0]
        assert abs(modulus) == 3 * sympy.Integer(2) ** sympy.Rational(-d2, d1)

    def test_sign_that_cannot_be_removed(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([0, -1, 0, 0, 0, 0, 0]), u7.templates)
        assert reduction.label.index == "1"
        assert reduction.label.as_dict()["sign"] == "-"
        assert reduction.normal_form.as_dict() == {"θ2": "-1"}

    def test_sign_that_can_be_removed(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([-1, 0, 0, 0, 0, 0, 0]), u7.templates)
        assert reduction.normal_form.as_dict() == {"θ1": "1"}
        assert reduction.label.sign is None
        assert "sign" in [step.kind for step in reduction.trace.steps]

    def test_zero_is_the_top_class(self, u7):
        space = u7.space
        reduction = reduce(space, space.zero(), u7.templates)
        assert reduction.label.index == "7"
        assert reduction.trace.steps == []

    def test_trace_replays(self, u7):
        space = u7.space
        start = [3, 1, 0, 2, 0, 1, 0]
        reduction = reduce(space, space.from_closed(start), u7.templates)
        assert reduction.trace.replay(space, start) == list(reduction.normal_form.closed_coordinates)

    def test_without_templates(self, u7):
        space = u7.space
        reduction = reduce(space, space.from_closed([1, 2, 3, 4, 5, 6, 7]))
        assert reduction.label.index == "lead θ1"
        assert reduction.normal_form.as_dict() == {"θ1": "1", "θ2": "2", "θ3": "3"}

    def test_needs_closed_restriction(self, u7):
        space = u7.space
        coordinates = tuple(QQ.one if k == space.dimension - 1 else QQ.zero for k in range(space.dimension))
        with pytest.raises(NotClosedError):
            reduce(space, AlgRestriction(space, coordinates), u7.templates)

    def test_unknown_template(self, u7):
        with pytest.raises(PreconditionError):
            find_template(u7.templates, "42")

    @given(st.lists(st.integers(min_value=-3, max_value=3), min_size=7, max_size=7))
    @settings(max_examples=25, deadline=None)
    def test_reduction_is_idempotent(self, u7, coefficients):
        space = u7.space
        first = reduce(space, space.from_closed(coefficients), u7.templates)
        expected = next(t for t in u7.templates if t.matches(first.normal_form.closed_coordinates))
        assert first.label.index == expected.index
        again = reduce(space, first.normal_form, u7.templates)
        assert again.normal_form == first.normal_form
        assert again.label.index == first.label.index

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_orbit_points_keep_their_class(self, u7, seed):
        space = u7.space
        rng = random.Random(seed)
        for record in u7.classes:
            coordinates = record.template.normal_form(space.closed_dimension, [QQ(k + 2) for k in range(len(record.template.moduli))])
            point = random_orbit_point(space, coordinates, rng)
            assert reduce(space, space.from_closed(point), u7.templates).label.index == record.index


class TestInvariantsOfTheAction:
    """Orbit dimensions, codimensions and the symmetry group."""

    def test_symmetry_group(self, u7):
        assert symmetry_group(u7.space) == [(1, 1, 1), (1, -1, -1)]

    def test_orbit_of_zero(self, u7):
        assert orbit_tangent_span(u7.space, u7.space.zero()).rank == 0

    @pytest.mark.parametrize("family", ["u7", "u8", "u9"])
    def test_codimensions(self, request, family):
        record = request.getfixturevalue(family)
        rng = random.Random(7)
        for class_record in record.classes:
            moduli = moduli_vector(class_record, instantiate_moduli(class_record, rng))
            assert class_codimension(record.space, class_record.template, moduli) == class_record.expected["cod"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
