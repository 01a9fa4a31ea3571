#!/usr/bin/env python3
"""Tests for restriction spaces and the restriction map."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from symplectic_restrictions.algebra import polynomial_ring
from symplectic_restrictions.catalog import load_family
from symplectic_restrictions.errors import BoundExhaustedError, GermError, PreconditionError
from symplectic_restrictions.forms import DiffForm, basis_form, exterior_d
from symplectic_restrictions.restriction import (
    AlgRestriction,
    build_space,
    closed_subspace,
    is_zero_restriction,
    restrict,
)


@pytest.mark.parametrize("family, dimension, closed, degrees", [
    ("u7", 8, 7, (7, 8, 9, 10, 11, 13, 14)),
    ("u8", 9, 8, (5, 6, 7, 7, 8, 9, 10, 11)),
    ("u9", 10, 9, (8, 10, 12, 11, 13, 14, 16, 17, 19)),
])
def test_catalog_spaces(request, family, dimension, closed, degrees):
    space = request.getfixturevalue(family).space
    assert space.dimension == dimension
    assert space.closed_dimension == closed
    assert space.closed_degrees == degrees
    assert len([b for b in space.basis if not b.closed]) == 1


class TestRestrict:
    """Coordinates of forms in the U7 basis."""

    def test_basis_forms_restrict_to_themselves(self, u7):
        space = u7.space
        for k, element in enumerate(space.basis):
            coordinates = restrict(space, element.form).coordinates
            assert coordinates == tuple(QQ.one if j == k else QQ.zero for j in range(space.dimension))

    def test_complement_element(self, u7):
        R = u7.germ.ring
        a = restrict(u7.space, basis_form(R, (1, 2), R.gens[0]))
        assert a.as_dict() == {"σ1": "1"}
        assert not a.is_closed

    def test_ideal_times_form_restricts_to_zero(self, u7):
        R = u7.germ.ring
        x1, x2, x3 = R.gens
        h = x1**2 + x2 * x3
        assert not any(restrict(u7.space, basis_form(R, (0, 1), h)).coordinates)
        assert not any(restrict(u7.space, exterior_d(basis_form(R, (2,), h))).coordinates)

    def test_relation_from_the_first_equation(self, u7):
        R = u7.germ.ring
        assert restrict(u7.space, basis_form(R, (1, 2), R.gens[2])).as_dict() == {"θ5": "-2"}

    def test_linear_combination(self, u7):
        R = u7.germ.ring
        omega = basis_form(R, (0, 2)).scale(2) + basis_form(R, (0, 1), R.gens[2]).scale(QQ(1, 3))
        a = restrict(u7.space, omega)
        assert a.coordinates[0] == 2

    def test_ambient_form_drops_extra_variables(self, u7):
        R5 = polynomial_ring(("x1", "x2", "x3", "x4", "x5"))
        x1, x2, x3, x4, x5 = R5.gens
        omega = basis_form(R5, (0, 2)) + basis_form(R5, (2, 3)) + basis_form(R5, (0, 1), x4)
        assert restrict(u7.space, omega).as_dict() == {"θ1": "1"}

    def test_only_two_forms(self, u7):
        R = u7.germ.ring
        with pytest.raises(PreconditionError):
            restrict(u7.space, basis_form(R, (0,)))

    def test_closed_coordinates_round_trip(self, u7):
        space = u7.space
        values = [1, 0, QQ(-1, 2), 0, 3, 0, 0]
        a = space.from_closed(values)
        assert a.closed_coordinates == tuple(QQ.convert(v) for v in values)
        assert restrict(space, space.closed_form(values)) == a

    def test_wrong_number_of_closed_coordinates(self, u7):
        with pytest.raises(PreconditionError):
            u7.space.from_closed([1, 2])


small_polynomials = st.lists(
    st.tuples(st.tuples(*[st.integers(min_value=0, max_value=2)] * 3), st.integers(min_value=-3, max_value=3)),
    max_size=4,
)
tiny_polynomials = st.lists(
    st.tuples(st.tuples(*[st.integers(min_value=0, max_value=1)] * 3), st.integers(min_value=-3, max_value=3)),
    max_size=3,
)
PAIRS = [(0, 1), (0, 2), (1, 2)]


def two_form(R, entries):
    omega = DiffForm(R, 2, {})
    for pair, terms in zip(PAIRS, entries):
        omega = omega + basis_form(R, pair, R({e: c for e, c in terms if c}))
    return omega


# U9 bases stay tiny so every component fits under the default degree bound.
FAMILY_BASES = [
    ("U7", small_polynomials),
    ("U8", small_polynomials),
    pytest.param("U9", tiny_polynomials, marks=pytest.mark.slow),
]


class TestProperties:
    """Linearity and independence of representatives."""

    @pytest.mark.parametrize("family, coefficients", FAMILY_BASES)
    @given(data=st.data())
    @settings(max_examples=100, deadline=None)
    def test_linear(self, family, coefficients, data):
        record = load_family(family)
        R = record.germ.ring
        a = two_form(R, data.draw(st.lists(coefficients, min_size=3, max_size=3)))
        b = two_form(R, data.draw(st.lists(coefficients, min_size=3, max_size=3)))
        factor = data.draw(st.fractions(max_denominator=4))
        combined = restrict(record.space, a.scale(factor) + b)
        assert combined == restrict(record.space, a).scale(factor) + restrict(record.space, b)

    @pytest.mark.parametrize("family, coefficients", FAMILY_BASES)
    @given(data=st.data())
    @settings(max_examples=100, deadline=None)
    def test_ideal_terms_do_not_change_the_class(self, family, coefficients, data):
        record = load_family(family)
        R = record.germ.ring
        f1, f2 = record.germ.equations
        omega = two_form(R, data.draw(st.lists(coefficients, min_size=3, max_size=3)))
        extra = two_form(R, data.draw(st.lists(tiny_polynomials, min_size=3, max_size=3)))
        g = R({e: c for e, c in data.draw(tiny_polynomials) if c})
        shifted = omega + extra.scale(f1) + exterior_d(basis_form(R, (0,), g * f2))
        assert restrict(record.space, shifted) == restrict(record.space, omega)


class TestBuildSpace:
    """Bases chosen by the engine and bound handling."""

    def test_default_basis_matches_catalog_dimensions(self, u7):
        space = build_space(u7.germ, u7.space.bound)
        assert space.dimension == u7.space.dimension
        assert space.closed_degrees == u7.space.closed_degrees
        assert [b.label for b in space.basis][-1] == "σ1"

    def test_bound_below_window(self, u7):
        with pytest.raises(BoundExhaustedError) as exc:
            build_space(u7.germ, 5)
        assert exc.value.exit_code == 3

    def test_non_closed_representative_is_rejected(self, u7):
        R = u7.germ.ring
        x1 = R.gens[0]
        representatives = [(b.label, b.form, b.closed) for b in u7.space.basis]
        representatives[-1] = ("σ1", basis_form(R, (1, 2), x1), True)
        with pytest.raises(GermError, match="closed"):
            build_space(u7.germ, u7.space.bound, representatives)

    def test_missing_representative_is_rejected(self, u7):
        representatives = [(b.label, b.form, b.closed) for b in u7.space.basis][:-1]
        with pytest.raises(GermError):
            build_space(u7.germ, u7.space.bound, representatives)


def test_restriction_value_is_frozen(u7):
    a = u7.space.zero()
    assert isinstance(a, AlgRestriction)
    assert a.as_dict() == {}
    assert is_zero_restriction(a)
    assert not is_zero_restriction(u7.space.from_closed([0, 0, 0, 0, 0, 0, 1]))


def test_closed_subspace(u7):
    assert [b.label for b in closed_subspace(u7.space)] == [f"θ{k}" for k in range(1, 8)]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
