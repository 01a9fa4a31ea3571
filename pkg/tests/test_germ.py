#!/usr/bin/env python3
"""Tests for curve germs, their load checks and the graded vanishing ideal."""

import pytest

from symplectic_restrictions.algebra import INF, series_ring
from symplectic_restrictions.catalog import build_germ
from symplectic_restrictions.errors import GermError
from symplectic_restrictions.forms import VectorField
from symplectic_restrictions.germ import (
    apply_sign,
    euler_tangent_fields,
    ideal_piece,
    is_tangent,
    make_branch,
    t_order,
    vanishes_on_germ,
    verify_branch,
)

U7 = dict(
    variables=["x1", "x2", "x3"],
    weights=[4, 5, 3],
    equations=["x1^2 + x2*x3", "x1*x2 + x3^3"],
    branches=[["0", "t", "0"], ["t^4", "-t^5", "t^3"]],
)


def u7_germ(**changes):
    return build_germ("U7", **dict(U7, **changes))


class TestLoadChecks:
    """A germ is rejected as soon as an identity fails."""

    def test_valid_germ(self):
        germ = u7_germ(symmetries=[[1, -1, -1]])
        assert germ.dimension == 3
        assert len(germ.branches) == 2
        assert germ.singular_branch_indices() == [1]

    def test_branch_off_the_curve(self):
        with pytest.raises(GermError, match="branch B2"):
            u7_germ(branches=[["0", "t", "0"], ["t^4", "t^5", "t^3"]])

    def test_branch_not_through_origin(self):
        with pytest.raises(GermError, match="origin"):
            u7_germ(branches=[["0", "1 + t", "0"]])

    def test_repeated_branch(self):
        with pytest.raises(GermError, match="coincide"):
            u7_germ(branches=[["0", "t", "0"], ["0", "t", "0"]])

    def test_verify_branch(self):
        germ = u7_germ()
        t = series_ring().gens[0]
        assert all(verify_branch(germ, branch) for branch in germ.branches)
        assert not verify_branch(germ, make_branch("B3", germ.ring, [t**4, t**5, t**3]))

    def test_equation_not_quasi_homogeneous(self):
        with pytest.raises(GermError, match="quasi-homogeneous"):
            u7_germ(equations=["x1^2 + x2"])

    def test_symmetry_must_preserve_equations(self):
        with pytest.raises(GermError, match="symmetry"):
            u7_germ(symmetries=[[1, 1, -1]])

    def test_weights_must_be_positive(self):
        with pytest.raises(GermError, match="weights"):
            u7_germ(weights=[4, 0, 3])

    def test_wrong_branch_length(self):
        with pytest.raises(GermError, match="coordinates"):
            u7_germ(branches=[["0", "t"]])


class TestIdeal:
    """Graded pieces of the vanishing ideal."""

    def test_degree_8_is_the_first_equation(self):
        germ = u7_germ()
        piece = ideal_piece(germ, 8)
        assert piece.dimension == 1
        x1, x2, x3 = germ.ring.gens
        assert vanishes_on_germ(germ, piece.polynomials[0])
        assert vanishes_on_germ(germ, x1**2 + x2 * x3)

    def test_low_degrees_are_empty(self):
        germ = u7_germ()
        assert all(ideal_piece(germ, degree).dimension == 0 for degree in range(8))

    def test_sub_germ_ideal_comes_from_its_branches(self):
        germ = u7_germ()
        singular = germ.sub_germ([1])
        x1, x2, x3 = germ.ring.gens
        assert ideal_piece(germ, 10).dimension == 0
        assert ideal_piece(singular, 10).dimension == 1
        assert vanishes_on_germ(singular, x2**2 - x1 * x3**2)

    def test_sign_action(self):
        germ = u7_germ()
        x1, x2, x3 = germ.ring.gens
        assert apply_sign((1, -1, -1), x1**2 + x2 * x3) == x1**2 + x2 * x3
        assert apply_sign((1, -1, -1), x1 * x2 + x3**3) == -(x1 * x2 + x3**3)


class TestTangentFields:
    """Monomial multiples of the Euler field."""

    def test_euler_is_tangent(self):
        germ = u7_germ()
        assert is_tangent(germ, germ.euler())

    def test_non_tangent_field(self):
        germ = u7_germ()
        R = germ.ring
        assert not is_tangent(germ, VectorField(R, [R.zero, R.zero, R.one]))

    def test_labels_start_with_euler(self):
        fields = euler_tangent_fields(u7_germ(), 4)
        assert fields[0].label == "E"
        assert fields[0].degree == 0
        assert "x3*E" in [f.label for f in fields]


def test_t_order():
    t = series_ring().gens[0]
    assert t_order(t**3 + t**5) == 3
    assert t_order(series_ring().zero) == INF


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
