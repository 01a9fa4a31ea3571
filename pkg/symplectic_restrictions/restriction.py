"""Graded computation of algebraic restrictions of 2-forms to a curve germ.

For every quasi-degree δ the engine forms the piece of 2-forms of degree δ,
the relation piece spanned by h·dxi∧dxj and d(h·dxi) with h in the vanishing
ideal, and reads restriction coordinates off the reduced echelon form of the
relations. Pivot columns are eliminated; what remains are the quotient
coordinates of the piece.
"""

import logging
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from symplectic_restrictions.algebra import (
    RowSpace,
    format_rational,
    monomials_of_degree,
    solve_linear,
    to_rational,
)
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import BoundExhaustedError, DegreeOverflowError, GermError, PreconditionError
from symplectic_restrictions.forms import DiffForm, basis_form, exterior_d, substitute
from symplectic_restrictions.germ import CurveGerm, ideal_piece

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def two_form_monomials(weights: Tuple[int, ...], degree: int) -> Tuple[tuple, ...]:
    """Entries ((i, j), monomial) spanning 2-forms of one quasi-degree."""
    entries = []
    for i in range(len(weights)):
        for j in range(i + 1, len(weights)):
            for exponents in monomials_of_degree(weights, degree - weights[i] - weights[j]):
                entries.append(((i, j), exponents))
    return tuple(entries)


def form_vector(form: DiffForm, weights: Tuple[int, ...], degree: int) -> list:
    """Coordinates of the degree-δ part of a 2-form over two_form_monomials."""
    entries = two_form_monomials(weights, degree)
    position = {entry: k for k, entry in enumerate(entries)}
    vector = [QQ.zero] * len(entries)
    for index, coeff in form.terms.items():
        shift = weights[index[0]] + weights[index[1]]
        for exponents, value in coeff.items():
            k = position.get((index, exponents))
            if k is not None:
                vector[k] = value
            elif sum(e * w for e, w in zip(exponents, weights)) + shift == degree:
                raise ValueError(f"entry {(index, exponents)} missing from degree {degree}")
    return vector


def relation_forms(germ: CurveGerm, degree: int) -> List[DiffForm]:
    """Generators of the degree-δ piece of forms restricting to zero."""
    R, w = germ.ring, germ.weights
    forms = []
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            for h in ideal_piece(germ, degree - w[i] - w[j]).polynomials:
                forms.append(basis_form(R, (i, j), h))
    for i in range(len(w)):
        for h in ideal_piece(germ, degree - w[i]).polynomials:
            forms.append(exterior_d(basis_form(R, (i,), h)))
    return forms


def exact_generators(germ: CurveGerm, degree: int) -> List[DiffForm]:
    """d(m·dxi) for every monomial m of the right degree; these span closed 2-forms of degree δ."""
    R, w = germ.ring, germ.weights
    forms = []
    for i in range(len(w)):
        for exponents in monomials_of_degree(w, degree - w[i]):
            forms.append(exterior_d(basis_form(R, (i,), R({exponents: 1}))))
    return forms


@dataclass(frozen=True)
class BasisElement:
    label: str
    form: DiffForm
    degree: int
    closed: bool


@dataclass
class DegreePiece:
    """Elimination data for one quasi-degree with a nonzero quotient."""

    degree: int
    relations: RowSpace
    free_columns: Tuple[int, ...]
    closed_span: RowSpace
    basis_indices: Tuple[int, ...] = ()
    inverse: Tuple[tuple, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.free_columns)

    def quotient_vector(self, vector: Sequence) -> list:
        reduced = self.relations.reduce(vector)
        return [reduced[c] for c in self.free_columns]

    def basis_coordinates(self, quotient: Sequence) -> list:
        return [sum((row[i] * quotient[i] for i in range(len(quotient))), QQ.zero) for row in self.inverse]


class RestrictionSpace:
    """Algebraic restrictions of 2-forms to a germ, with an adapted basis.

    Elements flagged closed span the restrictions of closed forms; the rest
    complete them to a basis of all restrictions.
    """

    def __init__(self, germ: CurveGerm, bound: int, basis: Sequence[BasisElement], pieces: Dict[int, DegreePiece]):
        self.germ = germ
        self.bound = bound
        self.basis = tuple(basis)
        self.pieces = pieces
        self.closed_indices = tuple(k for k, b in enumerate(self.basis) if b.closed)
        # memo for derived data: action columns, tangent fields, sub-germ spaces
        self.cache: Dict = {}
        self.lock = threading.RLock()

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def closed_dimension(self) -> int:
        return len(self.closed_indices)

    @property
    def closed_degrees(self) -> Tuple[int, ...]:
        return tuple(self.basis[k].degree for k in self.closed_indices)

    def zero(self) -> "AlgRestriction":
        return AlgRestriction(self, tuple(QQ.zero for _ in self.basis))

    def from_closed(self, coefficients: Sequence) -> "AlgRestriction":
        """Restriction with the given coordinates on the closed basis."""
        if len(coefficients) != self.closed_dimension:
            raise PreconditionError(f"expected {self.closed_dimension} coefficients, got {len(coefficients)}")
        coordinates = [QQ.zero] * self.dimension
        for k, value in zip(self.closed_indices, coefficients):
            coordinates[k] = to_rational(value)
        return AlgRestriction(self, tuple(coordinates))

    def closed_form(self, coefficients: Sequence) -> DiffForm:
        """Σ c_j θ_j as an actual 2-form."""
        result = DiffForm.zero(self.germ.ring, 2)
        for k, value in zip(self.closed_indices, coefficients):
            if value:
                result = result + self.basis[k].form.scale(value)
        return result

    def __repr__(self) -> str:
        return f"RestrictionSpace({self.germ.name}, dim={self.dimension}, closed={self.closed_dimension})"


@dataclass(frozen=True)
class AlgRestriction:
    """Coordinates of a restriction class in the basis of its space."""

    space: RestrictionSpace = field(compare=False)
    coordinates: Tuple

    @property
    def closed_coordinates(self) -> Tuple:
        return tuple(self.coordinates[k] for k in self.space.closed_indices)

    @property
    def is_closed(self) -> bool:
        closed = set(self.space.closed_indices)
        return not any(c for k, c in enumerate(self.coordinates) if k not in closed)

    def __add__(self, other: "AlgRestriction") -> "AlgRestriction":
        return AlgRestriction(self.space, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    def scale(self, factor) -> "AlgRestriction":
        factor = to_rational(factor)
        return AlgRestriction(self.space, tuple(factor * a for a in self.coordinates))

    def as_dict(self) -> Dict[str, str]:
        return {
            element.label: format_rational(value)
            for element, value in zip(self.space.basis, self.coordinates)
            if value
        }


def _ambient_rewrite(space: RestrictionSpace, omega: DiffForm) -> DiffForm:
    """Move a form on a larger ambient space onto the germ's variables.

    The germ lies in {x_k = 0, k > m}; x_k·β and dx_k∧β = d(x_k β) − x_k dβ
    both restrict to zero, so those terms are dropped.
    """
    R = space.germ.ring
    m = R.ngens
    if omega.ring.ngens < m:
        raise PreconditionError("form lives on fewer variables than the germ")
    images = list(R.gens) + [R.zero] * (omega.ring.ngens - m)
    terms = {}
    for index, coeff in omega.terms.items():
        if all(i < m for i in index):
            terms[index] = substitute(coeff, images, R)
    return DiffForm(R, omega.degree, terms)


def build_space(
    germ: CurveGerm,
    bound: int = None,
    representatives: Optional[Sequence[Tuple[str, DiffForm, bool]]] = None,
) -> RestrictionSpace:
    """Compute restrictions of all 2-forms to ``germ`` up to quasi-degree ``bound``.

    ``representatives`` fixes the reported basis as (label, form, closed)
    triples; without it, closed representatives are chosen among d(m·dxi) in
    enumeration order and completed by echelon-free unit forms.
    """
    bound = EngineConfig.DEGREE_BOUND if bound is None else bound
    w = germ.weights
    window_start = bound - 2 * max(w)
    if window_start < 0:
        raise BoundExhaustedError(f"{germ.name}: degree bound {bound} is below the stabilization window; increase D")

    pieces: Dict[int, DegreePiece] = {}
    for degree in range(bound + 1):
        entries = two_form_monomials(w, degree)
        if not entries:
            continue
        relations = RowSpace([form_vector(f, w, degree) for f in relation_forms(germ, degree)], len(entries))
        pivots = set(relations.pivots)
        free = tuple(c for c in range(len(entries)) if c not in pivots)
        if not free:
            continue
        if degree >= window_start:
            raise BoundExhaustedError(
                f"{germ.name}: quotient in degree {degree} is nonzero inside the stabilization window; increase D"
            )
        piece = DegreePiece(degree, relations, free, RowSpace([], len(free)))
        piece.closed_span = RowSpace(
            [piece.quotient_vector(form_vector(f, w, degree)) for f in exact_generators(germ, degree)], len(free)
        )
        pieces[degree] = piece
        logger.debug("%s: degree %d quotient %d, closed %d", germ.name, degree, len(free), piece.closed_span.rank)

    if representatives is None:
        basis = _default_basis(germ, pieces)
    else:
        basis = _checked_basis(germ, pieces, representatives)

    for degree, piece in pieces.items():
        indices = tuple(k for k, b in enumerate(basis) if b.degree == degree)
        rows = [piece.quotient_vector(form_vector(basis[k].form, w, degree)) for k in indices]
        piece.basis_indices = indices
        piece.inverse = _inverse_transpose(rows, germ.name, degree)

    space = RestrictionSpace(germ, bound, basis, pieces)
    logger.info("%s: %d restriction classes, %d closed", germ.name, space.dimension, space.closed_dimension)
    return space


def _inverse_transpose(rows: List[list], name: str, degree: int) -> Tuple[tuple, ...]:
    """M with M·r = c whenever c·rows = r."""
    size = len(rows)
    transpose = [[rows[i][j] for i in range(size)] for j in range(size)]
    columns = []
    for j in range(size):
        unit = [QQ.one if i == j else QQ.zero for i in range(size)]
        solution = solve_linear(transpose, unit, size)
        if solution is None or solution.kernel:
            raise GermError(f"{name}: basis representatives are dependent in degree {degree}")
        columns.append(solution.particular)
    return tuple(tuple(columns[j][i] for j in range(size)) for i in range(size))


def _default_basis(germ: CurveGerm, pieces: Dict[int, DegreePiece]) -> List[BasisElement]:
    closed, complement = [], []
    R, w = germ.ring, germ.weights
    for degree in sorted(pieces):
        piece = pieces[degree]
        chosen: List[list] = []
        for form in exact_generators(germ, degree):
            vector = piece.quotient_vector(form_vector(form, w, degree))
            if RowSpace(chosen + [vector], piece.dimension).rank > len(chosen):
                chosen.append(vector)
                closed.append(BasisElement(f"θ{len(closed) + 1}", form, degree, True))
        entries = two_form_monomials(w, degree)
        for column in piece.free_columns:
            pair, exponents = entries[column]
            form = basis_form(R, pair, R({exponents: 1}))
            vector = piece.quotient_vector(form_vector(form, w, degree))
            if RowSpace(chosen + [vector], piece.dimension).rank > len(chosen):
                chosen.append(vector)
                complement.append(BasisElement(f"σ{len(complement) + 1}", form, degree, False))
    return closed + complement


def _checked_basis(germ: CurveGerm, pieces: Dict[int, DegreePiece], representatives) -> List[BasisElement]:
    w = germ.weights
    basis = []
    for label, form, closed in representatives:
        degrees = form.quasi_degrees(w)
        if len(degrees) != 1:
            raise GermError(f"{germ.name}: representative {label} is not quasi-homogeneous")
        degree = degrees.pop()
        piece = pieces.get(degree)
        if piece is None:
            raise GermError(f"{germ.name}: representative {label} has degree {degree} where every form restricts to zero")
        if closed and not piece.closed_span.contains(piece.quotient_vector(form_vector(form, w, degree))):
            raise GermError(f"{germ.name}: representative {label} is not the restriction of a closed form")
        basis.append(BasisElement(label, form, degree, bool(closed)))
    for degree, piece in pieces.items():
        here = [b for b in basis if b.degree == degree]
        closed_here = sum(1 for b in here if b.closed)
        if len(here) != piece.dimension or closed_here != piece.closed_span.rank:
            raise GermError(
                f"{germ.name}: degree {degree} has {piece.dimension} classes ({piece.closed_span.rank} closed) "
                f"but {len(here)} representatives ({closed_here} closed)"
            )
    return basis


def closed_subspace(space: RestrictionSpace) -> List[BasisElement]:
    return [space.basis[k] for k in space.closed_indices]


def restrict(space: RestrictionSpace, omega: DiffForm) -> AlgRestriction:
    """Coordinates of [ω] in the basis of ``space``."""
    if omega.degree != 2:
        raise PreconditionError(f"restriction of {omega.degree}-forms is not supported")
    if omega.ring != space.germ.ring:
        omega = _ambient_rewrite(space, omega)
    w = space.germ.weights
    coordinates = [QQ.zero] * space.dimension
    for degree in sorted(omega.quasi_degrees(w)):
        if degree > space.bound:
            raise DegreeOverflowError(f"component of quasi-degree {degree} exceeds the bound {space.bound}")
        piece = space.pieces.get(degree)
        if piece is None:
            continue
        quotient = piece.quotient_vector(form_vector(omega.homogeneous_part(w, degree), w, degree))
        for k, value in zip(piece.basis_indices, piece.basis_coordinates(quotient)):
            coordinates[k] += value
    return AlgRestriction(space, tuple(coordinates))


def is_zero_restriction(a: AlgRestriction) -> bool:
    return not any(a.coordinates)
