"""Exact rational arithmetic, quasi-homogeneous grading and graded linear algebra.

Polynomials are sympy ``PolyElement`` values over ``QQ``; matrices are
``DomainMatrix`` over ``QQ``. Nothing in this module ever rounds.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement, PolyRing, ring

from symplectic_restrictions.errors import ParseError, UndefinedDegreeError

logger = logging.getLogger(__name__)

INF = math.inf

Monomial = Tuple[int, ...]
Weights = Tuple[int, ...]
Vector = List


@lru_cache(maxsize=None)
def polynomial_ring(names: Tuple[str, ...]) -> PolyRing:
    """Polynomial ring over QQ in the given variable names."""
    return ring(",".join(names), QQ)[0]


def series_ring() -> PolyRing:
    """The one-variable ring of branch parameters."""
    return polynomial_ring(("t",))


def to_rational(value):
    """Convert ints, fractions, sympy rationals and "p/q" strings to QQ."""
    if isinstance(value, str):
        try:
            frac = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational number: {value!r}") from exc
        return QQ(frac.numerator, frac.denominator)
    if isinstance(value, float):
        raise ParseError(f"floating point value {value!r} is not exact")
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    return QQ.convert(value)


def format_rational(value) -> str:
    """Serialize a rational as "p/q", or "p" when the denominator is 1."""
    value = to_rational(value)
    numer, denom = QQ.numer(value), QQ.denom(value)
    return f"{numer}" if denom == 1 else f"{numer}/{denom}"


def format_order(value) -> object:
    """Integers pass through, infinity becomes the string "inf"."""
    return "inf" if value == INF else int(value)


def parse_order(value) -> float:
    if value in ("inf", "∞", INF):
        return INF
    return int(value)


def weighted_degree(monomial: Monomial, weights: Weights) -> int:
    return sum(e * w for e, w in zip(monomial, weights))


def quasi_degree(p: PolyElement, weights: Weights) -> Optional[int]:
    """Quasi-degree of a quasi-homogeneous polynomial.

    Returns None when the terms have different weighted degrees. The zero
    polynomial has no degree at all.
    """
    if not p:
        raise UndefinedDegreeError("undefined degree: zero polynomial")
    degrees = {weighted_degree(monom, weights) for monom in p.itermonoms()}
    if len(degrees) != 1:
        return None
    return degrees.pop()


def homogeneous_components(p: PolyElement, weights: Weights) -> dict:
    """Split a polynomial into its quasi-homogeneous parts, keyed by degree."""
    parts = {}
    for monom, coeff in p.items():
        degree = weighted_degree(monom, weights)
        parts.setdefault(degree, p.ring.zero)
        parts[degree] = parts[degree] + p.ring({monom: coeff})
    return parts


@lru_cache(maxsize=None)
def monomials_of_degree(weights: Weights, degree: int) -> Tuple[Monomial, ...]:
    """All exponent vectors of the given quasi-degree.

    Ordered by total degree, then lexicographically with x1 largest first.
    """
    if degree < 0:
        return ()
    found = []

    def extend(prefix, remaining, index):
        weight = weights[index]
        if index == len(weights) - 1:
            if remaining % weight == 0:
                found.append(prefix + (remaining // weight,))
            return
        for exponent in range(remaining // weight + 1):
            extend(prefix + (exponent,), remaining - exponent * weight, index + 1)

    extend((), degree, 0)
    return tuple(sorted(found, key=lambda e: (sum(e), tuple(-x for x in e))))


def monomial(R: PolyRing, exponents: Monomial, coeff=1) -> PolyElement:
    return R({tuple(exponents): to_rational(coeff)})


def echelon(rows: Iterable[Sequence], ncols: int) -> Tuple[List[list], Tuple[int, ...]]:
    """Reduced row echelon form, nonzero rows only, with pivot columns."""
    rows = [[QQ.convert(v) for v in row] for row in rows if any(row)]
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = DomainMatrix(rows, (len(rows), ncols), QQ).rref()
    return reduced.to_list()[:len(pivots)], tuple(pivots)


@dataclass(frozen=True)
class LinearSolution:
    """Particular solution plus a kernel basis of the homogeneous system."""

    particular: Tuple
    kernel: Tuple[Tuple, ...]

    @property
    def dimension(self) -> int:
        return len(self.kernel)


def solve_linear(coefficients: Sequence[Sequence], rhs: Sequence, nunknowns: int) -> Optional[LinearSolution]:
    """Solve ``coefficients · x = rhs`` exactly.

    Returns None when the system is infeasible. The particular solution sets
    every free variable to zero, so it depends only on the reduced echelon
    form of the system.
    """
    augmented = [list(row) + [to_rational(b)] for row, b in zip(coefficients, rhs)]
    reduced, pivots = echelon(augmented, nunknowns + 1)
    if nunknowns in pivots:
        return None

    particular = [QQ.zero] * nunknowns
    for row, pivot in zip(reduced, pivots):
        particular[pivot] = row[nunknowns]

    kernel = []
    pivot_set = set(pivots)
    for free in range(nunknowns):
        if free in pivot_set:
            continue
        vector = [QQ.zero] * nunknowns
        vector[free] = QQ.one
        for row, pivot in zip(reduced, pivots):
            vector[pivot] = -row[free]
        kernel.append(tuple(vector))
    return LinearSolution(tuple(particular), tuple(kernel))


def kernel_basis(coefficients: Sequence[Sequence], nunknowns: int) -> Tuple[Tuple, ...]:
    """Basis of the solutions of the homogeneous system."""
    solution = solve_linear(coefficients, [0] * len(coefficients), nunknowns)
    return solution.kernel


def graded_span_dim(vectors: Sequence[Sequence]) -> int:
    """Rank of a family of coordinate vectors over QQ."""
    vectors = list(vectors)
    if not vectors:
        return 0
    return len(echelon(vectors, len(vectors[0]))[1])


class RowSpace:
    """Span of a family of vectors, kept in reduced echelon form."""

    def __init__(self, vectors: Iterable[Sequence], ncols: int):
        self.ncols = ncols
        self.rows, self.pivots = echelon(vectors, ncols)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, vector: Sequence) -> list:
        """Remainder of a vector after clearing every pivot column."""
        remainder = [QQ.convert(v) for v in vector]
        for row, pivot in zip(self.rows, self.pivots):
            factor = remainder[pivot]
            if factor:
                remainder = [a - factor * b for a, b in zip(remainder, row)]
        return remainder

    def contains(self, vector: Sequence) -> bool:
        return not any(self.reduce(vector))


def add_vectors(u: Sequence, v: Sequence) -> list:
    return [a + b for a, b in zip(u, v)]


def scale_vector(factor, v: Sequence) -> list:
    return [factor * a for a in v]


def zero_vector(n: int) -> list:
    return [QQ.zero] * n
