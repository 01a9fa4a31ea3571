"""Curve germs: defining equations, weights, parametrized branches and the graded vanishing ideal."""

import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement, PolyRing

from symplectic_restrictions.algebra import (
    Monomial,
    RowSpace,
    kernel_basis,
    monomials_of_degree,
    quasi_degree,
    series_ring,
    weighted_degree,
)
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import GermError
from symplectic_restrictions.forms import PolyMap, VectorField

logger = logging.getLogger(__name__)


def t_order(p: PolyElement) -> float:
    """Lowest power of t present in a one-variable polynomial."""
    if not p:
        return float("inf")
    return min(monom[0] for monom in p.itermonoms())


def t_coefficient(p: PolyElement, k: int):
    return p.get((k,), p.ring.domain.zero)


def monomial_label(names: Sequence[str], exponents: Monomial) -> str:
    parts = []
    for name, exponent in zip(names, exponents):
        if exponent == 1:
            parts.append(name)
        elif exponent > 1:
            parts.append(f"{name}^{exponent}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class Branch:
    """A parametrized branch t ↦ x(t) through the origin."""

    label: str
    map: PolyMap

    @property
    def images(self) -> Tuple[PolyElement, ...]:
        return self.map.images

    @property
    def order(self) -> float:
        return min(t_order(image) for image in self.images)

    @property
    def is_singular(self) -> bool:
        return self.order > 1

    def jet(self, k: int) -> tuple:
        """Coefficient vector of t^k."""
        return tuple(t_coefficient(image, k) for image in self.images)

    def max_degree(self) -> int:
        return max((image.degree() for image in self.images if image), default=0)


def make_branch(label: str, germ_ring: PolyRing, images: Sequence) -> Branch:
    branch = Branch(label, PolyMap(series_ring(), germ_ring, images))
    if not any(branch.images):
        raise GermError(f"branch {label} is identically zero")
    if any(image.get((0,)) for image in branch.images):
        raise GermError(f"branch {label} does not pass through the origin")
    if branch.max_degree() > EngineConfig.JET_CUTOFF:
        raise GermError(f"branch {label} exceeds the jet cutoff t^{EngineConfig.JET_CUTOFF}")
    return branch


@dataclass(frozen=True)
class TangentField:
    """A field g·E with g a monomial."""

    field: VectorField
    generator: Monomial
    degree: int
    label: str


@dataclass(frozen=True)
class IdealPiece:
    """Quasi-degree-δ polynomials vanishing on the germ."""

    degree: int
    monomials: Tuple[Monomial, ...]
    vectors: Tuple[tuple, ...]
    polynomials: Tuple[PolyElement, ...]

    @property
    def dimension(self) -> int:
        return len(self.polynomials)


class CurveGerm:
    """Quasi-homogeneous curve germ given by equations and its real branches."""

    def __init__(
        self,
        name: str,
        ring: PolyRing,
        weights: Sequence[int],
        equations: Sequence[PolyElement],
        branches: Sequence[Branch],
        symmetries: Sequence[Sequence[int]] = (),
    ):
        self.name = name
        self.ring = ring
        self.weights = tuple(int(w) for w in weights)
        self.equations = tuple(equations)
        self.branches = tuple(branches)
        self.symmetries = tuple(tuple(s) for s in symmetries)
        self.discrepancies: Dict[int, Tuple[int, int]] = {}
        self._ideal_cache: Dict[int, IdealPiece] = {}
        self._power_cache: Dict[Tuple[int, int, int], PolyElement] = {}
        self._lock = threading.Lock()
        self.check()

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(str(s) for s in self.ring.symbols)

    @property
    def dimension(self) -> int:
        return self.ring.ngens

    def check(self) -> None:
        """Load-time checks; raises GermError naming the failing identity."""
        if len(self.weights) != self.dimension or any(w <= 0 for w in self.weights):
            raise GermError(f"{self.name}: weights {self.weights} must be {self.dimension} positive integers")
        if not self.branches:
            raise GermError(f"{self.name}: at least one branch is required")
        for k, equation in enumerate(self.equations):
            if not equation or quasi_degree(equation, self.weights) is None:
                raise GermError(f"{self.name}: equation {k + 1} is not quasi-homogeneous for weights {self.weights}")
        for branch in self.branches:
            if not verify_branch(self, branch):
                raise GermError(f"{self.name}: branch {branch.label} does not satisfy the defining equations")
        for i, a in enumerate(self.branches):
            for b in self.branches[i + 1:]:
                if a.images == b.images:
                    raise GermError(f"{self.name}: branches {a.label} and {b.label} coincide")
        for sign in self.symmetries:
            if len(sign) != self.dimension or any(s not in (1, -1) for s in sign):
                raise GermError(f"{self.name}: symmetry {sign} is not a sign vector")
            for k, equation in enumerate(self.equations):
                if not vanishes_on_germ(self, apply_sign(sign, equation)):
                    raise GermError(f"{self.name}: symmetry {sign} does not preserve equation {k + 1}")
        logger.debug("germ %s passed load checks", self.name)

    def euler(self) -> VectorField:
        return VectorField.euler(self.ring, self.weights)

    def monomial_image(self, branch_index: int, exponents: Monomial) -> PolyElement:
        """x^e composed with a branch, cached per coordinate power."""
        images = self.branches[branch_index].images
        result = series_ring().one
        for i, exponent in enumerate(exponents):
            if exponent:
                key = (branch_index, i, exponent)
                power = self._power_cache.get(key)
                if power is None:
                    power = images[i] ** exponent
                    self._power_cache[key] = power
                result = result * power
        return result

    def along_branches(self, h: PolyElement) -> List[PolyElement]:
        return [branch.map(h) for branch in self.branches]

    def sub_germ(self, indices: Sequence[int]) -> "CurveGerm":
        """The union of the selected branches (0-based).

        A proper sub-germ is cut out by more than the parent's equations, so
        its vanishing ideal comes from the branches alone.
        """
        chosen = [self.branches[i] for i in indices]
        if len(chosen) == len(self.branches):
            return self
        label = "+".join(b.label for b in chosen)
        return CurveGerm(f"{self.name}[{label}]", self.ring, self.weights, (), chosen)

    def singular_branch_indices(self) -> List[int]:
        return [i for i, b in enumerate(self.branches) if b.is_singular]

    def __repr__(self) -> str:
        return f"CurveGerm({self.name!r}, weights={self.weights}, branches={len(self.branches)})"


def apply_sign(sign: Sequence[int], h: PolyElement) -> PolyElement:
    """h(ε1 x1, …, εm xm)."""
    R = h.ring
    return R({monom: coeff * (-1 if sum(e for e, s in zip(monom, sign) if s < 0) % 2 else 1) for monom, coeff in h.items()})


def verify_branch(g: CurveGerm, b: Branch) -> bool:
    return all(not b.map(equation) for equation in g.equations)


def vanishes_on_germ(g: CurveGerm, h: PolyElement) -> bool:
    return all(not image for image in g.along_branches(h))


def generated_ideal_span(g: CurveGerm, degree: int) -> RowSpace:
    """Span of m·F over monomials m, restricted to one quasi-degree."""
    monomials = monomials_of_degree(g.weights, degree)
    position = {m: i for i, m in enumerate(monomials)}
    vectors = []
    for equation in g.equations:
        shift = degree - quasi_degree(equation, g.weights)
        for m in monomials_of_degree(g.weights, shift):
            vector = [0] * len(monomials)
            for monom, coeff in equation.items():
                vector[position[tuple(a + b for a, b in zip(monom, m))]] = coeff
            vectors.append(vector)
    return RowSpace(vectors, len(monomials))


def ideal_piece(g: CurveGerm, degree: int) -> IdealPiece:
    """Basis of quasi-degree-δ polynomials vanishing along every branch."""
    cached = g._ideal_cache.get(degree)
    if cached is not None:
        return cached

    monomials = monomials_of_degree(g.weights, degree)
    rows = []
    for k in range(len(g.branches)):
        images = [g.monomial_image(k, m) for m in monomials]
        powers = sorted({monom[0] for image in images for monom in image.itermonoms()})
        for power in powers:
            rows.append([t_coefficient(image, power) for image in images])
    vectors = kernel_basis(rows, len(monomials)) if monomials else ()
    polynomials = tuple(
        g.ring({m: c for m, c in zip(monomials, vector) if c}) for vector in vectors
    )
    piece = IdealPiece(degree, monomials, tuple(vectors), polynomials)

    if monomials and g.equations:
        generated = generated_ideal_span(g, degree)
        branch_span = RowSpace(vectors, len(monomials))
        if any(not branch_span.contains(row) for row in generated.rows):
            raise GermError(f"{g.name}: defining equations do not vanish on the branches in degree {degree}")
        if generated.rank != piece.dimension:
            with g._lock:
                if degree not in g.discrepancies:
                    logger.warning(
                        "%s: degree %d ideal has dimension %d on branches but %d from equations",
                        g.name, degree, piece.dimension, generated.rank,
                    )
                g.discrepancies[degree] = (piece.dimension, generated.rank)

    with g._lock:
        g._ideal_cache[degree] = piece
    return piece


def is_tangent(g: CurveGerm, X: VectorField) -> bool:
    return all(vanishes_on_germ(g, X.apply(equation)) for equation in g.equations)


def euler_tangent_fields(g: CurveGerm, max_degree: int) -> List[TangentField]:
    """All g·E with g a monomial of quasi-degree ≤ max_degree, lowest degree first."""
    euler = g.euler()
    fields = []
    for degree in range(max_degree + 1):
        for exponents in monomials_of_degree(g.weights, degree):
            generator = g.ring({exponents: 1})
            field = euler.scaled(generator)
            if not is_tangent(g, field):
                logger.debug("%s: %s·E is not tangent", g.name, monomial_label(g.names, exponents))
                continue
            name = monomial_label(g.names, exponents)
            label = "E" if name == "1" else f"{name}*E"
            fields.append(TangentField(field, exponents, weighted_degree(exponents, g.weights), label))
    return fields


def find_field(fields: Sequence[TangentField], label: str) -> Optional[TangentField]:
    return next((f for f in fields if f.label == label), None)
