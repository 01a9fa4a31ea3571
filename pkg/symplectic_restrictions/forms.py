"""Differential forms with polynomial coefficients.

A p-form is stored as a map from strictly increasing index tuples I to the
coefficient polynomial of dx_I. Degrees above 3 are not supported.
"""

from typing import Dict, Iterable, Sequence, Tuple

from sympy.polys.rings import PolyElement, PolyRing

from symplectic_restrictions.algebra import homogeneous_components, to_rational, weighted_degree
from symplectic_restrictions.errors import DegreeOverflowError, PreconditionError

MAX_DEGREE = 3

Index = Tuple[int, ...]


def _sort_with_sign(index: Sequence[int]) -> Tuple[int, Index]:
    """Sort an index sequence; sign is the parity of the sorting permutation."""
    if len(set(index)) != len(index):
        return 0, ()
    inversions = sum(1 for i in range(len(index)) for j in range(i + 1, len(index)) if index[i] > index[j])
    return (-1 if inversions % 2 else 1), tuple(sorted(index))


class DiffForm:
    """A polynomial-coefficient p-form on the ambient space of ``ring``."""

    __slots__ = ("ring", "degree", "terms")

    def __init__(self, ring: PolyRing, degree: int, terms: Dict[Index, PolyElement] = None):
        if degree > MAX_DEGREE or degree < 0:
            raise DegreeOverflowError(f"forms of degree {degree} are not supported")
        clean = {}
        for index, coeff in (terms or {}).items():
            index = tuple(index)
            if len(index) != degree or any(a >= b for a, b in zip(index, index[1:])):
                raise ValueError(f"index {index} is not a strictly increasing {degree}-tuple")
            if index and index[-1] >= ring.ngens:
                raise ValueError(f"index {index} out of range for {ring.ngens} variables")
            coeff = ring(coeff)
            if coeff:
                clean[index] = coeff
        self.ring = ring
        self.degree = degree
        self.terms = clean

    @classmethod
    def zero(cls, ring: PolyRing, degree: int) -> "DiffForm":
        return cls(ring, degree)

    @classmethod
    def collect(cls, ring: PolyRing, degree: int, items: Iterable[Tuple[Sequence[int], PolyElement]]) -> "DiffForm":
        """Build a form from possibly unsorted, repeated index entries."""
        terms = {}
        for index, coeff in items:
            sign, key = _sort_with_sign(index)
            if not sign:
                continue
            terms[key] = terms.get(key, ring.zero) + coeff * sign
        return cls(ring, degree, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, index: Sequence[int]) -> PolyElement:
        return self.terms.get(tuple(index), self.ring.zero)

    def _combine(self, other: "DiffForm", sign: int) -> "DiffForm":
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degrees")
        terms = dict(self.terms)
        for index, coeff in other.terms.items():
            terms[index] = terms.get(index, self.ring.zero) + coeff * sign
        return DiffForm(self.ring, self.degree, terms)

    def __add__(self, other: "DiffForm") -> "DiffForm":
        return self._combine(other, 1)

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self._combine(other, -1)

    def __neg__(self) -> "DiffForm":
        return self.scale(-1)

    def scale(self, factor) -> "DiffForm":
        """Multiply by a rational number or by a polynomial function."""
        if not isinstance(factor, PolyElement):
            factor = self.ring.ground_new(to_rational(factor))
        return DiffForm(self.ring, self.degree, {index: coeff * factor for index, coeff in self.terms.items()})

    def __mul__(self, factor) -> "DiffForm":
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.ring == other.ring and self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def quasi_degrees(self, weights: Sequence[int]) -> set:
        """Quasi-degrees of the homogeneous components, counting w_i for each dx_i."""
        degrees = set()
        for index, coeff in self.terms.items():
            shift = sum(weights[i] for i in index)
            degrees.update(weighted_degree(m, weights) + shift for m in coeff.itermonoms())
        return degrees

    def homogeneous_part(self, weights: Sequence[int], degree: int) -> "DiffForm":
        terms = {}
        for index, coeff in self.terms.items():
            shift = sum(weights[i] for i in index)
            part = homogeneous_components(coeff, weights).get(degree - shift)
            if part:
                terms[index] = part
        return DiffForm(self.ring, self.degree, terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        names = [str(g) for g in self.ring.gens]
        pieces = []
        for index in sorted(self.terms):
            basis = "∧".join(f"d{names[i]}" for i in index)
            coeff = self.terms[index]
            pieces.append(f"({coeff})" + (f"·{basis}" if basis else ""))
        return " + ".join(pieces)


def function_form(h: PolyElement) -> DiffForm:
    return DiffForm(h.ring, 0, {(): h})


def dx(ring: PolyRing, i: int) -> DiffForm:
    return DiffForm(ring, 1, {(i,): ring.one})


def basis_form(ring: PolyRing, index: Sequence[int], coeff=None) -> DiffForm:
    """The form coeff·dx_I for a strictly increasing I."""
    return DiffForm(ring, len(index), {tuple(index): ring.one if coeff is None else coeff})


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.degree + b.degree > MAX_DEGREE:
        raise DegreeOverflowError(f"wedge of degrees {a.degree} and {b.degree} exceeds {MAX_DEGREE}")
    items = [
        (index_a + index_b, coeff_a * coeff_b)
        for index_a, coeff_a in a.terms.items()
        for index_b, coeff_b in b.terms.items()
    ]
    return DiffForm.collect(a.ring, a.degree + b.degree, items)


def exterior_d(a: DiffForm) -> DiffForm:
    if a.degree >= MAX_DEGREE:
        raise DegreeOverflowError("exterior derivative of a 3-form is not supported")
    gens = a.ring.gens
    items = []
    for index, coeff in a.terms.items():
        for k, gen in enumerate(gens):
            partial = coeff.diff(gen)
            if partial:
                items.append(((k,) + index, partial))
    return DiffForm.collect(a.ring, a.degree + 1, items)


class VectorField:
    """Polynomial vector field: one component per ambient variable."""

    __slots__ = ("ring", "components")

    def __init__(self, ring: PolyRing, components: Sequence):
        if len(components) != ring.ngens:
            raise ValueError(f"expected {ring.ngens} components, got {len(components)}")
        self.ring = ring
        self.components = tuple(ring(c) for c in components)

    @classmethod
    def euler(cls, ring: PolyRing, weights: Sequence[int]) -> "VectorField":
        """E = Σ w_i x_i ∂/∂x_i."""
        return cls(ring, [w * x for w, x in zip(weights, ring.gens)])

    def scaled(self, g: PolyElement) -> "VectorField":
        return VectorField(self.ring, [g * c for c in self.components])

    def apply(self, h: PolyElement) -> PolyElement:
        """Directional derivative X(h)."""
        result = self.ring.zero
        for component, gen in zip(self.components, self.ring.gens):
            if component:
                result += component * h.diff(gen)
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.components == other.components

    __hash__ = None

    def __repr__(self) -> str:
        return f"VectorField({', '.join(str(c) for c in self.components)})"


def interior(X: VectorField, a: DiffForm) -> DiffForm:
    """Interior product ι_X a."""
    if a.degree == 0:
        return DiffForm.zero(a.ring, 0)
    items = []
    for index, coeff in a.terms.items():
        for position, k in enumerate(index):
            component = X.components[k]
            if component:
                sign = -1 if position % 2 else 1
                items.append((index[:position] + index[position + 1:], coeff * component * sign))
    return DiffForm.collect(a.ring, a.degree - 1, items)


def lie_derivative(X: VectorField, a: DiffForm) -> DiffForm:
    """L_X a = d(ι_X a) + ι_X(da)."""
    if a.degree == 0:
        coeff = a.coefficient(())
        return function_form(X.apply(coeff))
    if a.degree == MAX_DEGREE:
        if a.ring.ngens > MAX_DEGREE:
            raise DegreeOverflowError("Lie derivative of a 3-form needs at most 3 variables")
        return exterior_d(interior(X, a))
    return exterior_d(interior(X, a)) + interior(X, exterior_d(a))


class PolyMap:
    """Polynomial map: each target variable is sent to a polynomial in the source ring."""

    __slots__ = ("source", "target", "images")

    def __init__(self, source: PolyRing, target: PolyRing, images: Sequence):
        if len(images) != target.ngens:
            raise ValueError(f"expected {target.ngens} images, got {len(images)}")
        self.source = source
        self.target = target
        self.images = tuple(source(image) for image in images)

    def __call__(self, h: PolyElement) -> PolyElement:
        return substitute(h, self.images, self.source)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMap) and self.images == other.images

    __hash__ = None


def substitute(h: PolyElement, images: Sequence[PolyElement], into: PolyRing) -> PolyElement:
    """h(images), computed term by term with cached powers."""
    powers = [{0: into.one} for _ in images]
    result = into.zero
    for monom, coeff in h.items():
        term = into.ground_new(coeff)
        for i, exponent in enumerate(monom):
            if exponent:
                cache = powers[i]
                if exponent not in cache:
                    cache[exponent] = images[i] ** exponent
                term = term * cache[exponent]
        result += term
    return result


def pullback(f: PolyMap, a: DiffForm) -> DiffForm:
    """f*a, a form in the source variables."""
    if a.ring != f.target:
        raise PreconditionError("form does not live on the target of the map")
    differentials = [exterior_d(function_form(image)) for image in f.images]
    result = DiffForm.zero(f.source, a.degree)
    for index, coeff in a.terms.items():
        piece = function_form(f(coeff))
        for i in index:
            piece = wedge(piece, differentials[i])
        result = result + piece
    return result
