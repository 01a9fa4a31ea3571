"""Discrete symplectic invariants of curve germs.

Index of isotropy and symplectic multiplicity are read off restriction
coordinates. Lagrangian tangency orders are found by linear feasibility over
generating functions of Lagrangian submanifolds, one polarization chart at a
time. The geometric frame evaluates the constant part of a symplectic form on
tangent data of the branches.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.ring_series import rs_mul, rs_trunc
from sympy.polys.rings import PolyElement

from symplectic_restrictions.algebra import (
    INF,
    RowSpace,
    format_order,
    monomials_of_degree,
    polynomial_ring,
    series_ring,
    solve_linear,
)
from symplectic_restrictions.classifier import orbit_tangent_span, tangent_fields
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import (
    BoundExhaustedError,
    FrameDegenerateError,
    NotClosedError,
    PreconditionError,
)
from symplectic_restrictions.forms import DiffForm, PolyMap, basis_form, exterior_d, pullback
from symplectic_restrictions.germ import t_coefficient, t_order
from symplectic_restrictions.restriction import AlgRestriction, RestrictionSpace, build_space, restrict

logger = logging.getLogger(__name__)

ZERO_RESTRICTION_NOTE = "zero restriction of class normal form"
CONTAINMENT_NOTE = "explicit Lagrangian containment"


# -- index of isotropy and multiplicity ------------------------------------

def isotropy_generators(space: RestrictionSpace) -> List[Tuple[int, tuple]]:
    """(ordinary degree of m, closed coordinates of [d(m·dxi)]) for every nonzero image."""
    with space.lock:
        cached = space.cache.get("isotropy")
    if cached is not None:
        return cached
    R, w = space.germ.ring, space.germ.weights
    generators = []
    for degree in sorted(set(space.closed_degrees)):
        for i in range(len(w)):
            for exponents in monomials_of_degree(w, degree - w[i]):
                if not sum(exponents):
                    continue
                image = restrict(space, exterior_d(basis_form(R, (i,), R({exponents: 1}))))
                if any(image.coordinates):
                    generators.append((sum(exponents), image.closed_coordinates))
    with space.lock:
        space.cache["isotropy"] = generators
    return generators


def index_of_isotropy(space: RestrictionSpace, a: AlgRestriction):
    """Largest r such that a is represented by a closed form vanishing to order r."""
    if not a.is_closed:
        raise NotClosedError("index of isotropy is defined on closed restrictions only")
    coordinates = a.closed_coordinates
    if not any(coordinates):
        return INF
    generators = isotropy_generators(space)
    r = 0
    while True:
        span = RowSpace([v for order, v in generators if order >= r + 2], space.closed_dimension)
        if not span.contains(coordinates):
            return r
        r += 1


def symplectic_multiplicity(space: RestrictionSpace, a: AlgRestriction) -> int:
    """Codimension of the orbit of a in the closed restrictions."""
    return space.closed_dimension - orbit_tangent_span(space, a, tangent_fields(space)).rank


# -- sub-germs ---------------------------------------------------------------

def sub_space(space: RestrictionSpace, indices: Sequence[int]) -> RestrictionSpace:
    """Restriction space of the union of the selected branches."""
    key = ("sub", tuple(sorted(indices)))
    with space.lock:
        cached = space.cache.get(key)
        if cached is None:
            germ = space.germ.sub_germ(sorted(indices))
            cached = space if germ is space.germ else build_space(germ, space.bound)
            space.cache[key] = cached
        return cached


def restrict_to_branches(space: RestrictionSpace, a: AlgRestriction, indices: Sequence[int]) -> AlgRestriction:
    """Restriction of a closed class to a sub-germ, through its closed representative."""
    if not a.is_closed:
        raise NotClosedError("only closed restrictions can be moved to a sub-germ")
    target = sub_space(space, indices)
    if target is space:
        return a
    return restrict(target, space.closed_form(a.closed_coordinates))


def singular_indices(space: RestrictionSpace) -> List[int]:
    indices = space.germ.singular_branch_indices()
    if not indices:
        raise PreconditionError(f"{space.germ.name} has no singular branch")
    return indices


def singular_index_of_isotropy(space: RestrictionSpace, a: AlgRestriction):
    """Index of isotropy of the singular branches alone."""
    indices = singular_indices(space)
    return index_of_isotropy(sub_space(space, indices), restrict_to_branches(space, a, indices))


def lt_single_via_restriction(space: RestrictionSpace, a: AlgRestriction, branch_index: int = None, ceiling: int = None):
    """Lagrangian tangency order of one branch from its algebraic restriction.

    Maximizes min_i ord(α_i∘f) over 1-forms α = Σ α_i dx_i with [dα]_f = a|_f.
    """
    ceiling = EngineConfig.LT_CEILING if ceiling is None else ceiling
    if branch_index is None:
        branch_index = singular_indices(space)[0]
    target = sub_space(space, [branch_index])
    local = restrict_to_branches(space, a, [branch_index])
    if not any(local.coordinates):
        return INF
    if index_of_isotropy(target, local) < 1:
        raise PreconditionError("the restriction to the branch is not represented by a form vanishing at 0")

    germ, R = target.germ, target.germ.ring
    branch = germ.branches[0]
    w = germ.weights
    unknowns = []
    for i in range(len(w)):
        for degree in range(1, target.bound - w[i] + 1):
            for exponents in monomials_of_degree(w, degree):
                image = restrict(target, exterior_d(basis_form(R, (i,), R({exponents: 1}))))
                unknowns.append((i, image.coordinates, branch.map(R({exponents: 1}))))

    restriction_rows = [[u[1][k] for u in unknowns] for k in range(target.dimension)]
    restriction_rhs = list(local.coordinates)

    def feasible(k: int) -> bool:
        rows, rhs = list(restriction_rows), list(restriction_rhs)
        for i in range(len(w)):
            for e in range(k):
                rows.append([t_coefficient(u[2], e) if u[0] == i else QQ.zero for u in unknowns])
                rhs.append(QQ.zero)
        return solve_linear(rows, rhs, len(unknowns)) is not None

    if not feasible(1):
        raise PreconditionError("no primitive 1-form vanishes at 0 on the branch")
    k = 1
    while feasible(k + 1):
        k += 1
        if k > ceiling:
            raise BoundExhaustedError(f"tangency order exceeds {ceiling} on branch {branch.label}; increase ceiling")
    logger.debug("%s: single-branch tangency order %d", germ.name, k)
    return k


# -- Lagrangian tangency of multi-germs --------------------------------------

@dataclass(frozen=True)
class SymplecticScene:
    """Branches in (R^2n, Σ dp_i∧dq_i), coordinates ordered p1, q1, …, pn, qn."""

    n: int
    branches: Tuple[Tuple[PolyElement, ...], ...]
    labels: Tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        for k, images in enumerate(self.branches):
            if len(images) != 2 * self.n:
                raise PreconditionError(f"branch {k + 1} has {len(images)} coordinates, expected {2 * self.n}")
            if not any(images):
                raise PreconditionError(f"branch {k + 1} is identically zero")
            if any(image.get((0,)) for image in images):
                raise PreconditionError(f"branch {k + 1} does not pass through the origin")

    def label(self, k: int) -> str:
        return self.labels[k] if k < len(self.labels) else f"B{k + 1}"

    def omega(self) -> List[List]:
        """Gram matrix of ω₀."""
        size = 2 * self.n
        matrix = [[QQ.zero] * size for _ in range(size)]
        for i in range(self.n):
            matrix[2 * i][2 * i + 1] = QQ.one
            matrix[2 * i + 1][2 * i] = -QQ.one
        return matrix


class LagrangianChart:
    """{p_i = ∂S/∂q_i (i ∉ J), q_j = −∂S/∂p_j (j ∈ J)} for a generating function S.

    S lives in the ring of the chart variables y_i (q_i for i ∉ J, p_i for
    i ∈ J) and has no constant or linear terms.
    """

    def __init__(self, n: int, polarization: Sequence[int], generating=None):
        self.n = n
        self.polarization = frozenset(polarization)
        names = tuple(f"p{i + 1}" if i in self.polarization else f"q{i + 1}" for i in range(n))
        self.ring = polynomial_ring(names)
        S = self.ring.zero if generating is None else self.ring(generating)
        if any(sum(monom) < 2 for monom in S.itermonoms()):
            raise PreconditionError("generating function must start in degree 2")
        self.generating = S

    def free_coordinate(self, i: int) -> int:
        """Scene index of y_i."""
        return 2 * i if i in self.polarization else 2 * i + 1

    def dependent_coordinate(self, i: int) -> int:
        return 2 * i + 1 if i in self.polarization else 2 * i

    def sign(self, i: int) -> int:
        """H_i = dependent_i + sign·∂S/∂y_i."""
        return 1 if i in self.polarization else -1

    def embedding(self) -> PolyMap:
        """y ↦ point of L in scene coordinates."""
        images = [self.ring.zero] * (2 * self.n)
        for i, y in enumerate(self.ring.gens):
            images[self.free_coordinate(i)] = y
            images[self.dependent_coordinate(i)] = -self.sign(i) * self.generating.diff(y)
        ambient = polynomial_ring(tuple(name for i in range(self.n) for name in (f"p{i + 1}", f"q{i + 1}")))
        return PolyMap(self.ring, ambient, images)

    def is_lagrangian(self) -> bool:
        f = self.embedding()
        ambient = f.target
        omega = DiffForm(ambient, 2, {(2 * i, 2 * i + 1): ambient.one for i in range(self.n)})
        return pullback(f, omega).is_zero()


def _all_polarizations(n: int) -> List[Tuple[int, ...]]:
    return [J for size in range(n + 1) for J in combinations(range(n), size)]


@lru_cache(maxsize=None)
def check_chart_shapes(n: int) -> None:
    """Every polarization with a generic cubic S gives a Lagrangian submanifold."""
    for J in _all_polarizations(n):
        probe = LagrangianChart(n, J)
        S = probe.ring.zero
        for degree in (2, 3):
            for k, exponents in enumerate(monomials_of_degree(tuple([1] * n), degree)):
                S += probe.ring({exponents: QQ(k + 1, degree)})
        if not LagrangianChart(n, J, S).is_lagrangian():
            raise PreconditionError(f"polarization {J} does not give a Lagrangian chart")


def tangency_order(images: Sequence[PolyElement], chart: LagrangianChart):
    """min_i ord_t H_i(b(t)) for a chart with fixed S."""
    t = series_ring()
    ys = [images[chart.free_coordinate(i)] for i in range(chart.n)]
    f = PolyMap(t, chart.ring, ys)
    order = INF
    for i, y in enumerate(chart.ring.gens):
        h = images[chart.dependent_coordinate(i)] + f(chart.generating.diff(y)) * chart.sign(i)
        order = min(order, t_order(h))
    return order


class TangencyOrder(NamedTuple):
    value: object
    certificate: Optional[str] = None


class _ChartSystem:
    """Truncated images of the chart conditions for one polarization."""

    def __init__(self, scene: SymplecticScene, indices: Sequence[int], chart: LagrangianChart, precision: int):
        self.chart = chart
        self.precision = precision
        t = series_ring()
        self.gen = t.gens[0]
        self.branches = [scene.branches[k] for k in indices]
        self.ys = [[rs_trunc(images[chart.free_coordinate(i)], self.gen, precision) for i in range(chart.n)] for images in self.branches]
        self.dependent = [
            [rs_trunc(images[chart.dependent_coordinate(i)], self.gen, precision) for i in range(chart.n)]
            for images in self.branches
        ]
        self._images: List[Dict[tuple, PolyElement]] = [{(0,) * chart.n: t.one} for _ in self.branches]
        self._columns: Dict[int, List[Tuple[tuple, Dict]]] = {}

    def monomial_image(self, b: int, exponents: tuple) -> PolyElement:
        cache = self._images[b]
        image = cache.get(exponents)
        if image is None:
            l = next(i for i, e in enumerate(exponents) if e)
            lower = exponents[:l] + (exponents[l] - 1,) + exponents[l + 1:]
            image = rs_mul(self.monomial_image(b, lower), self.ys[b][l], self.gen, self.precision)
            cache[exponents] = image
        return image

    def columns(self, max_degree: int) -> List[Tuple[tuple, Dict]]:
        """Unknown S coefficients with their contributions {(b, i, e): value}."""
        columns = []
        for degree in range(2, max_degree + 1):
            columns.extend(self._degree_columns(degree))
        return columns

    def _degree_columns(self, degree: int) -> List[Tuple[tuple, Dict]]:
        cached = self._columns.get(degree)
        if cached is not None:
            return cached
        n = self.chart.n
        columns = []
        for exponents in monomials_of_degree(tuple([1] * n), degree):
            entries = {}
            for i in range(n):
                if not exponents[i]:
                    continue
                lower = exponents[:i] + (exponents[i] - 1,) + exponents[i + 1:]
                for b in range(len(self.branches)):
                    image = self.monomial_image(b, lower)
                    for (e,), value in image.items():
                        entries[(b, i, e)] = value * exponents[i] * self.chart.sign(i)
            if entries:
                columns.append((exponents, entries))
        self._columns[degree] = columns
        return columns

    def feasible(self, k: int) -> Optional[PolyElement]:
        """Generating function S with t(f_b, L_S) ≥ k for every branch, or None."""
        columns = [c for c in self.columns(k) if any(key[2] < k for key in c[1])]
        keys = [(b, i, e) for b in range(len(self.branches)) for i in range(self.chart.n) for e in range(k)]
        rows = [[entries.get(key, QQ.zero) for _, entries in columns] for key in keys]
        rhs = [-t_coefficient(self.dependent[b][i], e) for b, i, e in keys]
        solution = solve_linear(rows, rhs, len(columns))
        if solution is None:
            return None
        return self.chart.ring({exponents: v for (exponents, _), v in zip(columns, solution.particular) if v})


def _contains(scene: SymplecticScene, indices: Sequence[int], ceiling: int) -> Optional[LagrangianChart]:
    """A chart with S of degree ≤ ceiling containing every selected branch, if one exists."""
    top = max(image.degree() for k in indices for image in scene.branches[k] if image)
    precision = top * ceiling + 1
    for J in _all_polarizations(scene.n):
        system = _ChartSystem(scene, indices, LagrangianChart(scene.n, J), precision)
        S = _exact_solution(system, ceiling)
        if S is not None:
            return LagrangianChart(scene.n, J, S)
    return None


def _exact_solution(system: _ChartSystem, ceiling: int) -> Optional[PolyElement]:
    columns = system.columns(ceiling)
    keys = sorted({key for _, entries in columns for key in entries} | {
        (b, i, e)
        for b in range(len(system.branches))
        for i in range(system.chart.n)
        for (e,) in system.dependent[b][i].itermonoms()
    })
    rows = [[entries.get(key, QQ.zero) for _, entries in columns] for key in keys]
    rhs = [-t_coefficient(system.dependent[b][i], e) for b, i, e in keys]
    solution = solve_linear(rows, rhs, len(columns))
    if solution is None:
        return None
    return system.chart.ring({exponents: v for (exponents, _), v in zip(columns, solution.particular) if v})


def lt_multigerm(
    scene: SymplecticScene,
    indices: Sequence[int] = None,
    ceiling: int = None,
    zero_restriction: Optional[bool] = None,
) -> TangencyOrder:
    """Lagrangian tangency order of the selected branches (0-based indices).

    ``zero_restriction`` is the known answer to "does the symplectic form
    restrict to zero on these branches"; True certifies ∞ directly. Without
    it, ∞ needs an explicit Lagrangian submanifold containing the branches.
    """
    ceiling = EngineConfig.LT_CEILING if ceiling is None else ceiling
    indices = list(range(len(scene.branches))) if indices is None else sorted(indices)
    if not indices:
        raise PreconditionError("at least one branch is required")
    if zero_restriction:
        return TangencyOrder(INF, ZERO_RESTRICTION_NOTE)
    check_chart_shapes(scene.n)

    systems = [
        _ChartSystem(scene, indices, LagrangianChart(scene.n, J), ceiling + 1)
        for J in _all_polarizations(scene.n)
    ]
    best = 1
    for k in range(2, ceiling + 1):
        systems = [s for s in systems if s.feasible(k) is not None]
        if not systems:
            break
        best = k
        logger.debug("%s%s: tangency order ≥ %d in %d charts", scene.name, indices, k, len(systems))
    else:
        if zero_restriction is None:
            chart = _contains(scene, indices, ceiling)
            if chart is not None:
                return TangencyOrder(INF, CONTAINMENT_NOTE)
        raise BoundExhaustedError(f"tangency order of {scene.name or 'scene'} reaches {ceiling}; increase ceiling")
    return TangencyOrder(best)


# -- geometric frame ----------------------------------------------------------

def _independent(vectors: Sequence[Sequence], candidate: Sequence) -> bool:
    if not any(candidate):
        return False
    return RowSpace(list(vectors) + [candidate], len(candidate)).rank > len(vectors)


def _bilinear(matrix: Sequence[Sequence], u: Sequence, v: Sequence):
    return sum((u[i] * matrix[i][j] * v[j] for i in range(len(u)) for j in range(len(v)) if u[i] and v[j]), QQ.zero)


def _jets(images: Sequence[PolyElement]) -> List[tuple]:
    top = max(image.degree() for image in images if image)
    jets = [tuple(t_coefficient(image, k) for image in images) for k in range(1, top + 1)]
    return [jet for jet in jets if any(jet)]


@dataclass(frozen=True)
class GeometricFrame:
    l1: tuple
    l2: tuple
    V: Tuple[tuple, ...]
    W: Tuple[tuple, ...]


def build_frame(branches: Sequence[Sequence[PolyElement]]) -> GeometricFrame:
    """Tangent lines of the first two branches, V from the singular branch, W across all branches."""
    if len(branches) < 2:
        raise FrameDegenerateError("the frame needs at least two branches")
    tangents = [_jets(images)[0] for images in branches]
    singular = [k for k, images in enumerate(branches) if min(t_order(image) for image in images) > 1]
    if not singular:
        raise FrameDegenerateError("no singular branch")
    jets = _jets(branches[singular[0]])

    V = []
    for jet in jets:
        if len(V) < 2 and _independent(V, jet):
            V.append(jet)
    if len(V) < 2:
        raise FrameDegenerateError("singular branch spans fewer than two directions")
    W = []
    for vector in tangents + jets:
        if len(W) < 3 and _independent(W, vector):
            W.append(vector)
    if len(W) < 3:
        raise FrameDegenerateError("branches span fewer than three directions")
    return GeometricFrame(tangents[0], tangents[1], tuple(V), tuple(W))


@dataclass(frozen=True)
class GeometricConditions:
    v_isotropic: bool
    l1_l2_isotropic: bool
    kernel_is_l2: bool
    w_isotropic: bool

    def as_dict(self) -> Dict[str, bool]:
        return {
            "omega_V_zero": self.v_isotropic,
            "omega_l1_l2_zero": self.l1_l2_isotropic,
            "kernel_W_is_l2": self.kernel_is_l2,
            "omega_W_zero": self.w_isotropic,
        }


def frame_conditions(frame: GeometricFrame, matrix: Sequence[Sequence]) -> GeometricConditions:
    gram = [[_bilinear(matrix, u, v) for v in frame.W] for u in frame.W]
    w_zero = not any(any(row) for row in gram)
    kernel_is_l2 = False
    if not w_zero:
        solution = solve_linear(gram, [0, 0, 0], 3)
        if solution.dimension == 1:
            k = solution.kernel[0]
            direction = [sum((k[a] * frame.W[a][i] for a in range(3)), QQ.zero) for i in range(len(frame.l2))]
            kernel_is_l2 = RowSpace([direction, frame.l2], len(direction)).rank == 1
    return GeometricConditions(
        v_isotropic=not _bilinear(matrix, frame.V[0], frame.V[1]),
        l1_l2_isotropic=not _bilinear(matrix, frame.l1, frame.l2),
        kernel_is_l2=kernel_is_l2,
        w_isotropic=w_zero,
    )


def geometric_conditions(scene: SymplecticScene) -> GeometricConditions:
    return frame_conditions(build_frame(scene.branches), scene.omega())


def constant_gram(omega: DiffForm) -> List[List]:
    """Gram matrix of ω at the origin."""
    size = omega.ring.ngens
    matrix = [[QQ.zero] * size for _ in range(size)]
    zero = (0,) * size
    for (i, j), coeff in omega.terms.items():
        value = coeff.get(zero, QQ.zero)
        matrix[i][j] = value
        matrix[j][i] = -value
    return matrix


def forms_geometric_conditions(space: RestrictionSpace, omega: DiffForm) -> GeometricConditions:
    """The frame of the germ's branches, padded with zeros, against ω(0)."""
    extra = omega.ring.ngens - space.germ.dimension
    if extra < 0:
        raise PreconditionError("form lives on fewer variables than the germ")
    t = series_ring()
    branches = [tuple(branch.images) + (t.zero,) * extra for branch in space.germ.branches]
    return frame_conditions(build_frame(branches), constant_gram(omega))


# -- report -------------------------------------------------------------------

@dataclass
class InvariantReport:
    ind: object
    ind2: object
    mu: int
    cod: Optional[int]
    lt: object = None
    subsets: Dict[str, object] = field(default_factory=dict)
    geometry: Optional[GeometricConditions] = None
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ind": None if self.ind is None else format_order(self.ind),
            "ind2": None if self.ind2 is None else format_order(self.ind2),
            "mu": self.mu,
            "cod": self.cod,
            "Lt": None if self.lt is None else format_order(self.lt),
            "subsets": {label: format_order(value) for label, value in self.subsets.items()},
            "geometry": None if self.geometry is None else self.geometry.as_dict(),
            "notes": list(self.notes),
        }
