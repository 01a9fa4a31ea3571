"""Infinitesimal actions of tangent fields and normal-form reduction.

Coordinates here are always closed coordinates: one rational per closed basis
element θ_j of a restriction space.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import sympy
from sympy.polys.domains import QQ

from symplectic_restrictions.algebra import RowSpace, format_rational, kernel_basis, solve_linear, to_rational
from symplectic_restrictions.errors import NotClosedError, NotTangentError, PreconditionError
from symplectic_restrictions.forms import DiffForm, lie_derivative
from symplectic_restrictions.germ import TangentField, apply_sign, euler_tangent_fields, is_tangent
from symplectic_restrictions.restriction import AlgRestriction, RestrictionSpace, restrict

logger = logging.getLogger(__name__)

CANONICALIZATION_NOTE = "canonicalization: artifact-defined"
IRRATIONAL_ROOT_NOTE = (
    "leading coefficient kept: its scaling root is irrational; "
    "the normal form is unscaled and the moduli are given after scaling the leading coefficient to 1"
)


def tangent_fields(space: RestrictionSpace) -> List[TangentField]:
    """g·E fields that can act nontrivially on the closed restrictions."""
    with space.lock:
        fields = space.cache.get("fields")
        if fields is None:
            degrees = space.closed_degrees
            span = max(degrees) - min(degrees) if degrees else 0
            fields = euler_tangent_fields(space.germ, span)
            space.cache["fields"] = fields
        return fields


def action_columns(space: RestrictionSpace, X: TangentField) -> Tuple[tuple, ...]:
    """Closed coordinates of [L_X θ_j] for every closed basis element."""
    key = ("action", X.label)
    with space.lock:
        cached = space.cache.get(key)
    if cached is not None:
        return cached
    if not is_tangent(space.germ, X.field):
        raise NotTangentError(f"{X.label} is not tangent to {space.germ.name}")
    columns = []
    for k in space.closed_indices:
        image = restrict(space, lie_derivative(X.field, space.basis[k].form))
        if not image.is_closed:
            raise NotClosedError(f"L_{X.label} {space.basis[k].label} left the closed subspace")
        columns.append(image.closed_coordinates)
    columns = tuple(columns)
    with space.lock:
        space.cache[key] = columns
    return columns


def action_matrix(space: RestrictionSpace, X: TangentField) -> Dict[str, AlgRestriction]:
    """θ_j ↦ [L_X θ_j]."""
    return {
        space.basis[k].label: space.from_closed(column)
        for k, column in zip(space.closed_indices, action_columns(space, X))
    }


def apply_columns(columns: Sequence[Sequence], coefficients: Sequence) -> list:
    """Σ_j c_j·column_j."""
    result = [QQ.zero] * (len(columns[0]) if columns else 0)
    for c, column in zip(coefficients, columns):
        if c:
            result = [r + c * v for r, v in zip(result, column)]
    return result


@dataclass(frozen=True)
class ActionTable:
    """Rows are tangent fields; entry (X, θ_j) is the closed coordinate vector of [L_X θ_j]."""

    space: RestrictionSpace
    fields: Tuple[TangentField, ...]
    rows: Tuple[Tuple[tuple, ...], ...]

    def entry(self, field_label: str, theta_label: str) -> Dict[str, str]:
        row = [f.label for f in self.fields].index(field_label)
        column = [self.space.basis[k].label for k in self.space.closed_indices].index(theta_label)
        return _closed_dict(self.space, self.rows[row][column])

    def as_dict(self) -> Dict[str, Dict[str, Dict[str, str]]]:
        labels = [self.space.basis[k].label for k in self.space.closed_indices]
        return {
            f.label: {labels[j]: _closed_dict(self.space, column) for j, column in enumerate(row)}
            for f, row in zip(self.fields, self.rows)
        }


def _closed_dict(space: RestrictionSpace, vector: Sequence) -> Dict[str, str]:
    labels = [space.basis[k].label for k in space.closed_indices]
    return {label: format_rational(v) for label, v in zip(labels, vector) if v}


def action_table(space: RestrictionSpace, fields: Sequence[TangentField] = None) -> ActionTable:
    fields = tuple(tangent_fields(space) if fields is None else fields)
    return ActionTable(space, fields, tuple(action_columns(space, X) for X in fields))


def orbit_tangent_span(space: RestrictionSpace, a: AlgRestriction, fields: Sequence[TangentField] = None) -> RowSpace:
    """span{[L_X ω] : X in fields} for [ω] = a."""
    if not a.is_closed:
        raise NotClosedError("orbit tangent space is defined on closed restrictions only")
    fields = tangent_fields(space) if fields is None else fields
    coefficients = a.closed_coordinates
    vectors = [apply_columns(action_columns(space, X), coefficients) for X in fields]
    return RowSpace(vectors, space.closed_dimension)


@dataclass(frozen=True)
class ClassTemplate:
    """Stratum predicate plus the shape of the normal form, indices 0-based."""

    family: str
    index: str
    lead: Optional[int]
    moduli: Tuple[int, ...] = ()
    fixed: Dict[int, object] = field(default_factory=dict)
    nonzero: Tuple[int, ...] = ()
    zero: Tuple[int, ...] = ()
    relations: Tuple[Tuple[int, object, int], ...] = ()
    exclusions: Tuple[Tuple[int, object, int], ...] = ()

    def matches(self, c: Sequence) -> bool:
        if any(not c[j] for j in self.nonzero) or any(c[j] for j in self.zero):
            return False
        if any(c[j] != to_rational(f) * c[k] for j, f, k in self.relations):
            return False
        return not any(c[j] == to_rational(f) * c[k] for j, f, k in self.exclusions)

    def kept(self) -> set:
        kept = set(self.moduli) | set(self.fixed)
        if self.lead is not None:
            kept.add(self.lead)
        return kept

    def normal_form(self, size: int, moduli: Sequence, sign: int = 1) -> List:
        """Closed coordinates of the normal form with the given moduli."""
        if len(moduli) != len(self.moduli):
            raise PreconditionError(f"class {self.index} takes {len(self.moduli)} moduli, got {len(moduli)}")
        coordinates = [QQ.zero] * size
        if self.lead is None:
            return coordinates
        coordinates[self.lead] = QQ(sign)
        for j, value in self.fixed.items():
            coordinates[j] = QQ(sign) * to_rational(value)
        for j, value in zip(self.moduli, moduli):
            coordinates[j] = to_rational(value)
        return coordinates


@dataclass(frozen=True)
class ClassLabel:
    family: str
    index: str
    sign: Optional[int] = None
    moduli: Tuple = ()

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "index": self.index,
            "sign": None if self.sign is None else ("+" if self.sign > 0 else "-"),
            "moduli": [format_exact(m) for m in self.moduli],
        }


def format_exact(value) -> str:
    if isinstance(value, sympy.Basic):
        return format_rational(value) if value.is_Rational else str(value)
    return format_rational(value)


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # "flow", "scale" or "sign"
    degree: Optional[int]
    parameters: Tuple
    before: Tuple
    after: Tuple


@dataclass
class ReductionTrace:
    steps: List[ReductionStep] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def replay(self, space: RestrictionSpace, coordinates: Sequence) -> list:
        """Re-apply every recorded step to ``coordinates``."""
        current = [to_rational(c) for c in coordinates]
        fields = tangent_fields(space)
        for step in self.steps:
            if step.kind == "flow":
                labels = dict(step.parameters)
                active = [(X, labels[X.label]) for X in fields if X.label in labels]
                current = _flow(space, active, current)
            elif step.kind == "scale":
                current = [f * c for f, c in zip(step.parameters, current)]
            elif step.kind == "sign":
                current = _sign_apply(space, step.parameters, current)
        return current

    def as_list(self, space: RestrictionSpace) -> List[dict]:
        return [
            {
                "kind": s.kind,
                "degree": s.degree,
                "parameters": _format_parameters(s),
                "before": _closed_dict(space, s.before),
                "after": _closed_dict(space, s.after),
            }
            for s in self.steps
        ]


def _format_parameters(step: ReductionStep):
    if step.kind == "flow":
        return {label: format_rational(v) for label, v in step.parameters}
    if step.kind == "scale":
        return [format_rational(v) for v in step.parameters]
    return list(step.parameters)


class Reduction(NamedTuple):
    label: ClassLabel
    normal_form: AlgRestriction
    trace: ReductionTrace


def _flow(space: RestrictionSpace, active: Sequence[Tuple[TangentField, object]], c: Sequence) -> list:
    """exp(Σ λ_X L_X) applied to c; the operator strictly raises degree, so the series is finite."""
    def generator(v):
        total = [QQ.zero] * len(v)
        for X, coefficient in active:
            image = apply_columns(action_columns(space, X), v)
            total = [t + coefficient * i for t, i in zip(total, image)]
        return total

    result = list(c)
    term = list(c)
    for k in range(1, len(c) + 2):
        term = [v / k for v in generator(term)]
        if not any(term):
            break
        result = [r + t for r, t in zip(result, term)]
    return result


def sign_matrix(space: RestrictionSpace, sign: Sequence[int]) -> Tuple[tuple, ...]:
    """Columns: closed coordinates of θ_j pulled back by x ↦ (ε_i x_i)."""
    key = ("sign", tuple(sign))
    with space.lock:
        cached = space.cache.get(key)
    if cached is not None:
        return cached
    columns = []
    for k in space.closed_indices:
        form = space.basis[k].form
        terms = {}
        for index, coeff in form.terms.items():
            factor = 1
            for i in index:
                factor *= sign[i]
            terms[index] = apply_sign(sign, coeff) * factor
        columns.append(restrict(space, DiffForm(form.ring, form.degree, terms)).closed_coordinates)
    columns = tuple(columns)
    with space.lock:
        space.cache[key] = columns
    return columns


def _sign_apply(space: RestrictionSpace, sign: Sequence[int], c: Sequence) -> list:
    return apply_columns(sign_matrix(space, sign), c)


def symmetry_group(space: RestrictionSpace) -> List[Tuple[int, ...]]:
    """All products of the germ's sign generators, identity first."""
    m = space.germ.dimension
    group = {tuple([1] * m)}
    frontier = list(group)
    while frontier:
        element = frontier.pop()
        for generator in space.germ.symmetries:
            product_ = tuple(a * b for a, b in zip(element, generator))
            if product_ not in group:
                group.add(product_)
                frontier.append(product_)
    return sorted(group, key=lambda s: (sum(1 for x in s if x < 0), tuple(-x for x in s)))


def _killable(space, fields, c, degree, lower) -> Tuple[int, ...]:
    """Coordinates at ``degree`` that some flow can move without touching lower degrees."""
    images = [apply_columns(action_columns(space, X), c) for X in fields]
    constraints = [[image[j] for image in images] for j in lower]
    free = kernel_basis(constraints, len(fields)) if constraints else [
        tuple(QQ.one if i == k else QQ.zero for i in range(len(fields))) for k in range(len(fields))
    ]
    level = [j for j, d in enumerate(space.closed_degrees) if d == degree]
    vectors = [[sum((lam * image[j] for lam, image in zip(kvec, images)), QQ.zero) for j in level] for kvec in free]
    span = RowSpace(vectors, len(level))
    return tuple(level[p] for p in span.pivots)


def _eliminate(space: RestrictionSpace, c: list, kill: set, trace: ReductionTrace, generic: bool) -> Tuple[list, set]:
    degrees = space.closed_degrees
    fields = [X for X in tangent_fields(space) if X.degree > 0]
    killed = set()
    for degree in sorted(set(degrees)):
        lower = [j for j, d in enumerate(degrees) if d < degree]
        if generic:
            targets = [j for j in _killable(space, fields, c, degree, lower)]
        else:
            targets = [j for j, d in enumerate(degrees) if d == degree and j in kill]
        killed.update(targets)
        if not any(c[j] for j in targets):
            continue
        images = [apply_columns(action_columns(space, X), c) for X in fields]
        rows = [[image[j] for image in images] for j in lower + targets]
        rhs = [QQ.zero] * len(lower) + [-c[j] for j in targets]
        solution = solve_linear(rows, rhs, len(fields))
        if solution is None:
            raise PreconditionError(f"{space.germ.name}: degree {degree} cannot be eliminated for this class")
        active = [(X, lam) for X, lam in zip(fields, solution.particular) if lam]
        after = _flow(space, active, c)
        trace.steps.append(
            ReductionStep("flow", degree, tuple((X.label, lam) for X, lam in active), tuple(c), tuple(after))
        )
        logger.debug("%s: eliminated degree %d with %s", space.germ.name, degree, [X.label for X, _ in active])
        c = after
    return c, killed


def _as_sympy(value) -> sympy.Rational:
    return sympy.Rational(int(QQ.numer(value)), int(QQ.denom(value)))


def _rational_root(value, degree: int):
    root = _as_sympy(value) ** sympy.Rational(1, degree)
    return root if root.is_Rational else None


def reduce(space: RestrictionSpace, a: AlgRestriction, templates: Sequence[ClassTemplate] = None) -> Reduction:
    """Bring a closed restriction to its normal form.

    Lowest degree first, each level is cleared by the time-one flow of a
    combination of g·E fields chosen so that no lower level moves. The sign
    symmetries then pick the representative whose (lead sign, moduli) is
    smallest, and the weighted scaling brings the leading coefficient to ±1.
    """
    if not a.is_closed:
        raise NotClosedError("reduce needs the restriction of a closed form")
    c = list(a.closed_coordinates)
    trace = ReductionTrace()
    degrees = space.closed_degrees

    template = None
    if templates:
        template = next((t for t in templates if t.matches(c)), None)
        if template is None:
            raise PreconditionError(f"{space.germ.name}: no class matches coefficients {[format_rational(x) for x in c]}")
        kill = set(range(len(c))) - template.kept()
        c, _ = _eliminate(space, c, kill, trace, generic=False)
        lead = template.lead
        moduli_indices = template.moduli
    else:
        c, killed = _eliminate(space, c, set(), trace, generic=True)
        order = sorted(range(len(c)), key=lambda j: (degrees[j], j))
        lead = next((j for j in order if c[j]), None)
        moduli_indices = tuple(j for j in order if j not in killed and j != lead and (lead is None or degrees[j] >= degrees[lead]))

    lead_sign = None
    moduli = tuple(c[j] for j in moduli_indices)
    if lead is not None:
        group = symmetry_group(space)
        best = None
        for sign in group:
            candidate = _sign_apply(space, sign, c)
            key = (0 if candidate[lead] > 0 else 1, tuple(candidate[j] for j in moduli_indices))
            if best is None or key < best[0]:
                best = (key, sign, candidate)
        _, sign, candidate = best
        if any(s < 0 for s in sign):
            trace.steps.append(ReductionStep("sign", None, tuple(sign), tuple(c), tuple(candidate)))
            c = candidate
        if len(group) > 1:
            trace.notes.append(CANONICALIZATION_NOTE)

        magnitude = abs(c[lead])
        root = _rational_root(magnitude, degrees[lead])
        if root is None:
            scale = _as_sympy(magnitude)
            moduli = tuple(_as_sympy(c[j]) * scale ** sympy.Rational(-degrees[j], degrees[lead]) for j in moduli_indices)
            trace.notes.append(IRRATIONAL_ROOT_NOTE)
        else:
            if root != 1:
                factors = tuple(QQ.one / to_rational(root) ** d for d in degrees)
                after = [f * x for f, x in zip(factors, c)]
                trace.steps.append(ReductionStep("scale", None, factors, tuple(c), tuple(after)))
                c = after
            moduli = tuple(c[j] for j in moduli_indices)
        if all(sign_matrix(space, s)[lead][lead] > 0 for s in group):
            lead_sign = 1 if c[lead] > 0 else -1

    if template is not None:
        family, index = template.family, template.index
    else:
        family = space.germ.name
        index = "zero" if lead is None else f"lead {space.basis[space.closed_indices[lead]].label}"
    label = ClassLabel(family, index, lead_sign, moduli)
    return Reduction(label, space.from_closed(c), trace)


def find_template(templates: Sequence[ClassTemplate], index: str) -> ClassTemplate:
    template = next((t for t in templates if t.index == index), None)
    if template is None:
        raise PreconditionError(f"unknown class {index!r}")
    return template


def class_codimension(space: RestrictionSpace, template: ClassTemplate, moduli: Sequence = None, sign: int = 1) -> int:
    """dim[Z²] − (orbit tangent dimension at the normal form + number of moduli)."""
    moduli = moduli if moduli is not None else [QQ(k + 2) for k in range(len(template.moduli))]
    normal_form = space.from_closed(template.normal_form(space.closed_dimension, moduli, sign))
    return space.closed_dimension - orbit_tangent_span(space, normal_form).rank - len(template.moduli)


def random_orbit_point(space: RestrictionSpace, coefficients: Sequence, rng) -> list:
    """Move a coefficient vector along its orbit: random flow, positive scaling and sign."""
    c = [to_rational(x) for x in coefficients]
    fields = [X for X in tangent_fields(space) if X.degree > 0]
    active = [(X, QQ(rng.randint(-3, 3), rng.randint(1, 3))) for X in fields]
    c = _flow(space, active, c)
    t = QQ(rng.randint(1, 3), rng.randint(1, 3))
    c = [t ** d * x for d, x in zip(space.closed_degrees, c)]
    group = symmetry_group(space)
    return _sign_apply(space, group[rng.randrange(len(group))], c)
