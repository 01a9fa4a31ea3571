"""Command implementations shared by the CLI and the HTTP API.

Every command returns a ``Report``; rendering and exit handling belong to the
callers.
"""

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from symplectic_restrictions.algebra import format_order, format_rational, to_rational
from symplectic_restrictions.catalog import (
    FAMILIES,
    GermRecord,
    build_realizing_form,
    build_scene,
    expected_tables,
    form_from_entries,
    instantiate_moduli,
    load_family,
    moduli_vector,
    normal_form_coordinates,
)
from symplectic_restrictions.classifier import (
    action_table,
    class_codimension,
    find_template,
    orbit_tangent_span,
    reduce,
    tangent_fields,
)
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import FrameDegenerateError, ParseError, PreconditionError, UnknownNameError
from symplectic_restrictions.invariants import (
    InvariantReport,
    forms_geometric_conditions,
    geometric_conditions,
    index_of_isotropy,
    lt_multigerm,
    restrict_to_branches,
    singular_index_of_isotropy,
    symplectic_multiplicity,
)
from symplectic_restrictions.models import Report, SceneFile, load_germ_file
from symplectic_restrictions.restriction import RestrictionSpace, build_space, restrict
from symplectic_restrictions.verify import run_verify

logger = logging.getLogger(__name__)

LAGRANGIAN_NOTE = "zero restriction: contained in a smooth Lagrangian submanifold"
EXTENDED_NOTE = "{column}: artifact-extended"


@dataclass
class GermTarget:
    name: str
    space: RestrictionSpace
    record: Optional[GermRecord] = None

    @property
    def templates(self):
        return self.record.templates if self.record else None


def resolve_germ(spec: str, bound: int = None) -> GermTarget:
    """A built-in family name or the path of a germ file."""
    if spec.upper() in FAMILIES:
        record = load_family(spec, bound)
        return GermTarget(record.family, record.space, record)
    path = Path(spec)
    if not path.exists():
        raise UnknownNameError(f"unknown germ {spec!r}: not a built-in family and no such file")
    germ = load_germ_file(path).to_germ()
    return GermTarget(germ.name, build_space(germ, bound))


def _report(command: Dict, results, notes: Sequence[str] = (), exit_code: int = 0, **bounds) -> Report:
    return Report(
        command=command,
        bounds=EngineConfig.snapshot(**bounds),
        results=results,
        notes=sorted(set(notes)),
        exit_code=exit_code,
    )


def basis_report(germ: str, bound: int = None) -> Report:
    target = resolve_germ(germ, bound)
    space = target.space
    results = {
        "germ": target.name,
        "dimension": space.dimension,
        "closed_dimension": space.closed_dimension,
        "closed_degrees": list(space.closed_degrees),
        "basis": [
            {"label": b.label, "degree": b.degree, "closed": b.closed, "form": repr(b.form)}
            for b in space.basis
        ],
    }
    notes = [
        f"degree {degree}: ideal dimension {on_branches} on branches, {from_equations} from equations"
        for degree, (on_branches, from_equations) in sorted(space.germ.discrepancies.items())
    ]
    return _report({"name": "basis", "germ": germ}, results, notes, degree_bound=bound)


def action_table_report(germ: str, bound: int = None) -> Report:
    target = resolve_germ(germ, bound)
    fields = target.record.fields() if target.record else tangent_fields(target.space)
    table = action_table(target.space, fields)
    results = {
        "germ": target.name,
        "fields": [{"row": f"X{k}", "label": f.label, "degree": f.degree} for k, f in enumerate(fields)],
        "table": table.as_dict(),
    }
    return _report({"name": "action-table", "germ": germ}, results, degree_bound=bound)


def parse_coefficients(text) -> List:
    """Comma separated rationals, or a list of them."""
    items = text.split(",") if isinstance(text, str) else list(text)
    if not items or any(not str(item).strip() for item in items):
        raise ParseError("empty coefficient in list")
    return [to_rational(str(item)) for item in items]


def classify_report(germ: str, coeffs, bound: int = None) -> Report:
    target = resolve_germ(germ, bound)
    space = target.space
    values = parse_coefficients(coeffs)
    if len(values) != space.closed_dimension:
        raise ParseError(f"{target.name} takes {space.closed_dimension} coefficients, got {len(values)}")
    reduction = reduce(space, space.from_closed(values), target.templates)
    nf = reduction.normal_form
    mu = space.closed_dimension - orbit_tangent_span(space, nf).rank
    notes = list(reduction.trace.notes)
    cod = None
    if target.templates:
        cod = mu - len(find_template(target.templates, reduction.label.index).moduli)
    if not any(nf.coordinates):
        notes.append(LAGRANGIAN_NOTE)
    results = {
        "germ": target.name,
        "coefficients": [format_rational(v) for v in values],
        "class": reduction.label.as_dict(),
        "normal_form": nf.as_dict(),
        "trace": reduction.trace.as_list(space),
        "cod": cod,
        "mu": mu,
        "ind": format_order(index_of_isotropy(space, nf)),
    }
    return _report(
        {"name": "classify", "germ": germ, "coeffs": [format_rational(v) for v in values]},
        results, notes, degree_bound=bound,
    )


def _moduli_values(record, class_record, moduli, seed: int) -> Dict:
    if moduli:
        values = parse_coefficients(moduli)
        if len(values) != len(class_record.parameters):
            raise ParseError(
                f"class {class_record.index} takes {len(class_record.parameters)} moduli, got {len(values)}"
            )
        return dict(zip(class_record.parameters, values))
    return instantiate_moduli(class_record, random.Random(f"{seed}:{record.family}:{class_record.index}"))


def class_invariants_report(
    germ: str,
    label: str,
    moduli=None,
    sign: int = 1,
    bound: int = None,
    ceiling: int = None,
    seed: int = None,
) -> Report:
    """Invariants of a catalog class at the given (or seeded) moduli."""
    seed = EngineConfig.SEED if seed is None else seed
    if germ.upper() not in FAMILIES:
        raise UnknownNameError(f"classes are only stored for {', '.join(FAMILIES)}")
    record = load_family(germ, bound)
    class_record = record.find_class(label)
    if sign not in (1, -1) or (sign == -1 and not class_record.signed):
        raise PreconditionError(f"class {label} has no sign choice")
    space = record.space
    values = _moduli_values(record, class_record, moduli, seed)
    nf = space.from_closed(normal_form_coordinates(space, class_record, values, sign))
    scene = build_scene(record.family, class_record, values, sign)
    omega = build_realizing_form(space, class_record, values, sign)

    notes = [EXTENDED_NOTE.format(column=column) for column in record.extended]
    lt = lt_multigerm(scene, ceiling=ceiling, zero_restriction=not any(nf.coordinates))
    if lt.certificate:
        notes.append(f"Lt: {lt.certificate}")
    subsets = {}
    for name, indices in record.subsets.items():
        zero = not any(restrict_to_branches(space, nf, indices).coordinates)
        order = lt_multigerm(scene, indices, ceiling=ceiling, zero_restriction=zero)
        subsets[name] = order.value
        if order.certificate:
            notes.append(f"{name}: {order.certificate}")

    report = InvariantReport(
        ind=index_of_isotropy(space, nf),
        ind2=singular_index_of_isotropy(space, nf),
        mu=symplectic_multiplicity(space, nf),
        cod=class_codimension(space, class_record.template, moduli_vector(class_record, values), sign),
        lt=lt.value,
        subsets=subsets,
        geometry=forms_geometric_conditions(space, omega),
        notes=notes,
    )
    results = {
        "germ": record.family,
        "class": label,
        "sign": ("+" if sign > 0 else "-") if class_record.signed else None,
        "moduli": {name: format_rational(values[name]) for name in class_record.parameters},
        "normal_form": nf.as_dict(),
        "realizing_form": repr(omega),
        "invariants": report.as_dict(),
        "scene_geometry": geometric_conditions(scene).as_dict(),
    }
    command = {"name": "invariants", "germ": germ, "class": label, "sign": sign,
               "moduli": [format_rational(v) for v in moduli_vector(class_record, values)]}
    return _report(command, results, notes, degree_bound=bound, lt_ceiling=ceiling, seed=seed)


def scene_invariants_report(scene_file: SceneFile, ceiling: int = None, bound: int = None) -> Report:
    """Tangency orders and frame conditions of a user scene.

    With a germ and a realizing form, the restriction invariants of the form
    are reported too. Infinite orders need an explicit Lagrangian containment.
    """
    scene = scene_file.to_scene()
    notes = []
    lt = lt_multigerm(scene, ceiling=ceiling)
    if lt.certificate:
        notes.append(f"Lt: {lt.certificate}")
    subsets = {}
    for name, indices in sorted(scene_file.subsets.items()):
        order = lt_multigerm(scene, [i - 1 for i in indices], ceiling=ceiling)
        subsets[name] = order.value
        if order.certificate:
            notes.append(f"{name}: {order.certificate}")
    try:
        geometry = geometric_conditions(scene)
    except FrameDegenerateError as exc:
        geometry = None
        notes.append(f"geometry: {exc.message}")

    ind = ind2 = mu = None
    restriction = None
    if scene_file.form is not None and scene_file.germ is not None:
        space = load_family(scene_file.germ, bound).space
        a = restrict(space, form_from_entries(scene_file.ambient_ring(), scene_file.form))
        restriction = a.as_dict()
        if a.is_closed:
            ind, ind2, mu = index_of_isotropy(space, a), singular_index_of_isotropy(space, a), symplectic_multiplicity(space, a)
    report = InvariantReport(ind=ind, ind2=ind2, mu=mu, cod=None, lt=lt.value, subsets=subsets, geometry=geometry, notes=notes)
    results = report.as_dict()
    results["scene"] = scene_file.name
    results["restriction"] = restriction
    return _report({"name": "invariants", "scene": scene_file.name}, results, notes, degree_bound=bound, lt_ceiling=ceiling)


def verify_report(
    family: str = "all", seed: int = None, workers: int = None, golden_dir: str = None, bound: int = None
) -> Report:
    golden = None
    if golden_dir:
        families = list(FAMILIES) if family.lower() == "all" else [family.upper()]
        golden = {
            name: expected_tables(name, Path(golden_dir) / f"{name.lower()}.json")
            for name in families
            if (Path(golden_dir) / f"{name.lower()}.json").exists()
        }
    result = run_verify(family, seed, workers, golden, bound)
    seed = result.seed
    return _report(
        {"name": "verify", "family": family, "seed": seed},
        result.as_dict(),
        exit_code=0 if result.passed else 1,
        seed=seed,
        degree_bound=bound,
    )
