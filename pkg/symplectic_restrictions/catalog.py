"""Built-in records for the U7, U8 and U9 germs.

Each family is a JSON file under ``data/``: the germ, its closed basis, the
tangent fields of the action table, one record per symplectic class (stratum,
normal form shape, realizing form completion, Darboux scene) and the expected
table values that ``verify`` recomputes.

Everything stored here is checked when a family is loaded: branches against
equations, scene branches against scene equations, and every realizing form
for closedness, nondegeneracy at 0 and its restriction to the germ.
"""

import json
import logging
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from symplectic_restrictions.algebra import parse_order, polynomial_ring, series_ring, to_rational
from symplectic_restrictions.classifier import ClassTemplate, tangent_fields
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import GermError, PreconditionError, UnknownNameError
from symplectic_restrictions.forms import DiffForm, basis_form, exterior_d, substitute
from symplectic_restrictions.germ import CurveGerm, TangentField, find_field, make_branch
from symplectic_restrictions.invariants import SymplecticScene, constant_gram
from symplectic_restrictions.parser import parse_polynomial
from symplectic_restrictions.restriction import RestrictionSpace, build_space, restrict

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data"
FAMILIES = ("U7", "U8", "U9")

# Symbols allowed in stored scenes and realizing forms besides the coordinates
PARAMETERS = ("c", "c1", "c2", "c3", "s")

_loaded: Dict[Tuple[str, Optional[int]], "GermRecord"] = {}
_load_lock = threading.Lock()


@dataclass(frozen=True)
class ClassRecord:
    template: ClassTemplate
    parameters: Tuple[str, ...]
    signed: bool
    avoid: Tuple[str, ...]
    completion: Tuple[Tuple[int, int], ...]
    n: int
    expected: Dict[str, object]
    scene: Dict[str, list]
    rows: Tuple[dict, ...]

    @property
    def index(self) -> str:
        return self.template.index

    @property
    def is_top(self) -> bool:
        return self.template.lead is None


@dataclass
class GermRecord:
    family: str
    germ: CurveGerm
    space: RestrictionSpace
    field_labels: Tuple[str, ...]
    subsets: Dict[str, Tuple[int, ...]]
    classes: Tuple[ClassRecord, ...]
    expected: dict = field(default_factory=dict)
    extended: Tuple[str, ...] = ()

    @property
    def templates(self) -> List[ClassTemplate]:
        return [record.template for record in self.classes]

    def fields(self) -> List[TangentField]:
        """The tangent fields of the action table, in table order."""
        available = tangent_fields(self.space)
        return [find_field(available, label) for label in self.field_labels]

    def find_class(self, index: str) -> ClassRecord:
        for record in self.classes:
            if record.index == index:
                return record
        raise UnknownNameError(f"{self.family} has no class {index!r}")


# -- germs from text ------------------------------------------------------------

def build_germ(
    name: str,
    variables: Sequence[str],
    weights: Sequence[int],
    equations: Sequence[str],
    branches: Sequence[Sequence[str]],
    symmetries: Sequence[Sequence[int]] = (),
) -> CurveGerm:
    """Parse and check a germ given as polynomial strings."""
    R = polynomial_ring(tuple(variables))
    t = series_ring()
    parsed = [parse_polynomial(text, R) for text in equations]
    made = []
    for k, images in enumerate(branches):
        if len(images) != len(variables):
            raise GermError(f"{name}: branch {k + 1} has {len(images)} coordinates, expected {len(variables)}")
        made.append(make_branch(f"B{k + 1}", R, [parse_polynomial(text, t) for text in images]))
    return CurveGerm(name, R, weights, parsed, made, symmetries)


def form_from_entries(ring, entries: Sequence[Sequence]) -> DiffForm:
    """Σ coeff·dx_i∧dx_j from [coeff, i, j] entries with 1-based i < j."""
    result = DiffForm.zero(ring, 2)
    for coefficient, i, j in entries:
        i, j = int(i) - 1, int(j) - 1
        if not 0 <= i < j < ring.ngens:
            raise GermError(f"form entry dx{i + 1}∧dx{j + 1} is not an increasing pair of ambient indices")
        result = result + basis_form(ring, (i, j), parse_polynomial(str(coefficient), ring))
    return result


# -- parameter substitution -----------------------------------------------------

def _with_parameters(names: Sequence[str]):
    return polynomial_ring(tuple(names) + PARAMETERS)


def instantiate(text: str, names: Sequence[str], values: Mapping[str, object]):
    """Parse ``text`` over ``names`` and the class parameters, then fix the parameters."""
    target = polynomial_ring(tuple(names))
    h = parse_polynomial(text, _with_parameters(names))
    images = list(target.gens) + [target.ground_new(to_rational(values.get(p, 0))) for p in PARAMETERS]
    return substitute(h, images, target)


def parameter_value(text: str, values: Mapping[str, object]):
    """Value of a polynomial in the class parameters."""
    h = parse_polynomial(text, polynomial_ring(PARAMETERS))
    total = QQ.zero
    for monom, coeff in h.items():
        term = coeff
        for name, exponent in zip(PARAMETERS, monom):
            if exponent:
                term *= to_rational(values.get(name, 0)) ** exponent
        total += term
    return total


def _draw(rng: random.Random):
    numerator = rng.choice([k for k in range(-9, 10) if k])
    return QQ(numerator, rng.randint(1, 5))


def instantiate_moduli(record: ClassRecord, rng: random.Random, row: Optional[dict] = None) -> Dict[str, object]:
    """Seeded rational moduli for a class, honoring its exclusions and a table row's conditions."""
    row = row or {}
    assign = row.get("assign", {})
    avoid = tuple(record.avoid) + tuple(row.get("avoid", ()))
    for _ in range(200):
        values = {name: _draw(rng) for name in record.parameters if name not in assign}
        for name, text in assign.items():
            values[name] = parameter_value(text, values)
        if all(parameter_value(text, values) for text in avoid):
            return values
    raise PreconditionError(f"class {record.index}: no admissible moduli found")


def moduli_vector(record: ClassRecord, values: Mapping[str, object]) -> List:
    return [to_rational(values[name]) for name in record.parameters]


# -- realizing forms and scenes -------------------------------------------------

def normal_form_coordinates(space: RestrictionSpace, record: ClassRecord, values: Mapping[str, object], sign: int = 1) -> List:
    return record.template.normal_form(space.closed_dimension, moduli_vector(record, values), sign)


def _lift(form: DiffForm, ring) -> DiffForm:
    images = list(ring.gens[:form.ring.ngens])
    return DiffForm(ring, form.degree, {index: substitute(coeff, images, ring) for index, coeff in form.terms.items()})


def build_realizing_form(space: RestrictionSpace, record: ClassRecord, values: Mapping[str, object], sign: int = 1) -> DiffForm:
    """Normal form plus the completion terms, on R^2n with coordinates x1..x2n."""
    R = polynomial_ring(tuple(f"x{k + 1}" for k in range(2 * record.n)))
    coordinates = normal_form_coordinates(space, record, values, sign)
    omega = DiffForm.zero(R, 2)
    for k, value in zip(space.closed_indices, coordinates):
        if value:
            omega = omega + _lift(space.basis[k].form, R).scale(value)
    for i, j in record.completion:
        omega = omega + basis_form(R, (i, j))
    return omega


def realizing_form(family: str, index: str, moduli: Sequence = (), sign: int = 1) -> DiffForm:
    germ_record = load_family(family)
    record = germ_record.find_class(index)
    if len(moduli) != len(record.parameters):
        raise PreconditionError(f"class {index} takes {len(record.parameters)} moduli, got {len(moduli)}")
    values = dict(zip(record.parameters, moduli))
    return build_realizing_form(germ_record.space, record, values, sign)


def scene_names(n: int) -> Tuple[str, ...]:
    names = []
    for k in range(1, n + 1):
        names += [f"p{k}", f"q{k}"]
    return tuple(names)


def build_scene(family: str, record: ClassRecord, values: Mapping[str, object], sign: int = 1) -> SymplecticScene:
    values = dict(values, s=sign)
    branches = tuple(
        tuple(instantiate(text, ("t",), values) for text in images)
        for images in record.scene["branches"]
    )
    labels = tuple(f"B{k + 1}" for k in range(len(branches)))
    return SymplecticScene(record.n, branches, labels, f"{family}^{record.index}")


def scene_satisfies_equations(record: ClassRecord, scene: SymplecticScene, values: Mapping[str, object], sign: int = 1) -> bool:
    names = scene_names(record.n)
    values = dict(values, s=sign)
    t = series_ring()
    for text in record.scene["equations"]:
        equation = instantiate(text, names, values)
        for images in scene.branches:
            if substitute(equation, list(images), t):
                return False
    return True


# -- loading --------------------------------------------------------------------

def _template(family: str, entry: dict) -> ClassTemplate:
    stratum = entry.get("stratum", {})

    def shift(indices):
        return tuple(int(j) - 1 for j in indices)

    def triples(items):
        return tuple((int(j) - 1, to_rational(f), int(k) - 1) for j, f, k in items)

    lead = entry.get("lead")
    return ClassTemplate(
        family=family,
        index=entry["index"],
        lead=None if lead is None else int(lead) - 1,
        moduli=shift(entry.get("moduli", ())),
        fixed={int(j) - 1: to_rational(v) for j, v in entry.get("fixed", {}).items()},
        nonzero=shift(stratum.get("nonzero", ())),
        zero=shift(stratum.get("zero", ())),
        relations=triples(stratum.get("relations", ())),
        exclusions=triples(stratum.get("exclusions", ())),
    )


def _class_record(family: str, entry: dict) -> ClassRecord:
    template = _template(family, entry)
    parameters = tuple(entry.get("parameters", ()))
    if len(parameters) != len(template.moduli):
        raise GermError(f"{family}^{template.index}: {len(parameters)} parameter names for {len(template.moduli)} moduli")
    scene = entry["scene"]
    return ClassRecord(
        template=template,
        parameters=parameters,
        signed=bool(entry.get("signed", False)),
        avoid=tuple(entry.get("avoid", ())),
        completion=tuple((int(i) - 1, int(j) - 1) for i, j in entry["completion"]),
        n=int(scene["n"]),
        expected=dict(entry["expected"]),
        scene=scene,
        rows=tuple(entry.get("rows", ())),
    )


def _check_class(germ_record: GermRecord, record: ClassRecord, rng: random.Random) -> None:
    space = germ_record.space
    name = f"{germ_record.family}^{record.index}"
    values = instantiate_moduli(record, rng)
    for sign in ((1, -1) if record.signed else (1,)):
        omega = build_realizing_form(space, record, values, sign)
        if not exterior_d(omega).is_zero():
            raise GermError(f"{name}: realizing form is not closed")
        gram = constant_gram(omega)
        if DomainMatrix(gram, (len(gram), len(gram)), QQ).det() == 0:
            raise GermError(f"{name}: realizing form is degenerate at 0")
        expected = space.from_closed(normal_form_coordinates(space, record, values, sign))
        if restrict(space, omega).coordinates != expected.coordinates:
            raise GermError(f"{name}: realizing form does not restrict to the normal form")
        scene = build_scene(germ_record.family, record, values, sign)
        if len(scene.branches) != len(germ_record.germ.branches):
            raise GermError(f"{name}: scene has {len(scene.branches)} branches, germ has {len(germ_record.germ.branches)}")
        if not scene_satisfies_equations(record, scene, values, sign):
            raise GermError(f"{name}: scene branches do not satisfy the scene equations")


def _read(family: str, path: Optional[Path] = None) -> dict:
    path = path or DATA_DIR / f"{family.lower()}.json"
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise UnknownNameError(f"unknown germ {family!r}") from exc


def parse_family(data: dict, bound: int = None) -> GermRecord:
    """Build and check a family record from its JSON data."""
    family = data["family"]
    germ = build_germ(
        family, data["variables"], data["weights"], data["equations"], data["branches"], data.get("symmetries", ())
    )
    representatives = [
        (entry["label"], form_from_entries(germ.ring, entry["form"]), entry["closed"]) for entry in data["basis"]
    ]
    space = build_space(germ, bound, representatives)
    subsets = {label: tuple(k - 1 for k in indices) for label, indices in data.get("subsets", {}).items()}
    classes = tuple(_class_record(family, entry) for entry in data["classes"])
    record = GermRecord(
        family, germ, space, tuple(data["fields"]), subsets, classes, data.get("expected", {}), tuple(data.get("extended", ()))
    )

    missing = [label for label, found in zip(record.field_labels, record.fields()) if found is None]
    if missing:
        raise GermError(f"{family}: fields {', '.join(missing)} are not tangent")
    rng = random.Random(f"{EngineConfig.SEED}:{family}:load")
    for class_record in classes:
        _check_class(record, class_record, rng)
    logger.info("%s: catalog record loaded with %d classes", family, len(classes))
    return record


def load_family(family: str, bound: int = None) -> GermRecord:
    """The checked record of a built-in family, cached per degree bound."""
    family = family.upper()
    if family not in FAMILIES:
        raise UnknownNameError(f"unknown germ {family!r}; built-in germs are {', '.join(FAMILIES)}")
    with _load_lock:
        record = _loaded.get((family, bound))
        if record is None:
            record = parse_family(_read(family), bound)
            _loaded[(family, bound)] = record
        return record


def load_catalog() -> Dict[str, GermRecord]:
    return {family: load_family(family) for family in FAMILIES}


def expected_tables(family: str, path: Optional[Path] = None) -> dict:
    """Golden values for one family, read straight from its data file."""
    data = _read(family.upper(), path)
    expected = dict(data.get("expected", {}))
    expected["germ"] = {key: data[key] for key in ("weights", "equations", "branches") if key in data}
    expected["classes"] = {
        entry["index"]: {
            "cod": entry["expected"]["cod"],
            "mu": entry["expected"]["mu"],
            "ind": parse_order(entry["expected"]["ind"]),
            "rows": [
                {
                    "assign": row.get("assign", {}),
                    "avoid": row.get("avoid", []),
                    "values": {key: parse_order(value) for key, value in row["values"].items()},
                    "geometry": row.get("geometry", {}),
                }
                for row in entry.get("rows", ())
            ],
        }
        for entry in data["classes"]
    }
    return expected
