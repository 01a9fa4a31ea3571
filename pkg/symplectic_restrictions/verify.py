"""Recompute every stored table cell of a family and compare it with the catalog.

Work is split per class and fanned out over a thread pool; each task only
reads the shared restriction space, whose caches are lock protected. Results
come back in task order, so a run is deterministic for a fixed seed.
"""

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from symplectic_restrictions.algebra import format_order, series_ring
from symplectic_restrictions.catalog import (
    FAMILIES,
    ClassRecord,
    GermRecord,
    build_realizing_form,
    build_scene,
    expected_tables,
    instantiate_moduli,
    load_family,
    moduli_vector,
    normal_form_coordinates,
)
from symplectic_restrictions.classifier import action_table, class_codimension, random_orbit_point, reduce
from symplectic_restrictions.config import EngineConfig
from symplectic_restrictions.errors import RestrictionError, UnknownNameError
from symplectic_restrictions.germ import vanishes_on_germ
from symplectic_restrictions.invariants import (
    forms_geometric_conditions,
    geometric_conditions,
    index_of_isotropy,
    lt_multigerm,
    restrict_to_branches,
    singular_index_of_isotropy,
    symplectic_multiplicity,
)
from symplectic_restrictions.parser import parse_polynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CellResult:
    family: str
    cell: Tuple[str, ...]
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def as_dict(self) -> dict:
        return {"family": self.family, "cell": "/".join(self.cell), "expected": self.expected, "actual": self.actual}


@dataclass
class VerifyResult:
    seed: int
    cells: List[CellResult] = field(default_factory=list)

    @property
    def failures(self) -> List[CellResult]:
        return [cell for cell in self.cells if not cell.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        counts: Dict[str, Dict[str, int]] = {}
        for cell in self.cells:
            entry = counts.setdefault(cell.family, {"cells": 0, "failed": 0})
            entry["cells"] += 1
            entry["failed"] += 0 if cell.passed else 1
        return {
            "seed": self.seed,
            "passed": self.passed,
            "families": counts,
            "failures": [cell.as_dict() for cell in self.failures],
        }


def _order(value):
    return format_order(value) if isinstance(value, (int, float)) else value


class _Cells:
    """Collects cells for one task; an engine error fails the cell instead of the run."""

    def __init__(self, family: str, prefix: Sequence[str] = ()):
        self.family = family
        self.prefix = tuple(prefix)
        self.results: List[CellResult] = []

    def check(self, name: str, expected, compute) -> None:
        try:
            actual = compute()
        except RestrictionError as exc:
            actual = f"error: {exc.message}"
        self.results.append(CellResult(self.family, self.prefix + (name,), expected, actual))


# -- germ ----------------------------------------------------------------------

def _normalized(text: str, ring) -> str:
    try:
        return str(parse_polynomial(text, ring))
    except RestrictionError as exc:
        return f"error: {exc.message}"


def germ_cells(record: GermRecord, expected: dict) -> List[CellResult]:
    """Cross-check the weights, equations and branches of a golden file against the loaded germ."""
    golden = expected.get("germ", {})
    germ = record.germ
    cells = _Cells(record.family, ("germ",))
    if "weights" in golden:
        cells.check("weights", [int(w) for w in golden["weights"]], lambda: list(germ.weights))
    if "equations" in golden:
        equations = golden["equations"]
        cells.check("equations", len(equations), lambda: len(germ.equations))
        for k, text in enumerate(equations):
            if k < len(germ.equations):
                cells.check(f"equation/{k}", _normalized(text, germ.ring), lambda k=k: str(germ.equations[k]))
            cells.check(
                f"equation/{k}/vanishes", True, lambda t=text: vanishes_on_germ(germ, parse_polynomial(t, germ.ring))
            )
    if "branches" in golden:
        branches = golden["branches"]
        cells.check("branches", len(branches), lambda: len(germ.branches))
        for k, images in enumerate(branches):
            if k < len(germ.branches):
                cells.check(
                    f"branch/{k}",
                    [_normalized(text, series_ring()) for text in images],
                    lambda k=k: [str(image) for image in germ.branches[k].images],
                )
    return cells.results


# -- basis and action table ----------------------------------------------------

def basis_cells(record: GermRecord, expected: dict) -> List[CellResult]:
    space = record.space
    cells = _Cells(record.family, ("basis",))
    cells.check("dimension", expected.get("dimension"), lambda: space.dimension)
    cells.check("closed_dimension", expected.get("closed_dimension"), lambda: space.closed_dimension)
    cells.check("closed_degrees", expected.get("closed_degrees"), lambda: list(space.closed_degrees))
    cells.check(
        "complement_degrees",
        expected.get("complement_degrees"),
        lambda: [b.degree for b in space.basis if not b.closed],
    )
    return cells.results


def action_cells(record: GermRecord, expected: dict) -> List[CellResult]:
    golden = expected.get("action_table", {})
    table = action_table(record.space, record.fields())
    computed = table.as_dict()
    cells = _Cells(record.family, ("action",))
    labels = [record.space.basis[k].label for k in record.space.closed_indices]
    for field_label in record.field_labels:
        row = golden.get(field_label, {})
        for theta in labels:
            cells.check(f"{field_label}/{theta}", row.get(theta, {}), lambda f=field_label, th=theta: computed[f][th])
    return cells.results


# -- classes -------------------------------------------------------------------

def _subset_order(record: GermRecord, nf, scene, label: str):
    indices = record.subsets[label]
    zero = not any(restrict_to_branches(record.space, nf, indices).coordinates)
    return lt_multigerm(scene, indices, zero_restriction=zero).value


def row_cells(record: GermRecord, class_record: ClassRecord, row: dict, number: int, rng: random.Random) -> List[CellResult]:
    space = record.space
    cells = _Cells(record.family, ("class", class_record.index, f"row{number}"))
    values = instantiate_moduli(class_record, rng, row)
    nf = space.from_closed(normal_form_coordinates(space, class_record, values))
    scene = build_scene(record.family, class_record, values)

    for key, expected in row["values"].items():
        expected = _order(expected)
        if key == "ind":
            cells.check(key, expected, lambda: format_order(index_of_isotropy(space, nf)))
        elif key == "ind2":
            cells.check(key, expected, lambda: format_order(singular_index_of_isotropy(space, nf)))
        elif key == "Lt":
            cells.check(
                key, expected,
                lambda: format_order(lt_multigerm(scene, zero_restriction=not any(nf.coordinates)).value),
            )
        else:
            cells.check(key, expected, lambda k=key: format_order(_subset_order(record, nf, scene, k)))

    flags = row.get("geometry", {})
    if flags:
        omega = build_realizing_form(space, class_record, values)
        cells.check(
            "geometry/form", flags,
            lambda: {k: v for k, v in forms_geometric_conditions(space, omega).as_dict().items() if k in flags},
        )
        cells.check(
            "geometry/scene", flags,
            lambda: {k: v for k, v in geometric_conditions(scene).as_dict().items() if k in flags},
        )
    return cells.results


def sample_cells(
    record: GermRecord, class_record: ClassRecord, expected: dict, values: dict, rng: random.Random, prefix: Sequence[str]
) -> List[CellResult]:
    """Invariants and classification checks at one moduli sample."""
    space = record.space
    cells = _Cells(record.family, prefix)
    coordinates = normal_form_coordinates(space, class_record, values)
    nf = space.from_closed(coordinates)

    cells.check(
        "cod", expected.get("cod"),
        lambda: class_codimension(space, class_record.template, moduli_vector(class_record, values)),
    )
    cells.check("mu", expected.get("mu"), lambda: symplectic_multiplicity(space, nf))
    cells.check("ind", _order(expected.get("ind")), lambda: format_order(index_of_isotropy(space, nf)))

    templates = record.templates
    point = random_orbit_point(space, coordinates, rng)
    cells.check("classify", class_record.index, lambda: reduce(space, space.from_closed(point), templates).label.index)

    def idempotent():
        once = reduce(space, nf, templates).normal_form
        return reduce(space, once, templates).normal_form.coordinates == once.coordinates

    cells.check("idempotent", True, idempotent)
    return cells.results


def class_cells(
    record: GermRecord, class_record: ClassRecord, expected: dict, seed: int, samples: int = None
) -> List[CellResult]:
    """Table values and classification checks for one class, over several moduli samples."""
    samples = EngineConfig.MODULI_SAMPLES if samples is None else samples
    rng = random.Random(f"{seed}:{record.family}:{class_record.index}")
    count = max(1, samples) if class_record.parameters else 1

    results: List[CellResult] = []
    for number in range(count):
        prefix = ("class", class_record.index) + ((f"sample{number + 1}",) if number else ())
        values = instantiate_moduli(class_record, rng)
        results += sample_cells(record, class_record, expected, values, rng, prefix)
    for number, row in enumerate(expected.get("rows", ()), start=1):
        results += row_cells(record, class_record, row, number, rng)
    logger.debug("%s^%s: %d cells", record.family, class_record.index, len(results))
    return results


# -- entry point ---------------------------------------------------------------

def _families(family: str) -> List[str]:
    if family.lower() == "all":
        return list(FAMILIES)
    if family.upper() not in FAMILIES:
        raise UnknownNameError(f"unknown family {family!r}")
    return [family.upper()]


def run_verify(
    family: str = "all",
    seed: int = None,
    workers: int = None,
    golden: Optional[Dict[str, dict]] = None,
    bound: int = None,
    samples: int = None,
) -> VerifyResult:
    """Recompute every golden cell; ``golden`` replaces the shipped tables per family."""
    seed = EngineConfig.SEED if seed is None else seed
    workers = EngineConfig.VERIFY_WORKERS if workers is None else workers
    result = VerifyResult(seed)

    for name in _families(family):
        record = load_family(name, bound)
        expected = (golden or {}).get(name) or expected_tables(name)
        result.cells += germ_cells(record, expected)
        result.cells += basis_cells(record, expected)
        result.cells += action_cells(record, expected)

        tasks = []
        for index, class_expected in expected.get("classes", {}).items():
            tasks.append((record.find_class(index), class_expected))
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            batches = pool.map(lambda task: class_cells(record, task[0], task[1], seed, samples), tasks)
            for batch in batches:
                result.cells += batch
        failed = sum(1 for cell in result.cells if cell.family == name and not cell.passed)
        logger.info("%s: verified %d cells, %d failed", name, sum(1 for c in result.cells if c.family == name), failed)
    return result
