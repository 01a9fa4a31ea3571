"""Pydantic models for germ files, scene files, reports and API requests."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, model_validator

from symplectic_restrictions import __version__
from symplectic_restrictions.algebra import polynomial_ring, series_ring
from symplectic_restrictions.catalog import build_germ
from symplectic_restrictions.errors import ParseError
from symplectic_restrictions.germ import CurveGerm
from symplectic_restrictions.invariants import SymplecticScene
from symplectic_restrictions.parser import parse_polynomial


class SceneFile(BaseModel):
    """Branches in Darboux coordinates p1, q1, ..., pn, qn."""
    name: str = Field("scene", description="Label used in reports")
    n: int = Field(description="Half the ambient dimension", ge=1, le=4)
    branches: List[List[str]] = Field(description="Each branch as 2n polynomials in t", min_length=1)
    form: Optional[List[Tuple[str, int, int]]] = Field(
        None, description="Realizing symplectic form as [coefficient, i, j] entries in x1..x2n, 1-based"
    )
    germ: Optional[str] = Field(None, description="Built-in germ the scene realizes, for restriction invariants")
    subsets: Dict[str, List[int]] = Field(default_factory=dict, description="Named branch subsets, 1-based")

    @model_validator(mode='after')
    def validate_shapes(self) -> 'SceneFile':
        for k, images in enumerate(self.branches):
            if len(images) != 2 * self.n:
                raise ValueError(f"branch {k + 1} has {len(images)} coordinates, expected {2 * self.n}")
        for label, indices in self.subsets.items():
            if not indices or any(not 1 <= i <= len(self.branches) for i in indices):
                raise ValueError(f"subset {label} refers to missing branches")
        return self

    def to_scene(self) -> SymplecticScene:
        t = series_ring()
        branches = tuple(tuple(parse_polynomial(text, t) for text in images) for images in self.branches)
        labels = tuple(f"B{k + 1}" for k in range(len(branches)))
        return SymplecticScene(self.n, branches, labels, self.name)

    def ambient_ring(self):
        return polynomial_ring(tuple(f"x{k + 1}" for k in range(2 * self.n)))


class GermFile(BaseModel):
    """A user-defined quasi-homogeneous curve germ."""
    name: str = Field(description="Germ name", min_length=1, max_length=64)
    variables: List[str] = Field(default_factory=lambda: ["x1", "x2", "x3"], description="Ambient variables")
    weights: List[int] = Field(description="Positive quasi-homogeneous weights, one per variable")
    equations: List[str] = Field(default_factory=list, description="Defining equations as polynomial strings")
    branches: List[List[str]] = Field(description="Branch parametrizations, polynomials in t", min_length=1)
    symmetries: List[List[int]] = Field(default_factory=list, description="Sign vectors preserving the germ")
    scenes: List[SceneFile] = Field(default_factory=list, description="Optional symplectic scenes")

    @model_validator(mode='after')
    def validate_dimensions(self) -> 'GermFile':
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be distinct")
        if "t" in self.variables:
            raise ValueError("t is reserved for branch parameters")
        if len(self.weights) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} weights, got {len(self.weights)}")
        return self

    def to_germ(self) -> CurveGerm:
        return build_germ(self.name, self.variables, self.weights, self.equations, self.branches, self.symmetries)


def _load(path: Path, model):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc.msg}", exc.pos) from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"{path}: {location}: {first['msg']}" if location else f"{path}: {first['msg']}") from exc


def load_germ_file(path) -> GermFile:
    return _load(Path(path), GermFile)


def load_scene_file(path) -> SceneFile:
    return _load(Path(path), SceneFile)


class Report(BaseModel):
    """Output of every command, identical for CLI and API."""
    command: Dict[str, Any] = Field(description="Command name and arguments")
    version: str = Field(__version__, description="Engine version")
    bounds: Dict[str, int] = Field(description="Effective degree bound, ceiling, jet cutoff and seed")
    results: Any = Field(description="Command results")
    notes: List[str] = Field(default_factory=list, description="Provenance notes")
    exit_code: int = Field(0, description="CLI exit code for this report")

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, ensure_ascii=False)


class ClassifyRequest(BaseModel):
    """Model for classifying a closed restriction."""
    germ: str = Field(description="Built-in germ name")
    coeffs: List[str] = Field(description="Coefficients on the closed basis, as p/q strings", min_length=1)


class InvariantsRequest(BaseModel):
    """Model for invariants of a catalog class or of a scene."""
    germ: Optional[str] = Field(None, description="Built-in germ name")
    class_label: Optional[str] = Field(None, description="Class index, e.g. 3,1")
    moduli: List[str] = Field(default_factory=list, description="Moduli values as p/q strings")
    sign: int = Field(1, description="Sign of a ± normal form")
    scene: Optional[SceneFile] = Field(None, description="Scene to evaluate instead of a catalog class")

    @model_validator(mode='after')
    def validate_target(self) -> 'InvariantsRequest':
        if self.scene is None and (self.germ is None or self.class_label is None):
            raise ValueError("give either germ and class_label, or a scene")
        if self.sign not in (1, -1):
            raise ValueError("sign must be 1 or -1")
        return self


class VerifyRequest(BaseModel):
    """Model for a verification run."""
    family: str = Field("all", description="U7, U8, U9 or all")
    seed: Optional[int] = Field(None, description="Seed for moduli instantiation")
    degree_bound: Optional[int] = Field(None, description="Truncation quasi-degree D")
