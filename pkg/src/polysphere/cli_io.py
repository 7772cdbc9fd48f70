"""JSON file formats for balls, maps, matrices and verification reports.

Rationals are always written as strings in lowest terms (``"3/4"``,
``"-2"``) so files round-trip bit-exactly.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import corpus
from .convex_core import PolyBall, build_ball
from .errors import InvalidBall, ParseError, ValidationError
from .sphere_map import LinearSphereMap, PWLSphereMap, SphereMap, linear_map, pwl_map

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def format_rational(x: Fraction | int) -> str:
    return str(Fraction(x))


def parse_rational(value: Any, where: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a rational string, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ParseError(f"{where}: expected a rational string, got {value!r}")
    m = _RATIONAL.match(value)
    if not m:
        raise ParseError(f"{where}: malformed rational {value!r}")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise ParseError(f"{where}: zero denominator in {value!r}")
    return Fraction(num, den)


def _parse_vector(value: Any, where: str, length: int | None = None) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list")
    if length is not None and len(value) != length:
        raise ParseError(f"{where}: expected {length} entries, got {len(value)}")
    return tuple(parse_rational(x, f"{where}[{i}]") for i, x in enumerate(value))


def _parse_matrix(value: Any, where: str, m: int) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(value, list) or len(value) != m:
        raise ParseError(f"{where}: expected a {m}x{m} matrix")
    return tuple(_parse_vector(row, f"{where}[{i}]", m) for i, row in enumerate(value))


def matrix_to_json(A: Sequence[Sequence]) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in A]


def _load_json(path: str | Path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# -- balls -------------------------------------------------------------------

def ball_to_dict(ball: PolyBall) -> dict:
    return {"dim": ball.dim, "vertices": matrix_to_json(ball.vertices)}


def ball_from_dict(data: Any, where: str = "ball") -> PolyBall:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    dim = data.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"{where}.dim: expected a positive integer")
    verts = data.get("vertices")
    if not isinstance(verts, list):
        raise ParseError(f"{where}.vertices: expected a list")
    parsed = [_parse_vector(v, f"{where}.vertices[{i}]", dim) for i, v in enumerate(verts)]
    try:
        return build_ball(parsed)
    except InvalidBall as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def parse_ball(path: str | Path) -> PolyBall:
    return ball_from_dict(_load_json(path), str(path))


def serialize_ball(ball: PolyBall, path: str | Path | None = None) -> str:
    text = dumps(ball_to_dict(ball))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def resolve_ball(spec: str) -> PolyBall:
    """A ball file path, or a corpus name such as ``SQ2`` when no such file exists."""
    if not Path(spec).exists() and spec.upper() in corpus.CORPUS:
        return corpus.named(spec)
    return parse_ball(spec)


# -- maps --------------------------------------------------------------------

def map_to_dict(f: SphereMap) -> dict:
    if isinstance(f, LinearSphereMap):
        return {"kind": "linear", "matrix": matrix_to_json(f.matrix)}
    if isinstance(f, PWLSphereMap):
        return {"kind": "pwl",
                "pieces": [{"facet_id": j, "matrix": matrix_to_json(A)}
                           for j, A in sorted(f.pieces.items())]}
    raise ValueError(f"maps of kind {f.kind!r} have no file format")


def map_from_dict(data: Any, source: PolyBall, target: PolyBall, where: str = "map") -> SphereMap:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    if source.dim != target.dim:
        raise ValidationError(f"{where}: source and target dimensions differ")
    m = source.dim
    kind = data.get("kind")
    if kind == "linear":
        return linear_map(source, target, _parse_matrix(data.get("matrix"), f"{where}.matrix", m))
    if kind == "pwl":
        pieces_raw = data.get("pieces")
        if not isinstance(pieces_raw, list):
            raise ParseError(f"{where}.pieces: expected a list")
        pieces = {}
        for i, p in enumerate(pieces_raw):
            w = f"{where}.pieces[{i}]"
            if not isinstance(p, dict):
                raise ParseError(f"{w}: expected an object")
            j = p.get("facet_id")
            if not isinstance(j, int) or isinstance(j, bool) or not 0 <= j < len(source.facets):
                raise ValidationError(f"{w}.facet_id: not a facet of the source ball")
            pieces[j] = _parse_matrix(p.get("matrix"), f"{w}.matrix", m)
        return pwl_map(source, target, pieces)
    raise ParseError(f"{where}.kind: expected 'linear' or 'pwl', got {kind!r}")


def parse_map(path: str | Path, source: PolyBall, target: PolyBall) -> SphereMap:
    return map_from_dict(_load_json(path), source, target, str(path))


def serialize_map(f: SphereMap, path: str | Path | None = None) -> str:
    text = dumps(map_to_dict(f))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# -- reports -----------------------------------------------------------------

@dataclass
class ReportEntry:
    name: str
    instances: int
    max_residual: float | None
    tolerance: float
    passed: bool
    error: str | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "instances": self.instances,
               "max_residual": self.max_residual, "tolerance": self.tolerance,
               "pass": self.passed}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class VerificationReport:
    entries: list[ReportEntry] = field(default_factory=list)
    seed: int = 0
    schedule: dict = field(default_factory=dict)
    instances: int = 0

    @property
    def overall_pass(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "seed": self.seed,
                "schedule": dict(self.schedule), "instances": self.instances,
                "overall_pass": self.overall_pass}

    def to_json(self) -> str:
        return dumps(self.to_dict())


__all__ = [
    "parse_rational", "format_rational", "parse_ball", "serialize_ball", "ball_to_dict",
    "ball_from_dict", "resolve_ball", "parse_map", "serialize_map", "map_to_dict",
    "map_from_dict", "matrix_to_json", "ReportEntry", "VerificationReport", "dumps",
]
