"""Maps between unit spheres, their homogeneous extension, and residual checks."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import linalg as la
from .convex_core import PolyBall, norm, normalize, support_set, smooth_gamma
from .errors import EvaluatorFailure, SamplingExhausted, ZeroVector

Vec = tuple

SAMPLING_BUDGET = 10_000


@dataclass(frozen=True)
class SphereMap:
    """A map ``f : S_X -> S_E``; callers pass unit vectors of ``source``."""

    source: PolyBall
    target: PolyBall
    kind = "abstract"
    tol = 0.0

    def __call__(self, x: Sequence) -> Vec:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearSphereMap(SphereMap):
    matrix: la.Matrix = ()
    kind = "linear"

    def __call__(self, x: Sequence) -> Vec:
        return la.matvec(self.matrix, x)


@dataclass(frozen=True)
class PWLSphereMap(SphereMap):
    """One matrix per facet cone of the source.

    A point on several facet cones uses the lowest facet id that has a
    piece.  A facet without a piece borrows the matrix of its antipodal
    facet, which is what odd maps require.
    """

    pieces: Mapping[int, la.Matrix] = field(default_factory=dict)
    kind = "pwl"

    def piece_id(self, x: Sequence) -> int:
        active = sorted(support_set(self.source, x).active_facet_ids)
        for j in active:
            if j in self.pieces:
                return j
        for j in active:
            if self.source.antipodal_facet(j) in self.pieces:
                return self.source.antipodal_facet(j)
        raise EvaluatorFailure(f"no piece covers facets {active}")

    def __call__(self, x: Sequence) -> Vec:
        return la.matvec(self.pieces[self.piece_id(x)], x)


@dataclass(frozen=True)
class OracleSphereMap(SphereMap):
    """Wraps an arbitrary pure evaluator; output is trusted to ``tol``."""

    evaluator: Callable[[Vec], Sequence] | None = None
    tol: float = 1e-12
    kind = "oracle"

    def __call__(self, x: Sequence) -> Vec:
        try:
            return la.as_vec(self.evaluator(tuple(x)))
        except Exception as exc:  # evaluator is user code
            raise EvaluatorFailure(f"evaluator failed at {x}: {exc}") from exc


def linear_map(source: PolyBall, target: PolyBall, matrix: Sequence[Sequence]) -> LinearSphereMap:
    return LinearSphereMap(source, target, matrix=la.as_matrix(matrix))


def pwl_map(source: PolyBall, target: PolyBall,
            pieces: Mapping[int, Sequence[Sequence]]) -> PWLSphereMap:
    return PWLSphereMap(source, target, pieces={j: la.as_matrix(A) for j, A in pieces.items()})


def pwl_from_matrix(source: PolyBall, target: PolyBall, matrix: Sequence[Sequence]) -> PWLSphereMap:
    """A pwl map carrying the same matrix on every facet cone."""
    A = la.as_matrix(matrix)
    return PWLSphereMap(source, target, pieces={j: A for j in range(len(source.facets))})


@dataclass(frozen=True)
class ExtensionMap:
    """``F(0) = 0`` and ``F(x) = ||x|| f(x/||x||)``."""

    base: SphereMap

    def __call__(self, x: Sequence) -> Vec:
        return evaluate_extension(self, x)


def evaluate_extension(F: ExtensionMap | SphereMap, x: Sequence) -> Vec:
    f = F.base if isinstance(F, ExtensionMap) else F
    x = la.as_vec(x)
    n = norm(f.source, x)
    if n == 0:
        return tuple(Fraction(0) for _ in range(f.target.dim))
    return la.scale(n, f(la.scale(1 / n, x)))


def _max(values) -> Fraction | float:
    # residuals over an empty list are 0 by convention
    return max(values, default=Fraction(0))


def sphere_residual(f: SphereMap, samples: Sequence[Sequence]) -> Fraction | float:
    """max ``| ||f(x)||_E - 1 |`` over normalized samples."""
    return _max(abs(norm(f.target, f(normalize(f.source, x))) - 1) for x in samples)


def antipodal_residual(f: SphereMap, samples: Sequence[Sequence]) -> Fraction | float:
    """max ``||f(-x) + f(x)||_E`` over normalized samples."""
    out = []
    for x in samples:
        u = normalize(f.source, x)
        out.append(norm(f.target, la.add(f(u), f(la.neg(u)))))
    return _max(out)


def isometry_residual(f: SphereMap, pairs: Sequence[tuple[Sequence, Sequence]]) -> Fraction | float:
    """max ``| rho_E(f(x), f(y)) - rho_X(x, y) |`` over normalized pairs."""
    out = []
    for x, y in pairs:
        x, y = normalize(f.source, x), normalize(f.source, y)
        d_src = norm(f.source, la.sub(x, y))
        d_tgt = norm(f.target, la.sub(f(x), f(y)))
        out.append(abs(d_tgt - d_src))
    return _max(out)


def in_D_y(ball: PolyBall, y: Sequence, x: Sequence) -> bool:
    """``||x + y|| < 2`` for the normalized points, tested exactly."""
    x, y = normalize(ball, x), normalize(ball, y)
    return norm(ball, la.add(x, y)) < 2


def chord_direction(ball: PolyBall, a: Sequence, b: Sequence) -> Vec | None:
    """``(a - b)/||a - b||``, or None when the points coincide."""
    d = la.sub(a, b)
    n = norm(ball, d)
    if n == 0 or (not la.is_exact(d) and n <= 1e-15):
        return None
    return la.scale(1 / n, d)


def in_W_y(f: SphereMap, y: Sequence, x: Sequence) -> bool:
    y, x = normalize(f.source, y), normalize(f.source, x)
    if not in_D_y(f.source, y, x):
        return False
    d = chord_direction(f.source, x, y)
    if d is None or smooth_gamma(f.source, d) is None:
        return False
    e = chord_direction(f.target, f(x), f(y))
    return e is not None and smooth_gamma(f.target, e) is not None


def random_rational(rng: random.Random, m: int, bits: int = 10) -> Vec:
    scale = 1 << bits
    return tuple(Fraction(rng.randint(-scale, scale), scale) for _ in range(m))


def random_sphere_points(ball: PolyBall, count: int, seed: int) -> list[Vec]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        v = random_rational(rng, ball.dim)
        if la.max_abs(v) != 0:
            out.append(normalize(ball, v))
    return out


def sample_W_y(f: SphereMap, y: Sequence, count: int, seed: int,
               budget: int = SAMPLING_BUDGET) -> list[Vec]:
    """Seeded rejection sampler for points of ``W_y``.

    Half of the candidates are ``normalize(-y + s w)`` with ``w`` uniform in
    the cube ``[-1, 1]^m`` and ``s`` log-uniform in ``[1e-3, 1]``; they pile
    up near ``-y``.  The other half are ``normalize(w)``, which reach the
    parts of ``D_y`` far from ``-y``.  Everything is dyadic, so every
    predicate is decided exactly.
    """
    y = normalize(f.source, y)
    rng = random.Random(seed)
    out: list[Vec] = []
    rejected = 0
    while len(out) < count:
        near = rng.random() < 0.5
        s = Fraction(round(10 ** rng.uniform(-3.0, 0.0) * 2**20), 2**20)
        w = random_rational(rng, f.source.dim)
        try:
            x = normalize(f.source, la.add(la.neg(y), la.scale(s, w)) if near else w)
        except ZeroVector:
            x = None
        if x is not None and in_W_y(f, y, x):
            out.append(x)
            continue
        rejected += 1
        if rejected >= budget:
            raise SamplingExhausted(
                f"{rejected} candidates rejected after {len(out)} accepted points")
    return out


def sample_pairs(ball: PolyBall, count: int, seed: int) -> list[tuple[Vec, Vec]]:
    pts = random_sphere_points(ball, 2 * count, seed)
    return list(zip(pts[::2], pts[1::2]))


def facet_barycenter(ball: PolyBall, j: int) -> Vec:
    ids = sorted(ball.facet_vertex_ids[j])
    return tuple(sum((ball.vertices[i][k] for i in ids), Fraction(0)) / len(ids)
                 for k in range(ball.dim))


def probe_points(ball: PolyBall, count: int, seed: int) -> list[Vec]:
    """All vertices, then facet barycenters, then seeded random sphere points.

    The vertices are always included, even when ``count`` is smaller.
    """
    pts = list(ball.vertices)
    pts.extend(facet_barycenter(ball, j) for j in range(len(ball.facets)))
    pts = pts[:max(count, len(ball.vertices))]
    pts.extend(random_sphere_points(ball, count - len(pts), seed))
    return pts


__all__ = [
    "SphereMap", "LinearSphereMap", "PWLSphereMap", "OracleSphereMap", "ExtensionMap",
    "linear_map", "pwl_map", "pwl_from_matrix", "evaluate_extension", "sphere_residual",
    "antipodal_residual", "isometry_residual", "in_D_y", "in_W_y", "sample_W_y",
    "random_sphere_points", "sample_pairs", "probe_points", "chord_direction",
    "facet_barycenter",
]
