"""Recover a sphere map's linear pieces on facet cones and stitch them into one matrix."""
from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg as la
from .convex_core import PolyBall, norm
from .errors import MissingPiece, SingularSampleSet, VerificationFailed
from .sphere_map import SphereMap, facet_barycenter

Vec = tuple
Matrix = la.Matrix

# ridge checks on oracle maps use the declared tolerance times this factor
CONDITION_SAFETY = 10

RETRY_BUDGET = 32


@dataclass(frozen=True)
class PieceSet:
    source: PolyBall
    target: PolyBall
    pieces: Mapping[int, Matrix]
    evidence: Mapping[int, tuple[Vec, ...]] = field(default_factory=dict)
    tol: float = 0.0

    def with_piece(self, j: int, matrix: Sequence[Sequence]) -> "PieceSet":
        pieces = dict(self.pieces)
        pieces[j] = la.as_matrix(matrix)
        return PieceSet(self.source, self.target, pieces, self.evidence, self.tol)


@dataclass(frozen=True)
class Disagreement:
    facets: tuple[int, int]
    ridge: int
    vertex: int | None
    defect: Vec

    def describe(self, ball: PolyBall) -> str:
        ridge = sorted(ball.lattice.faces[self.ridge].vertex_ids)
        where = f"vertex {self.vertex}" if self.vertex is not None else "off-ridge direction"
        return f"facets {self.facets[0]} and {self.facets[1]} disagree on ridge {ridge} at {where}"


@dataclass(frozen=True)
class StitchReport:
    status: str
    matrix: Matrix | None
    disagreements: tuple[Disagreement, ...] = ()

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"


@dataclass(frozen=True)
class IsometryCertificate:
    invertible: bool
    forward_norms: tuple
    inverse_norms: tuple
    barycenter_norms: tuple = ()


def _is_zero_vec(v: Sequence, tol: float) -> bool:
    return la.max_abs(v) <= tol if tol else la.max_abs(v) == 0


def _interior_points(ball: PolyBall, j: int, rng: random.Random, attempt: int) -> list[Vec]:
    ids = sorted(ball.facet_vertex_ids[j])
    verts = [ball.vertices[i] for i in ids]
    b = facet_barycenter(ball, j)
    if attempt == 0:
        # barycenter plus steps of 1/3 towards vertices with independent offsets
        picks = la.independent_indices([la.sub(v, b) for v in verts])
        return [b] + [la.add(b, la.scale(Fraction(1, 3), la.sub(verts[i], b))) for i in picks]
    return [_facet_sample(verts, rng) for _ in range(ball.dim)]


def _facet_sample(verts: Sequence[Vec], rng: random.Random) -> Vec:
    w = [Fraction(rng.randint(1, 32)) for _ in verts]
    total = sum(w)
    return la.combine([x / total for x in w], verts)


def _recover(f: SphereMap, j: int, seed: int = 0) -> tuple[Matrix, tuple[Vec, ...]]:
    ball = f.source
    rng = random.Random(seed * 7919 + j)
    for attempt in range(RETRY_BUDGET):
        pts = _interior_points(ball, j, rng, attempt)
        if len(pts) == ball.dim and la.rank(pts) == ball.dim:
            break
    else:
        raise SingularSampleSet(f"no {ball.dim} independent points found on facet {j}")
    A = la.solve_linear_map(pts, [f(p) for p in pts])
    verts = [ball.vertices[i] for i in sorted(ball.facet_vertex_ids[j])]
    checks = [_facet_sample(verts, rng) for _ in range(2 * ball.dim)]
    tol = f.tol * CONDITION_SAFETY
    for p in checks:
        if not _is_zero_vec(la.sub(la.matvec(A, p), f(p)), tol):
            raise VerificationFailed(f"f is not linear on the cone over facet {j}")
    return A, tuple(pts) + tuple(checks)


def recover_piece(f: SphereMap, facet_id: int, seed: int = 0) -> Matrix:
    """Solve for the matrix ``A_j`` with ``f = A_j`` on the cone over facet ``facet_id``.

    ``m`` relative-interior points determine the matrix; ``2m`` more seeded
    facet points must then agree with it.
    """
    return _recover(f, facet_id, seed)[0]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("POLYSPHERE_THREADS", "1")))
    except ValueError:
        return 1


def recover_pieces(f: SphereMap, seed: int = 0, antipodal_economy: bool = True) -> PieceSet:
    """Recover every facet piece; with ``antipodal_economy`` facet ``-j`` reuses ``A_j``."""
    ball = f.source
    todo = []
    for j in range(len(ball.facets)):
        if antipodal_economy and ball.antipodal_facet(j) in todo:
            continue
        todo.append(j)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = dict(zip(todo, pool.map(lambda j: _recover(f, j, seed), todo)))
    pieces, evidence = {}, {}
    for j in range(len(ball.facets)):
        src = j if j in results else ball.antipodal_facet(j)
        pieces[j], evidence[j] = results[src]
    return PieceSet(ball, f.target, pieces, evidence, f.tol * CONDITION_SAFETY)


def antipodal_mismatches(pieces: PieceSet) -> list[int]:
    """Facets ``j`` whose piece differs from the piece of ``-j``."""
    out = []
    for j, A in pieces.pieces.items():
        k = pieces.source.antipodal_facet(j)
        if k in pieces.pieces and _matrix_gap(A, pieces.pieces[k]) > pieces.tol:
            out.append(j)
    return out


def _matrix_gap(A: Matrix, B: Matrix):
    return max(la.max_abs(la.sub(a, b)) for a, b in zip(A, B))


def stitch(pieces: PieceSet) -> StitchReport:
    """Glue facet pieces across ridges.

    Every ridge is checked first (``A_j v = A_k v`` on its vertices) so a
    report names the failing ridge.  Ridge agreement alone does not force a
    single matrix, so adjacent pieces must then also agree off the ridge,
    which is probed at the barycenter of the first facet.
    """
    ball = pieces.source
    mats: dict[int, Matrix] = {}
    for j in range(len(ball.facets)):
        if j in pieces.pieces:
            mats[j] = pieces.pieces[j]
        elif ball.antipodal_facet(j) in pieces.pieces:
            mats[j] = pieces.pieces[ball.antipodal_facet(j)]
        else:
            raise MissingPiece(f"no piece for facet {j} or its antipode")
    tol = pieces.tol
    bad: list[Disagreement] = []
    ridges = ball.lattice.ridges()
    for ridx, j, k in ridges:
        for i in sorted(ball.lattice.faces[ridx].vertex_ids):
            v = ball.vertices[i]
            d = la.sub(la.matvec(mats[j], v), la.matvec(mats[k], v))
            if not _is_zero_vec(d, tol):
                bad.append(Disagreement((j, k), ridx, i, d))
    if not bad:
        for ridx, j, k in ridges:
            b = facet_barycenter(ball, j)
            d = la.sub(la.matvec(mats[j], b), la.matvec(mats[k], b))
            if not _is_zero_vec(d, tol):
                bad.append(Disagreement((j, k), ridx, None, d))
    if bad:
        return StitchReport("inconsistent", None, tuple(bad))
    return StitchReport("consistent", mats[0], ())


def verify_linear_isometry(A: Sequence[Sequence], source: PolyBall, target: PolyBall,
                           tol: float = 0.0) -> tuple[bool, IsometryCertificate]:
    """Check ``||A v|| = 1`` on source vertices and ``||A^-1 w|| = 1`` on target vertices.

    Both bounds together give ``||A|| <= 1`` and ``||A^-1|| <= 1`` by convexity.
    The certificate also lists ``||A b||`` for the source facet barycenters,
    which is where a shrinking map usually shows first.
    """
    A = la.as_matrix(A)
    if len(A) != target.dim or any(len(r) != source.dim for r in A) or source.dim != target.dim:
        return False, IsometryCertificate(False, (), ())
    fwd = tuple(norm(target, la.matvec(A, v)) for v in source.vertices)
    bary = tuple(norm(target, la.matvec(A, facet_barycenter(source, j)))
                 for j in range(len(source.facets)))
    try:
        Ainv = la.inverse(A)
    except ZeroDivisionError:
        return False, IsometryCertificate(False, fwd, (), bary)
    inv = tuple(norm(source, la.matvec(Ainv, w)) for w in target.vertices)

    def unit(x) -> bool:
        return x == 1 if not tol else abs(x - 1) <= tol

    ok = all(unit(x) for x in fwd + inv + bary)
    return ok, IsometryCertificate(True, fwd, inv, bary)


def extend(f: SphereMap, seed: int = 0) -> Matrix | StitchReport:
    """Linear extension of a sphere map, or the stitch report explaining why none exists.

    Raises ``VerificationFailed`` when the pieces stitch but the common
    matrix is not an isometry, or when ``f`` is not linear on a facet cone.
    """
    pieces = recover_pieces(f, seed)
    report = stitch(pieces)
    if not report.consistent:
        return report
    ok, cert = verify_linear_isometry(report.matrix, f.source, f.target, tol=pieces.tol)
    if not ok:
        raise VerificationFailed(f"stitched matrix is not a linear isometry: {cert}")
    return report.matrix
