"""Exact geometry of centrally symmetric polytope unit balls.

A :class:`PolyBall` is built from its vertices; facets are found by an
integer double-description pass and stored normalized so that the facet is
``{x : <c, x> = 1}``.  With that normalization the facet functionals are
exactly the extreme points of the dual unit ball, so the norm is
``max_c <c, x>`` and the support functionals at a sphere point are the
facets active there.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import linalg as la
from .errors import (
    DimensionMismatch,
    NotFullDimensional,
    NotSmoothPoint,
    NotSymmetric,
    RedundantVertex,
    ZeroVector,
)

Vec = tuple
Functional = tuple

# activity tolerance, only used when a float vector is involved
ACTIVITY_TOL = 1e-9


@dataclass(frozen=True)
class Face:
    dim: int
    vertex_ids: frozenset[int]
    facet_ids: frozenset[int]


@dataclass(frozen=True)
class FaceLattice:
    """All proper faces plus facet/ridge adjacency.

    ``adjacency[j]`` lists ``(ridge_index, neighbor_facet)`` for facet ``j``,
    where ``ridge_index`` points into ``faces``.
    """

    faces: tuple[Face, ...]
    adjacency: dict[int, tuple[tuple[int, int], ...]]

    @cached_property
    def _by_vertices(self) -> dict[frozenset[int], int]:
        return {f.vertex_ids: i for i, f in enumerate(self.faces)}

    def index_of(self, vertex_ids: frozenset[int]) -> int:
        return self._by_vertices[frozenset(vertex_ids)]

    def of_dim(self, k: int) -> list[Face]:
        return [f for f in self.faces if f.dim == k]

    def census(self) -> tuple[int, ...]:
        top = max(f.dim for f in self.faces)
        return tuple(sum(1 for f in self.faces if f.dim == k) for k in range(top + 1))

    def ridges(self) -> list[tuple[int, int, int]]:
        """Every ridge once, as ``(ridge_index, j, k)`` with ``j < k``."""
        out = []
        for j, adj in sorted(self.adjacency.items()):
            for ridx, k in adj:
                if j < k:
                    out.append((ridx, j, k))
        return out


@dataclass(frozen=True)
class PolyBall:
    dim: int
    vertices: tuple[Vec, ...]
    facets: tuple[Functional, ...]
    lattice: FaceLattice = field(repr=False, compare=False)
    facet_vertex_ids: tuple[frozenset[int], ...] = field(repr=False, compare=False)

    @cached_property
    def _vertex_index(self) -> dict[Vec, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _facet_index(self) -> dict[Functional, int]:
        return {c: i for i, c in enumerate(self.facets)}

    def vertex_index(self, v: Sequence) -> int:
        return self._vertex_index[la.as_vec(v)]

    def facet_index(self, c: Sequence) -> int:
        return self._facet_index[la.as_vec(c)]

    def antipodal_facet(self, j: int) -> int:
        return self._facet_index[la.neg(self.facets[j])]

    def antipodal_vertex(self, i: int) -> int:
        return self._vertex_index[la.neg(self.vertices[i])]

    def same_shape(self, other: "PolyBall") -> bool:
        return (set(self.vertices) == set(other.vertices)
                and set(self.facets) == set(other.facets))


@dataclass(frozen=True)
class SupportSet:
    base: Vec
    active_facet_ids: frozenset[int]
    extreme_points: tuple[Functional, ...]


@dataclass(frozen=True)
class TangentSet:
    """Finite presentation of the tangent directions at a sphere point.

    ``generators`` are exact directions ``(y - v)/||y - v||`` towards the
    vertices of every facet through ``y``; they generate each facet of the
    supporting cone.  ``sampled`` holds extra seeded directions from the
    relative interiors of those cone facets.
    """

    base: Vec
    is_smooth: bool
    span_dim: int
    generators: tuple[Vec, ...]
    sampled: tuple[Vec, ...] = ()

    @property
    def directions(self) -> tuple[Vec, ...]:
        return self.generators + self.sampled


def _lcm_denominator(v: Sequence[Fraction]) -> int:
    out = 1
    for x in v:
        out = out * x.denominator // math.gcd(out, x.denominator)
    return out


def _primitive(r: list[int]) -> list[int]:
    g = 0
    for x in r:
        g = math.gcd(g, x)
    return [x // g for x in r] if g > 1 else r


def hull_facets(points: Sequence[Vec]) -> list[Functional]:
    """Facet functionals of ``conv(points)`` for a set with 0 in its interior.

    Double description on the homogenized polar cone
    ``{(s, c) : s - <v, c> >= 0 for every point v}`` in integer arithmetic;
    each extreme ray ``(s, c)`` gives the facet ``<c/s, x> = 1``.
    """
    m = len(points[0])
    d = m + 1
    rows = []
    for v in points:
        L = _lcm_denominator(v)
        rows.append([L] + [int(-x * L) for x in v])
    basis_idx = la.independent_indices([tuple(Fraction(x) for x in r) for r in rows])
    if len(basis_idx) < d:
        raise NotFullDimensional("points do not span the ambient space")
    inv = la.inverse(tuple(tuple(Fraction(x) for x in rows[i]) for i in basis_idx))
    rays: list[list[int]] = []
    zeros: list[int] = []
    all_bits = sum(1 << i for i in basis_idx)
    for j in range(d):
        col = [inv[i][j] for i in range(d)]
        L = _lcm_denominator(col)
        rays.append(_primitive([int(x * L) for x in col]))
        zeros.append(all_bits & ~(1 << basis_idx[j]))

    in_basis = set(basis_idx)
    for i, a in enumerate(rows):
        if i in in_basis:
            continue
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        pos = [k for k, t in enumerate(vals) if t > 0]
        neg = [k for k, t in enumerate(vals) if t < 0]
        if not neg:
            zeros = [z | (1 << i) if vals[k] == 0 else z for k, z in enumerate(zeros)]
            continue
        new_rays, new_zeros = [], []
        for p in pos:
            for n in neg:
                Z = zeros[p] & zeros[n]
                if Z.bit_count() < d - 2:
                    continue
                if any(k != p and k != n and (Z & zeros[k]) == Z for k in range(len(rays))):
                    continue
                r = [vals[p] * x - vals[n] * y for x, y in zip(rays[n], rays[p])]
                new_rays.append(_primitive(r))
                new_zeros.append(Z | (1 << i))
        keep = [k for k, t in enumerate(vals) if t >= 0]
        rays = [rays[k] for k in keep] + new_rays
        zeros = [zeros[k] | (1 << i) if vals[k] == 0 else zeros[k] for k in keep] + new_zeros

    return [tuple(Fraction(x, r[0]) for x in r[1:]) for r in rays]


def _face_lattice(m: int, facets: Sequence[Functional],
                  facet_sets: Sequence[frozenset[int]]) -> FaceLattice:
    seen = set(facet_sets)
    queue = list(facet_sets)
    while queue:
        s = queue.pop()
        for f in facet_sets:
            t = s & f
            if t and t not in seen:
                seen.add(t)
                queue.append(t)
    faces = []
    for s in seen:
        active = frozenset(j for j, f in enumerate(facet_sets) if s <= f)
        dim = m - la.rank([facets[j] for j in active])
        faces.append(Face(dim, s, active))
    faces.sort(key=lambda f: (f.dim, sorted(f.vertex_ids)))
    adjacency: dict[int, list[tuple[int, int]]] = {j: [] for j in range(len(facets))}
    for idx, f in enumerate(faces):
        if f.dim == m - 2:
            j, k = sorted(f.facet_ids)
            adjacency[j].append((idx, k))
            adjacency[k].append((idx, j))
    return FaceLattice(tuple(faces), {j: tuple(v) for j, v in adjacency.items()})


def build_ball(vertices: Sequence[Sequence]) -> PolyBall:
    """Build the unit ball ``conv(vertices)``.

    The vertex list must be centrally symmetric, span the space (dimension at
    least 2), and contain only extreme points.
    """
    verts = tuple(tuple(Fraction(x) for x in v) for v in vertices)
    if not verts:
        raise NotFullDimensional("empty vertex list")
    m = len(verts[0])
    if any(len(v) != m for v in verts):
        raise DimensionMismatch("vertices have mixed lengths")
    if m < 2:
        raise NotFullDimensional("dimension must be at least 2")
    index = {}
    for i, v in enumerate(verts):
        if v in index:
            raise RedundantVertex(i, f"duplicate of vertex {index[v]}")
        index[v] = i
    for i, v in enumerate(verts):
        if la.neg(v) not in index:
            raise NotSymmetric(f"vertex {i} = {_fmt(v)} has no antipode in the list")
    if la.rank(verts) < m:
        raise NotFullDimensional(f"vertices span fewer than {m} dimensions")

    raw = hull_facets(verts)
    facets = tuple(sorted(set(raw), reverse=True))
    facet_sets = tuple(frozenset(i for i, v in enumerate(verts) if la.dot(c, v) == 1)
                       for c in facets)
    for i, v in enumerate(verts):
        if max(la.dot(c, v) for c in facets) < 1:
            raise RedundantVertex(i, "strictly inside the hull of the others")
        on = [facet_sets[j] for j in range(len(facets)) if i in facet_sets[j]]
        if frozenset.intersection(*on) != {i}:
            raise RedundantVertex(i, "lies on a face of positive dimension")
    lattice = _face_lattice(m, facets, facet_sets)
    return PolyBall(m, verts, facets, lattice, facet_sets)


def _fmt(v: Sequence) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def _check_dim(ball: PolyBall, x: Sequence) -> None:
    if len(x) != ball.dim:
        raise DimensionMismatch(f"expected a vector of length {ball.dim}, got {len(x)}")


def norm(ball: PolyBall, x: Sequence):
    """Minkowski functional of the ball: ``max_c <c, x>`` over facets."""
    _check_dim(ball, x)
    return max(la.dot(c, x) for c in ball.facets)


def dual_norm(ball: PolyBall, c: Sequence):
    _check_dim(ball, c)
    return max(la.dot(c, v) for v in ball.vertices)


def distance(ball: PolyBall, x: Sequence, y: Sequence):
    return norm(ball, la.sub(x, y))


def normalize(ball: PolyBall, x: Sequence) -> Vec:
    x = la.as_vec(x)
    n = norm(ball, x)
    if n == 0:
        raise ZeroVector("cannot normalize the zero vector")
    return tuple(t / n for t in x)


def polar_dual(ball: PolyBall) -> PolyBall:
    """The dual unit ball: its vertices are this ball's facet functionals."""
    return build_ball(ball.facets)


def _is_active(value, exact: bool) -> bool:
    return value == 1 if exact else abs(value - 1) <= ACTIVITY_TOL


def support_set(ball: PolyBall, x: Sequence) -> SupportSet:
    """Support functionals at ``x/||x||``: the facets active there."""
    base = normalize(ball, x)
    exact = la.is_exact(base)
    active = frozenset(j for j, c in enumerate(ball.facets) if _is_active(la.dot(c, base), exact))
    return SupportSet(base, active, tuple(ball.facets[j] for j in sorted(active)))


def smooth_gamma(ball: PolyBall, x: Sequence) -> Functional | None:
    """The unique support functional at ``x/||x||``, or None at a non-smooth point."""
    s = support_set(ball, x)
    return s.extreme_points[0] if len(s.extreme_points) == 1 else None


def is_smooth(ball: PolyBall, x: Sequence) -> bool:
    return smooth_gamma(ball, x) is not None


def carrier_face(ball: PolyBall, x: Sequence) -> Face:
    s = support_set(ball, x)
    verts = frozenset.intersection(*(ball.facet_vertex_ids[j] for j in s.active_facet_ids))
    return ball.lattice.faces[ball.lattice.index_of(verts)]


def support_span_dim(ball: PolyBall, x: Sequence) -> int:
    """Dimension of the linear span of the support functionals at ``x``."""
    return la.rank(support_set(ball, x).extreme_points)


def tangent_directions(ball: PolyBall, y: Sequence, samples: int = 8, seed: int = 0) -> TangentSet:
    """Finite presentation of the tangent directions at ``y/||y||``.

    A direction ``u`` is tangent when ``y - t u`` stays on the sphere for small
    ``t > 0``.  For every active facet the directions towards its vertices are
    emitted; ``samples`` seeded positive combinations within single cone
    facets are added on top.
    """
    s = support_set(ball, y)
    base = s.base
    generators: list[Vec] = []
    per_facet: list[list[Vec]] = []
    for j in sorted(s.active_facet_ids):
        dirs = []
        for i in sorted(ball.facet_vertex_ids[j]):
            d = la.sub(base, ball.vertices[i])
            if la.max_abs(d) == 0:
                continue
            u = normalize(ball, d)
            dirs.append(u)
            if u not in generators:
                generators.append(u)
        per_facet.append(dirs)
    rng = random.Random(seed)
    sampled: list[Vec] = []
    while len(sampled) < samples:
        dirs = rng.choice(per_facet)
        weights = [Fraction(rng.randint(1, 64)) for _ in dirs]
        w = la.combine(weights, dirs)
        # opposite directions inside a face can cancel; redraw
        if la.max_abs(w) != 0:
            sampled.append(normalize(ball, w))
    return TangentSet(
        base=base,
        is_smooth=len(s.active_facet_ids) == 1,
        span_dim=la.rank(generators),
        generators=tuple(generators),
        sampled=tuple(sampled),
    )


def in_tangent_set(ball: PolyBall, y: Sequence, u: Sequence, tol: float = ACTIVITY_TOL) -> bool:
    """Whether ``u/||u||`` is a tangent direction at ``y``.

    Tangent means ``<c, u> >= 0`` on every support functional at ``y`` with
    equality for at least one of them.
    """
    s = support_set(ball, y)
    u = la.as_vec(u)
    if la.max_abs(u) == 0:
        return False
    vals = [la.dot(c, u) for c in s.extreme_points]
    if la.is_exact(u) and la.is_exact(s.base):
        return min(vals) == 0
    scale = float(norm(ball, u))
    return abs(min(vals)) <= tol * scale


def smoothness_radius(ball: PolyBall, x: Sequence) -> Fraction:
    """A radius ``r`` with ``<gamma(x), z> = ||z||`` on all of ``cone(x + r B)``.

    For each competing facet ``c'`` the constraint is
    ``(1 - <c', x>) >= r * ||c' - gamma||_dual``; the minimum over ``c'``
    is returned, which is the largest certified radius.
    """
    base = normalize(ball, x)
    gamma = smooth_gamma(ball, base)
    if gamma is None:
        raise NotSmoothPoint(f"{_fmt(base)} is not a smooth point")
    r = None
    for c in ball.facets:
        if c == gamma:
            continue
        bound = (1 - la.dot(c, base)) / dual_norm(ball, la.sub(c, gamma))
        r = bound if r is None else min(r, bound)
    return r
