"""Enumerate all linear isometries between two polytope balls.

Linear isometries map vertices onto vertices, so a search over vertex
matchings of a basis finds all of them.  Matchings are pruned by per-vertex
distance fingerprints and by pairwise distances to already matched vertices
(and their antipodes); each complete basis matching is solved for a matrix
and kept only if it maps the vertex set onto the target vertex set and
passes :func:`verify_linear_isometry`.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Optional

from . import linalg as la
from .convex_core import PolyBall, distance
from .extension import verify_linear_isometry

Matrix = la.Matrix


def _vertex_fingerprints(ball: PolyBall) -> list[tuple[Fraction, ...]]:
    return [tuple(sorted(distance(ball, v, w) for w in ball.vertices)) for v in ball.vertices]


def invariant_fingerprint(ball: PolyBall) -> tuple:
    """(vertex count, facet count, sorted pairwise distances, face census)."""
    n = len(ball.vertices)
    dists = sorted(distance(ball, ball.vertices[i], ball.vertices[j])
                   for i in range(n) for j in range(i + 1, n))
    return (n, len(ball.facets), tuple(dists), ball.lattice.census())


def _basis_order(ball: PolyBall, prints: list) -> list[int]:
    rarity = Counter(prints)
    reps = [i for i, v in enumerate(ball.vertices) if v > la.neg(v)]
    reps.sort(key=lambda i: (rarity[prints[i]], i))
    picks = la.independent_indices([ball.vertices[i] for i in reps])
    return [reps[k] for k in picks]


def enumerate_isometries(source: PolyBall, target: PolyBall, limit: Optional[int] = None,
                         prune: bool = True) -> list[Matrix]:
    """All matrices ``A`` that are linear isometries from ``source`` onto ``target``.

    ``prune=False`` switches off fingerprint and distance pruning (slow path,
    same answer).  Results are deduplicated and sorted by their entries.
    """
    if source.dim != target.dim:
        return []
    if prune and (len(source.vertices) != len(target.vertices)
                  or len(source.facets) != len(target.facets)):
        return []
    sp, tp = _vertex_fingerprints(source), _vertex_fingerprints(target)
    basis = _basis_order(source, sp)
    target_set = set(target.vertices)
    found: set[Matrix] = set()

    def candidates(depth: int, images: list[int]) -> list[int]:
        i = basis[depth]
        v = source.vertices[i]
        used = set(images) | {target.antipodal_vertex(k) for k in images}
        out = []
        for k, w in enumerate(target.vertices):
            if k in used:
                continue
            if prune:
                if sp[i] != tp[k]:
                    continue
                ok = True
                for b, img in zip(basis, images):
                    u, x = source.vertices[b], target.vertices[img]
                    if (distance(source, v, u) != distance(target, w, x)
                            or distance(source, v, la.neg(u)) != distance(target, w, la.neg(x))):
                        ok = False
                        break
                if not ok:
                    continue
            out.append(k)
        return out

    def leaf(images: list[int]) -> None:
        A = la.solve_linear_map([source.vertices[i] for i in basis],
                                [target.vertices[k] for k in images])
        if {la.matvec(A, v) for v in source.vertices} != target_set:
            return
        if verify_linear_isometry(A, source, target)[0]:
            found.add(A)

    def search(depth: int, images: list[int]) -> bool:
        if limit is not None and len(found) >= limit:
            return True
        if depth == len(basis):
            leaf(images)
            return False
        for k in candidates(depth, images):
            if search(depth + 1, images + [k]):
                return True
        return False

    search(0, [])
    out = sorted(found)
    return out if limit is None else out[:limit]
