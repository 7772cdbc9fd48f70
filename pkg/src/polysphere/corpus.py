"""Named test balls and a seeded generator of random symmetric balls."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from . import linalg as la
from .convex_core import PolyBall, build_ball, hull_facets


def cube(m: int) -> PolyBall:
    """The l-infinity unit ball."""
    return build_ball(list(itertools.product((1, -1), repeat=m)))


def cross_polytope(m: int) -> PolyBall:
    """The l1 unit ball."""
    verts = []
    for i in range(m):
        for s in (1, -1):
            verts.append(tuple(s if j == i else 0 for j in range(m)))
    return build_ball(verts)


def hexagon() -> PolyBall:
    return build_ball([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)])


CORPUS = {
    "SQ2": lambda: cube(2),
    "DI2": lambda: cross_polytope(2),
    "HEX": hexagon,
    "CUBE3": lambda: cube(3),
    "OCT3": lambda: cross_polytope(3),
}


def named(name: str) -> PolyBall:
    return CORPUS[name.upper()]()


def random_ball(m: int, max_vertices: int = 16, seed: int = 0) -> PolyBall:
    """A random centrally symmetric ball with at most ``max_vertices`` vertices.

    Points with small rational coordinates are drawn until their symmetric
    hull is full-dimensional; non-extreme points are discarded.
    """
    rng = random.Random(seed)
    while True:
        pairs = rng.randint(m, max_vertices // 2)
        pts = set()
        while len(pts) < 2 * pairs:
            p = tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(m))
            if la.max_abs(p) == 0 or p in pts:
                continue
            pts.add(p)
            pts.add(la.neg(p))
        pts = sorted(pts)
        if la.rank(pts) < m:
            continue
        facets = hull_facets(pts)
        extreme = []
        for v in pts:
            on = [c for c in facets if la.dot(c, v) == 1]
            if on and la.rank(on) == m:
                extreme.append(v)
        return build_ball(extreme)
