"""The lemma-verification harness behind ``polysphere verify lemmas``.

Each check runs over seeded configurations and becomes one report entry.
A configuration that raises a library error counts as a failure of its
entry; it never aborts the run.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from . import linalg as la
from .cli_io import ReportEntry, VerificationReport
from .convex_core import is_smooth, norm, support_span_dim, tangent_directions
from .differential import (
    DEFAULT_SCHEDULE,
    LimitSchedule,
    build_dual_transport,
    build_tangent_transport,
    gamma_cloud,
    lemma1_limit,
    lemma7_residual,
    linearity_probe,
    norming_defect,
    pairing_residual,
)
from .errors import PolysphereError
from .extension import StitchReport, extend
from .sphere_map import (
    SphereMap,
    antipodal_residual,
    isometry_residual,
    probe_points,
    random_rational,
    random_sphere_points,
    sample_W_y,
    sample_pairs,
    sphere_residual,
)

BASE_POINTS = 20
CLOUD_SAMPLES = 64
NORMING_SLACK = 0.05
MIN_SLOPE = 0.9
DERIVATIVE_TOL = 1e-8

_CAUGHT = (PolysphereError, ArithmeticError, ValueError)


class _Check:
    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.instances = 0
        self.worst: Fraction | float | None = None
        self.error: str | None = None

    def record(self, residual) -> None:
        self.instances += 1
        if self.worst is None or residual > self.worst:
            self.worst = residual

    def fail(self, message: str) -> None:
        self.instances += 1
        if self.error is None:
            self.error = message

    def run(self, body: Callable[[], object]) -> None:
        try:
            r = body()
        except _CAUGHT as exc:
            self.fail(f"{type(exc).__name__}: {exc}")
        else:
            if r is not None:
                self.record(r)

    def entry(self) -> ReportEntry:
        worst = None if self.worst is None else float(self.worst)
        ok = self.error is None and (worst is None or worst <= self.tolerance)
        return ReportEntry(self.name, self.instances, worst, self.tolerance, ok, self.error)


def verify_lemmas(f: SphereMap, seed: int = 0, instances: int = 100,
                  schedule: LimitSchedule = DEFAULT_SCHEDULE) -> VerificationReport:
    src, tgt = f.source, f.target
    m = src.dim
    exact_tol = f.tol
    base = probe_points(src, BASE_POINTS, seed)
    rng = random.Random(seed)
    checks: list[_Check] = []

    def check(name: str, tolerance: float) -> _Check:
        c = _Check(name, tolerance)
        checks.append(c)
        return c

    # metric facts about f itself
    pts = base + random_sphere_points(src, instances, seed + 1)
    c = check("sphere_membership", exact_tol)
    c.run(lambda: sphere_residual(f, pts))
    c.instances = len(pts)
    pairs = [(a, b) for a in src.vertices for b in src.vertices] + sample_pairs(src, instances, seed + 2)
    c = check("isometry_residual", exact_tol)
    c.run(lambda: isometry_residual(f, pairs))
    c.instances = len(pairs)
    c = check("tingley_antipodal", exact_tol)
    c.run(lambda: antipodal_residual(f, pts))
    c.instances = len(pts)

    # difference quotients along tangent directions
    c = check("lemma1_quotient", schedule.tol)
    for i in range(instances):
        y = base[i % len(base)]

        def one(i=i, y=y):
            dirs = tangent_directions(src, y, seed=seed + i).directions
            u = dirs[rng.randrange(len(dirs))]
            x = sample_W_y(f, y, 1, seed * 1009 + i)[0]
            q = lemma1_limit(f, x, y, u, schedule)
            slope = q.slope
            if slope is not None and slope < MIN_SLOPE:
                raise ValueError(f"convergence slope {slope:.3f} below {MIN_SLOPE}")
            return max(abs(q.limit - q.predicted), abs(q.image_limit - q.limit))
        c.run(one)

    # totality and norming of chord functionals
    total = check("lemma3_totality", 0)
    norming = check("lemma3_norming", NORMING_SLACK)
    for i, y in enumerate(base):
        try:
            cloud = gamma_cloud(f, y, CLOUD_SAMPLES, seed + i)
        except _CAUGHT as exc:
            total.fail(f"{type(exc).__name__}: {exc}")
            continue
        total.record(m - min(cloud.source_rank, cloud.target_rank))
        if is_smooth(src, y):
            probes = [random_rational(rng, m) for _ in range(16)]
            norming.run(lambda: norming_defect(src, cloud.source_cloud, probes))

    # tangent and dual transports
    tang = check("lemma4_5_tangent_transport", schedule.tol)
    dims = check("lemma5pp_support_dims", 0)
    pairing = check("lemma6_pairing", DERIVATIVE_TOL)
    transports = {}
    for i, y in enumerate(base):
        try:
            T = build_tangent_transport(f, y, schedule, seed=seed + i)
        except _CAUGHT as exc:
            tang.fail(f"{type(exc).__name__}: {exc}")
            continue
        transports[y] = T
        tang.record(T.isometry_defect if T.isometry_defect is not None else 0)
        dims.run(lambda: abs(support_span_dim(src, y) - support_span_dim(tgt, f(y))))
        pairing.run(lambda: pairing_residual(T, build_dual_transport(f, y, schedule, seed=seed + i)))

    # derivative formula and linearity of the derivative
    c = check("lemma7_derivative", DERIVATIVE_TOL)
    for i in range(instances):
        y = base[i % len(base)]
        z = random_rational(rng, m, bits=6)
        if y not in transports:
            c.fail(f"no tangent transport at {y}")
            continue
        c.run(lambda y=y, z=z: lemma7_residual(f, y, z, schedule, transports[y]))
    c = check("diff_cond_linearity", DERIVATIVE_TOL)
    spanning = [y for y in base if is_smooth(src, y) or support_span_dim(src, y) == m]
    per_point = max(1, instances // max(1, len(spanning)))
    for i, y in enumerate(spanning):
        c.run(lambda i=i, y=y: linearity_probe(f, y, per_point, seed + i, schedule))

    # main theorem: the linear extension exists and reproduces f
    c = check("main_theorem_extend", exact_tol)

    def ext():
        A = extend(f, seed)
        if isinstance(A, StitchReport):
            raise ValueError("; ".join(d.describe(src) for d in A.disagreements[:3]))
        return max(norm(tgt, la.sub(f(x), la.matvec(A, x))) for x in pts)
    c.run(ext)

    sched = {"depth": schedule.depth, "window": schedule.window, "tol": schedule.tol}
    return VerificationReport([ch.entry() for ch in checks], seed, sched, instances)
