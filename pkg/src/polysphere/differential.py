"""Limits and derivatives of sphere maps, realized on dyadic schedules.

Every limit ``n -> infinity`` here is replaced by a schedule ``t_k = 2^-k``.
For polyhedral balls and linear or piecewise linear maps all quantities are
rational and become exactly constant below a computable scale, so a limit
is accepted once the last ``window`` schedule values agree within ``tol``.
"""
from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .convex_core import (
    PolyBall,
    in_tangent_set,
    norm,
    normalize,
    smooth_gamma,
    support_set,
    support_span_dim,
    tangent_directions,
)
from .errors import (
    BasePointMismatch,
    DimensionMismatch,
    HypothesisViolated,
    InconsistentPairs,
    NoStabilization,
    SpanViolation,
)
from .sphere_map import (
    ExtensionMap,
    SphereMap,
    chord_direction,
    evaluate_extension,
    facet_barycenter,
    in_W_y,
    random_rational,
    sample_W_y,
)

Vec = tuple


@dataclass(frozen=True)
class LimitSchedule:
    depth: int = 30
    window: int = 3
    tol: float = 1e-9

    def __post_init__(self):
        if self.depth < self.window or self.window < 1:
            raise ValueError("schedule depth must be at least the window size")

    @property
    def steps(self) -> list[Fraction]:
        return [Fraction(1, 2**k) for k in range(1, self.depth + 1)]


DEFAULT_SCHEDULE = LimitSchedule()


def _tail(schedule: LimitSchedule) -> list[Fraction]:
    # where only the limit is consumed, the finest window is all acceptance looks at
    return schedule.steps[-schedule.window:]


def gap(a, b):
    """Max-abs distance between two scalars or two vectors."""
    if isinstance(a, tuple):
        return la.max_abs(la.sub(a, b))
    return abs(a - b)


def stabilize(values: Sequence, schedule: LimitSchedule, what: str = "sequence"):
    """Return ``(limit, first_stable_index)`` for a schedule-indexed sequence.

    The limit is the value at the finest scale; it is accepted when the last
    ``window`` values are defined and agree with it within ``tol``.
    """
    tail = values[-schedule.window:]
    last = values[-1]
    if any(v is None for v in tail) or any(gap(v, last) > schedule.tol for v in tail):
        raise NoStabilization(f"{what} did not stabilize over {len(values)} steps")
    k = len(values) - 1
    while k > 0 and values[k - 1] is not None and gap(values[k - 1], last) <= schedule.tol:
        k -= 1
    return last, k


def convergence_slope(steps: Sequence, estimates: Sequence, limit, last: int = 10) -> float | None:
    """Log-log slope of ``|estimate - limit|`` against ``t`` over the finest steps.

    Only nonzero errors enter the fit; None means fewer than two of them,
    i.e. the sequence is already exact there.
    """
    pts = [(math.log(float(t)), math.log(float(abs(e - limit))))
           for t, e in zip(steps[-last:], estimates[-last:]) if e - limit != 0]
    if len(pts) < 2:
        return None
    xs, ys = zip(*pts)
    return statistics.linear_regression(xs, ys).slope


# -- one-sided norm derivative ---------------------------------------------

@dataclass(frozen=True)
class HSet:
    """Support functionals at ``y`` realizing the one-sided derivative in ``z``."""

    y: Vec
    z: Vec
    value: Fraction
    achiever_ids: tuple[int, ...]
    achievers: tuple[Vec, ...]


def norm_dderiv(ball: PolyBall, y: Sequence, z: Sequence,
                schedule: LimitSchedule = DEFAULT_SCHEDULE) -> HSet:
    s = support_set(ball, y)
    z = la.as_vec(z)
    vals = {j: la.dot(ball.facets[j], z) for j in sorted(s.active_facet_ids)}
    value = max(vals.values())
    ids = tuple(j for j, v in vals.items() if v == value)
    for a in schedule.steps[-2:]:
        fd = (norm(ball, la.add(s.base, la.scale(a, z))) - 1) / a
        if gap(fd, value) > (0 if la.is_exact(z) else schedule.tol):
            raise NoStabilization(
                f"difference quotient {fd} at a={a} disagrees with argmax value {value}")
    return HSet(s.base, z, value, ids, tuple(ball.facets[j] for j in ids))


# -- difference quotients along tangents ------------------------------------------

@dataclass(frozen=True)
class QuotientLimit:
    steps: tuple
    estimates: tuple
    limit: Fraction | float
    predicted: Fraction
    stable_from: int
    image_estimates: tuple = ()
    image_limit: Fraction | float | None = None

    @property
    def slope(self) -> float | None:
        return convergence_slope(self.steps, self.estimates, self.limit)


def _quotient(ball: PolyBall, x, y, yn):
    d = norm(ball, la.sub(y, yn))
    if d == 0:
        return None
    return (norm(ball, la.sub(x, yn)) - norm(ball, la.sub(x, y))) / d


def lemma1_limit(f: SphereMap | None, x: Sequence, y: Sequence, u: Sequence,
                 schedule: LimitSchedule = DEFAULT_SCHEDULE,
                 ball: PolyBall | None = None) -> QuotientLimit:
    """Limit of ``(rho(x, y_n) - rho(x, y)) / rho(y, y_n)`` along ``y_n -> y``.

    ``y_n = normalize(y - t_n u)`` approaches ``y`` from the tangent direction
    ``u``.  The prediction is ``<gamma((x - y)/||x - y||), u>``.  When ``f`` is
    given, the same quotient is also formed for the images, which for an
    isometry must have the same limit.
    """
    src = ball if f is None else f.source
    x, y, u = normalize(src, x), normalize(src, y), normalize(src, u)
    if x == y:
        raise HypothesisViolated("x and y coincide")
    chord = chord_direction(src, x, y)
    gamma = smooth_gamma(src, chord)
    if gamma is None:
        raise HypothesisViolated("(x - y)/||x - y|| is not a smooth point")
    if not in_tangent_set(src, y, u):
        raise HypothesisViolated("u is not a tangent direction at y")
    steps = schedule.steps
    ys = [normalize(src, la.sub(y, la.scale(t, u))) for t in steps]
    est = [_quotient(src, x, y, yn) for yn in ys]
    limit, k = stabilize(est, schedule, "tangent difference quotient")
    img, img_limit = (), None
    if f is not None:
        fx, fy = f(x), f(y)
        img = tuple(_quotient(f.target, fx, fy, f(yn)) for yn in ys)
        img_limit, _ = stabilize(img, schedule, "image quotient")
    return QuotientLimit(tuple(steps), tuple(est), limit, la.dot(gamma, u), k, img, img_limit)


# -- chord functional clouds --------------------------------------------------

@dataclass(frozen=True)
class GammaCloud:
    points: tuple[Vec, ...]
    source_cloud: tuple[Vec, ...]
    target_cloud: tuple[Vec, ...]
    source_rank: int
    target_rank: int


def gamma_cloud(f: SphereMap, y: Sequence, samples: int, seed: int) -> GammaCloud:
    """Support functionals of the chord directions from ``y`` (and ``f(y)``) over ``W_y``."""
    y = normalize(f.source, y)
    fy = f(y)
    pts = sample_W_y(f, y, samples, seed)
    src = tuple(smooth_gamma(f.source, chord_direction(f.source, x, y)) for x in pts)
    tgt = tuple(smooth_gamma(f.target, chord_direction(f.target, f(x), fy)) for x in pts)
    return GammaCloud(tuple(pts), src, tgt, la.rank(list(set(src))), la.rank(list(set(tgt))))


def norming_defect(ball: PolyBall, cloud: Sequence[Vec], probes: Sequence[Vec]) -> float:
    """Worst relative gap ``1 - max_c |<c, z>| / ||z||`` over the probes."""
    worst = 0.0
    distinct = list(set(cloud))
    for z in probes:
        n = norm(ball, z)
        if n == 0:
            continue
        best = max((abs(la.dot(c, z)) for c in distinct), default=0)
        worst = max(worst, float(1 - best / n))
    return worst


# -- transports --------------------------------------------------------------

@dataclass(frozen=True)
class LinearExtension:
    """A linear map known on ``span(basis)`` through ``basis -> images``."""

    basis: tuple[Vec, ...]
    images: tuple[Vec, ...]

    @property
    def span_dim(self) -> int:
        return len(self.basis)

    def contains(self, w: Sequence) -> bool:
        return la.coordinates(self.basis, w) is not None

    def apply(self, w: Sequence) -> Vec:
        coords = la.coordinates(self.basis, la.as_vec(w))
        if coords is None:
            raise SpanViolation(f"{w} is outside the span of the transport basis")
        if not self.images:
            return tuple(Fraction(0) for _ in w)
        return la.combine(coords, self.images)


def _fit(pairs: Sequence[tuple[Vec, Vec]], tol: float, what: str) -> LinearExtension:
    idx = la.independent_indices([p for p, _ in pairs])
    ext = LinearExtension(tuple(pairs[i][0] for i in idx), tuple(pairs[i][1] for i in idx))
    for p, q in pairs:
        if gap(ext.apply(p), q) > tol:
            raise InconsistentPairs(f"{what}: no linear map reproduces {p} -> {q}")
    return ext


@dataclass(frozen=True)
class TangentTransport:
    """``F_y`` on sampled tangent directions plus its linear extension.

    ``matrix`` agrees with the extension on its span; when that span is a
    hyperplane the matrix sends the base point ``y`` to 0.
    """

    y: Vec
    image_base: Vec
    pairs: tuple[tuple[Vec, Vec], ...]
    linear_ext: LinearExtension
    matrix: la.Matrix
    smooth_pair: bool
    isometry_defect: Fraction | float | None

    @property
    def span_dim(self) -> int:
        return self.linear_ext.span_dim

    def __call__(self, w: Sequence) -> Vec:
        return self.linear_ext.apply(w)


def _tangent_limit(f: SphereMap, y: Vec, fy: Vec, u: Vec, schedule: LimitSchedule) -> Vec:
    vals = []
    for t in _tail(schedule):
        yn = normalize(f.source, la.sub(y, la.scale(t, u)))
        vals.append(chord_direction(f.target, fy, f(yn)))
    if vals[-1] is None:
        raise InconsistentPairs(f"f is not injective near y along {u}")
    return stabilize(vals, schedule, "tangent transport")[0]


def build_tangent_transport(f: SphereMap, y: Sequence,
                            schedule: LimitSchedule = DEFAULT_SCHEDULE,
                            samples: int = 8, seed: int = 0) -> TangentTransport:
    """Tabulate ``u -> lim (f(y) - f(y_n))/||f(y) - f(y_n)||`` and extend linearly."""
    ts = tangent_directions(f.source, y, samples, seed)
    y = ts.base
    fy = f(y)
    pairs = []
    for u in ts.directions:
        v = _tangent_limit(f, y, fy, u, schedule)
        if not in_tangent_set(f.target, fy, v, tol=schedule.tol):
            raise InconsistentPairs(f"image direction {v} is not tangent at f(y)")
        pairs.append((u, v))
    ext = _fit(pairs, schedule.tol, "tangent transport")
    m = f.source.dim
    if ext.span_dim == m:
        matrix = la.solve_linear_map(ext.basis, ext.images)
    else:
        zero = tuple(Fraction(0) for _ in range(f.target.dim))
        matrix = la.solve_linear_map(ext.basis + (y,), ext.images + (zero,))
    smooth_pair = smooth_gamma(f.source, y) is not None and smooth_gamma(f.target, fy) is not None
    defect = None
    if smooth_pair:
        rng = random.Random(seed)
        defect = Fraction(0)
        combos = [p for p, _ in pairs]
        for _ in range(16):
            coeffs = [Fraction(rng.randint(-8, 8)) for _ in ext.basis]
            combos.append(la.combine(coeffs, ext.basis))
        for w in combos:
            defect = max(defect, abs(norm(f.target, ext.apply(w)) - norm(f.source, w)))
    return TangentTransport(y, fy, tuple(pairs), ext, matrix, smooth_pair, defect)


@dataclass(frozen=True)
class DualTransport:
    """``G_y`` on sampled limits of chord support functionals near ``-y``."""

    y: Vec
    image_base: Vec
    pairs: tuple[tuple[Vec, Vec], ...]
    linear_ext: LinearExtension
    support_dim: int
    image_support_dim: int

    def __call__(self, functional: Sequence) -> Vec:
        return self.linear_ext.apply(functional)


def _dual_limit(f: SphereMap, y: Vec, fy: Vec, w: Vec, schedule: LimitSchedule):
    src_vals, tgt_vals = [], []
    minus_y = la.neg(y)
    for s in _tail(schedule):
        x = normalize(f.source, la.add(minus_y, la.scale(s, w)))
        if not in_W_y(f, y, x):
            src_vals.append(None)
            tgt_vals.append(None)
            continue
        src_vals.append(smooth_gamma(f.source, chord_direction(f.source, x, y)))
        tgt_vals.append(smooth_gamma(f.target, chord_direction(f.target, f(x), fy)))
    a, _ = stabilize(src_vals, schedule, "source chord functional")
    b, _ = stabilize(tgt_vals, schedule, "image chord functional")
    return a, b


def build_dual_transport(f: SphereMap, y: Sequence,
                         schedule: LimitSchedule = DEFAULT_SCHEDULE,
                         seed: int = 0, draws: int = 16) -> DualTransport:
    """Sample ``M_y^*`` and ``G_y`` from sequences ``x_n -> -y`` inside ``W_y``.

    One sequence per facet through ``-y`` heads for that facet's barycenter,
    so every extreme support functional at ``-y`` is hit; ``draws`` extra
    sequences use seeded random directions and are dropped if they never
    stabilize.
    """
    y = normalize(f.source, y)
    fy = f(y)
    d_src = support_span_dim(f.source, y)
    d_tgt = support_span_dim(f.target, fy)
    if d_src != d_tgt:
        raise DimensionMismatch(
            f"support functionals span {d_src} dims at y but {d_tgt} dims at f(y)")
    minus_y = la.neg(y)
    targeted = [la.sub(facet_barycenter(f.source, j), minus_y)
                for j in sorted(support_set(f.source, minus_y).active_facet_ids)]
    rng = random.Random(seed)
    found: dict[Vec, Vec] = {}
    for i, w in enumerate(targeted + [random_rational(rng, f.source.dim) for _ in range(draws)]):
        try:
            a, b = _dual_limit(f, y, fy, w, schedule)
        except NoStabilization:
            if i < len(targeted):
                raise
            continue
        if la.dot(a, minus_y) != 1:
            raise InconsistentPairs(f"{a} is not a support functional at -y")
        if gap(la.dot(b, la.neg(fy)), 1) > schedule.tol:
            raise InconsistentPairs(f"{b} is not a support functional at -f(y)")
        if a in found and gap(found[a], b) > schedule.tol:
            raise InconsistentPairs(f"{a} has two different images")
        found[a] = b
    pairs = tuple(sorted(found.items(), reverse=True))
    ext = _fit(pairs, schedule.tol, "dual transport")
    return DualTransport(y, fy, pairs, ext, d_src, d_tgt)


def pairing_residual(T: TangentTransport, D: DualTransport):
    """max ``|<y*, u> - <G_y y*, F_y u>|`` over all sampled pairs."""
    if T.y != D.y:
        raise BasePointMismatch("transports were built at different base points")
    return max((abs(la.dot(ys, u) - la.dot(gs, fu)) for ys, gs in D.pairs for u, fu in T.pairs),
               default=Fraction(0))


# -- derivative of the homogeneous extension --------------------------------

def _as_extension(F) -> ExtensionMap:
    return F if isinstance(F, ExtensionMap) else ExtensionMap(F)


def gateaux_derivative(F: ExtensionMap | SphereMap, y: Sequence, z: Sequence,
                       schedule: LimitSchedule = DEFAULT_SCHEDULE) -> Vec:
    """One-sided derivative ``lim_{a -> 0+} (F(y + a z) - F(y)) / a``."""
    F = _as_extension(F)
    y, z = la.as_vec(y), la.as_vec(z)
    Fy = evaluate_extension(F, y)
    vals = [la.scale(1 / a, la.sub(evaluate_extension(F, la.add(y, la.scale(a, z))), Fy))
            for a in _tail(schedule)]
    return stabilize(vals, schedule, "directional derivative")[0]


def lemma7_rhs(f: SphereMap, T: TangentTransport, y: Vec, z: Vec, ystar: Vec) -> Vec:
    """``<y*, z> f(y) + F_y(z - <y*, z> y)``, after the span membership test."""
    c = la.dot(ystar, z)
    w = la.sub(z, la.scale(c, y))
    if not T.linear_ext.contains(w):
        raise SpanViolation("z - <y*, z> y is not in the span of the tangent directions")
    return la.add(la.scale(c, f(y)), T(w))


def lemma7_residual(f: SphereMap, y: Sequence, z: Sequence,
                    schedule: LimitSchedule = DEFAULT_SCHEDULE,
                    transport: TangentTransport | None = None):
    """Distance between the directional derivative and its transport formula.

    Every achiever in ``H(y, z)`` is tried and the worst residual returned,
    which also checks that the formula does not depend on the choice.
    """
    y = normalize(f.source, y)
    z = la.as_vec(z)
    T = transport if transport is not None else build_tangent_transport(f, y, schedule)
    if T.y != y:
        raise BasePointMismatch("transport was built at a different base point")
    H = norm_dderiv(f.source, y, z, schedule)
    D = gateaux_derivative(f, y, z, schedule)
    return max(norm(f.target, la.sub(D, lemma7_rhs(f, T, y, z, ys))) for ys in H.achievers)


def linearity_probe(F: ExtensionMap | SphereMap, y: Sequence, probes: int, seed: int,
                    schedule: LimitSchedule = DEFAULT_SCHEDULE):
    """Worst additivity defect of ``z -> [F'(y)](z)`` over seeded probe pairs."""
    F = _as_extension(F)
    rng = random.Random(seed)
    worst = Fraction(0)
    for _ in range(probes):
        z1 = random_rational(rng, F.base.source.dim, bits=6)
        z2 = random_rational(rng, F.base.source.dim, bits=6)
        d12 = gateaux_derivative(F, y, la.add(z1, z2), schedule)
        d1 = gateaux_derivative(F, y, z1, schedule)
        d2 = gateaux_derivative(F, y, z2, schedule)
        worst = max(worst, norm(F.base.target, la.sub(d12, la.add(d1, d2))))
    return worst
