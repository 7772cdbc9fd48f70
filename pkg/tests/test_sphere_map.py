from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import maps
from polysphere import corpus
from polysphere import linalg as la
from polysphere.convex_core import norm, smooth_gamma
from polysphere.errors import EvaluatorFailure, SamplingExhausted
from polysphere.extension import verify_linear_isometry
from polysphere.iso_search import enumerate_isometries
from polysphere.sphere_map import (
    ExtensionMap,
    OracleSphereMap,
    antipodal_residual,
    chord_direction,
    evaluate_extension,
    in_D_y,
    in_W_y,
    isometry_residual,
    linear_map,
    probe_points,
    random_sphere_points,
    sample_W_y,
    sample_pairs,
    sphere_residual,
)

SQ2 = corpus.named("SQ2")
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)
points2 = st.tuples(rationals, rationals).filter(any)


def test_extension_at_zero_and_scaling():
    f = maps.rotation()
    F_ = ExtensionMap(f)
    assert evaluate_extension(F_, (0, 0)) == (0, 0)
    x = (1, F(1, 3))
    assert F_(la.scale(2, x)) == la.scale(2, f(x))


def test_extension_of_rotation():
    assert ExtensionMap(maps.rotation())((3, F(3, 2))) == (F(-3, 2), 3)


@settings(max_examples=50, deadline=None)
@given(x=points2, t=st.fractions(min_value=F(1, 100), max_value=10, max_denominator=100))
def test_homogeneity(x, t):
    for f in (maps.rotation(), maps.ridge_defect_map()):
        F_ = ExtensionMap(f)
        assert norm(f.target, la.sub(F_(la.scale(t, x)), la.scale(t, F_(x)))) == 0


@pytest.mark.parametrize("f", [maps.rotation(), maps.ridge_defect_map(), maps.folding_map()],
                         ids=["rotation", "ridge_defect", "folding"])
def test_evaluator_stays_on_sphere(f):
    assert sphere_residual(f, random_sphere_points(f.source, 1000, 5)) == 0


def test_antipodal_residual_examples():
    pts = probe_points(SQ2, 30, 1)
    assert antipodal_residual(maps.rotation(), pts) == 0
    assert antipodal_residual(maps.rotation(), []) == 0
    # a point inside the negated facet x1 = 1
    assert antipodal_residual(maps.negated_piece_map(), [(1, F(1, 5))]) >= 2


def test_isometry_residual_examples():
    pairs = sample_pairs(SQ2, 40, 3)
    for A in enumerate_isometries(SQ2, SQ2):
        assert isometry_residual(linear_map(SQ2, SQ2, A), pairs) == 0
    half = linear_map(SQ2, SQ2, maps.HALF)
    assert isometry_residual(half, [((0, 1), (0, -1))]) == 1
    assert isometry_residual(half, [((1, F(1, 2)), (1, F(1, 2)))]) == 0


def test_in_D_y_examples():
    y = (-1, F(1, 5))
    assert in_D_y(SQ2, y, (1, F(3, 10)))
    assert not in_D_y(SQ2, y, y)
    assert in_D_y(SQ2, y, la.neg(y))


@settings(max_examples=50, deadline=None)
@given(x=points2, y=points2)
def test_in_D_y_symmetric(x, y):
    assert in_D_y(SQ2, y, x) == in_D_y(SQ2, x, y)


def test_chord_direction_same_point():
    assert chord_direction(SQ2, (1, 0), (1, 0)) is None


def test_sample_W_y_identity():
    f = linear_map(SQ2, SQ2, ((1, 0), (0, 1)))
    pts = sample_W_y(f, (1, 0), 5, 42)
    assert len(pts) == 5
    for x in pts:
        assert in_D_y(SQ2, (1, 0), x)
        assert smooth_gamma(SQ2, chord_direction(SQ2, x, (1, 0))) is not None
        assert in_W_y(f, (1, 0), x)
    assert sample_W_y(f, (1, 0), 5, 42) == pts
    assert sample_W_y(f, (1, 0), 0, 42) == []


def test_sample_W_y_constant_map_exhausts():
    with pytest.raises(SamplingExhausted):
        sample_W_y(maps.constant_map(), (1, 0), 3, 0, budget=200)


@pytest.mark.parametrize("name", sorted(corpus.CORPUS))
def test_sample_W_y_isometry_instances(name):
    b = corpus.named(name)
    A = enumerate_isometries(b, b)[-1]
    f = linear_map(b, b, A)
    for y in probe_points(b, 6, 2):
        for x in sample_W_y(f, y, 8, 9):
            assert in_W_y(f, y, x)


def test_oracle_map_wraps_failures():
    bad = OracleSphereMap(SQ2, SQ2, evaluator=lambda x: 1 / 0)
    with pytest.raises(EvaluatorFailure):
        bad((1, 0))


def test_oracle_map_tolerance_default():
    assert maps.radial_bend_map().tol == 1e-12


def test_probe_points_cover_vertices():
    pts = probe_points(SQ2, 2, 0)
    assert set(SQ2.vertices) <= set(pts)
    assert all(norm(SQ2, p) == 1 for p in probe_points(SQ2, 20, 0))


def test_square_to_diamond_is_linear_isometry():
    assert verify_linear_isometry(maps.SQ_TO_DI, SQ2, corpus.named("DI2"))[0]
