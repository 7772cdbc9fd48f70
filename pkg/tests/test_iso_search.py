import pytest

import oracles
from polysphere import corpus
from polysphere import linalg as la
from polysphere.iso_search import enumerate_isometries, invariant_fingerprint
from polysphere.sphere_map import isometry_residual, linear_map, sample_pairs

NAMES = sorted(corpus.CORPUS)


def iso(a, b, **kw):
    return enumerate_isometries(corpus.named(a), corpus.named(b), **kw)


def test_square_group_is_signed_permutations():
    found = iso("SQ2", "SQ2")
    assert len(found) == 8
    assert set(found) == set(oracles.signed_permutations(2))


def test_cube_group_is_signed_permutations():
    found = iso("CUBE3", "CUBE3")
    assert len(found) == 48
    assert set(found) == set(oracles.signed_permutations(3))


def test_square_to_diamond():
    found = iso("SQ2", "DI2")
    assert len(found) == 8
    assert la.as_matrix([["1/2", "1/2"], ["1/2", "-1/2"]]) in found


def test_cube_to_octahedron_is_empty():
    assert iso("CUBE3", "OCT3") == []


def test_dimension_mismatch_is_empty():
    assert iso("SQ2", "CUBE3") == []


@pytest.mark.parametrize("a", NAMES)
@pytest.mark.parametrize("b", NAMES)
def test_matches_vertex_matching_oracle(a, b):
    found = set(iso(a, b))
    if corpus.named(a).dim != corpus.named(b).dim:
        assert not found
        return
    assert found == oracles.vertex_matching_isometries(corpus.named(a).vertices,
                                                       corpus.named(b).vertices)


@pytest.mark.parametrize("a,b", [(a, b) for a in NAMES for b in NAMES
                                 if corpus.named(a).dim == corpus.named(b).dim])
def test_pruning_does_not_change_results(a, b):
    assert iso(a, b) == iso(a, b, prune=False)


@pytest.mark.parametrize("name", NAMES)
def test_group_structure(name):
    found = set(iso(name, name))
    m = corpus.named(name).dim
    eye = la.identity(m)
    assert eye in found
    assert tuple(la.neg(r) for r in eye) in found
    for A in found:
        assert la.inverse(A) in found
        for B in found:
            assert la.matmul(A, B) in found


@pytest.mark.parametrize("name", NAMES)
def test_found_maps_are_sphere_isometries(name):
    b = corpus.named(name)
    pairs = sample_pairs(b, 20, 1)
    for A in iso(name, name):
        assert isometry_residual(linear_map(b, b, A), pairs) == 0


def test_limit():
    assert len(iso("CUBE3", "CUBE3", limit=5)) == 5


def test_fingerprints():
    sq, di = corpus.named("SQ2"), corpus.named("DI2")
    assert invariant_fingerprint(sq) == invariant_fingerprint(di)
    assert invariant_fingerprint(corpus.named("CUBE3")) != invariant_fingerprint(corpus.named("OCT3"))
    assert invariant_fingerprint(sq) == invariant_fingerprint(corpus.named("SQ2"))


def test_hexagon_group_order():
    assert len(iso("HEX", "HEX")) == 12
    assert len(oracles.vertex_matching_isometries(corpus.named("HEX").vertices,
                                                  corpus.named("HEX").vertices)) == 12
