import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.models.data_types import Polytope
from src.models.errors import InvalidInputError
from src.polytope.min_norm import (
    WolfeSolver,
    dist_origin,
    distance,
    hull_contains,
    min_norm_element,
    min_norm_of_vertices,
    project_point,
)
from src.pipeline.verification import enumeration_min_norm


def test_singleton_returns_vertex():
    assert_allclose(min_norm_element(Polytope([[3.0, 4.0]])), [3.0, 4.0])


def test_interval_containing_origin():
    assert_allclose(min_norm_element(Polytope([-1.0, 1.0])), [0.0], atol=1e-15)


def test_interval_away_from_origin():
    assert_allclose(min_norm_element(Polytope([2.0, 5.0])), [2.0])


def test_triangle_outside_origin_hits_vertex():
    P = Polytope([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]])
    assert_allclose(min_norm_element(P), [1.0, 1.0], atol=1e-12)


def test_triangle_containing_origin():
    P = Polytope([[-1.0, -1.0], [2.0, -1.0], [-1.0, 2.0]])
    assert np.linalg.norm(min_norm_element(P)) < 1e-9


def test_square_edge_projection():
    P = Polytope([[1.0, -1.0], [1.0, 1.0], [2.0, -1.0], [2.0, 1.0]])
    assert_allclose(min_norm_element(P), [1.0, 0.0], atol=1e-10)
    assert dist_origin(P) == pytest.approx(1.0, abs=1e-10)


def test_duplicate_vertices_are_ignored():
    V = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    assert WolfeSolver.deduplicate(V).shape[0] == 2
    assert_allclose(min_norm_of_vertices(V), [0.5, 0.5], atol=1e-12)


def test_project_point_at_origin_matches_min_norm():
    P = Polytope([[1.0, 2.0], [3.0, -1.0], [2.0, 2.0]])
    assert_allclose(project_point(P, [0.0, 0.0]), min_norm_element(P), atol=1e-12)


def test_distance_to_segment():
    P = Polytope([[0.0, 0.0], [1.0, 0.0]])
    assert distance(P, [0.5, 2.0]) == pytest.approx(2.0)
    assert_allclose(project_point(P, [3.0, 1.0]), [1.0, 0.0], atol=1e-12)


def test_hull_contains():
    P = Polytope([[-1.0, -1.0], [2.0, -1.0], [-1.0, 2.0]])
    assert hull_contains(P, [0.0, 0.0])
    assert not hull_contains(P, [5.0, 5.0])


def test_dimension_mismatch():
    P = Polytope([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        project_point(P, [1.0, 2.0, 3.0])


def test_invalid_polytopes():
    with pytest.raises(InvalidInputError):
        Polytope([])
    with pytest.raises(InvalidInputError):
        Polytope([[1.0, 2.0], [1.0]])


def test_matches_enumeration_reference():
    rng = np.random.default_rng(1)
    for _ in range(100):
        dim = int(rng.integers(2, 4))
        V = rng.normal(size=(int(rng.integers(2, 7)), dim)) + rng.normal(scale=1.5, size=dim)
        x = min_norm_element(Polytope(V))
        assert np.linalg.norm(x) == pytest.approx(enumeration_min_norm(V), abs=1e-6)
        assert hull_contains(Polytope(V), x)


def test_project_point_on_interval():
    P = Polytope([-1.0, 1.0])
    assert_allclose(project_point(P, 2.0), [1.0])
    assert_allclose(project_point(P, 0.3), [0.3], atol=1e-12)


def test_projection_is_optimal_against_convex_combinations():
    rng = np.random.default_rng(7)
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        V = rng.normal(size=(int(rng.integers(1, 6)), dim))
        P = Polytope(V)
        w = rng.normal(scale=2.0, size=dim)
        best = np.linalg.norm(w - project_point(P, w))
        lam = rng.dirichlet(np.ones(V.shape[0]), size=200)
        others = np.linalg.norm(lam @ V - w, axis=1)
        assert best <= others.min() + 1e-9


def test_projection_is_non_expansive():
    rng = np.random.default_rng(8)
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        P = Polytope(rng.normal(size=(int(rng.integers(1, 6)), dim)))
        w, u = rng.normal(scale=2.0, size=(2, dim))
        gap = np.linalg.norm(project_point(P, w) - project_point(P, u))
        assert gap <= np.linalg.norm(w - u) + 1e-9
