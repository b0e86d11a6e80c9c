import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.catalog import (
    CATALOG,
    check_crit_eps_bounded,
    clarke,
    describe_catalog,
    dist_to_crit,
    dist_value_to_vcrit_eps,
    enlarged_clarke,
    evaluate,
    get_function,
    growth_exponent_check,
    kl_mr_certificate,
    list_functions,
    vcrit_eps,
)
from src.catalog.critical_sets import crit_eps_grid
from src.models.errors import CatalogMissError, InapplicableError


def _sorted_rows(V):
    return np.array(sorted(map(tuple, np.asarray(V))))


def test_unknown_function_lists_valid_names():
    with pytest.raises(CatalogMissError) as info:
        get_function("foo")
    assert isinstance(info.value, KeyError)
    assert "abs" in str(info.value)
    assert "power_2" in info.value.valid_names


def test_values():
    assert evaluate(get_function("double_well"), 0.0) == pytest.approx(1.0)
    assert evaluate(get_function("double_well"), 2.0) == pytest.approx(1.0)
    assert evaluate(get_function("max_quad"), [0.0, 0.0]) == pytest.approx(1.0)
    assert evaluate(get_function("ridge_nc"), [0.0, 1.0]) == pytest.approx(0.0)
    assert evaluate(get_function("l1_2d"), [1.0, -2.0]) == pytest.approx(3.0)


def test_abs_subdifferential():
    fn = get_function("abs")
    assert_allclose(_sorted_rows(clarke(fn, 0.0).vertices), [[-1.0], [1.0]])
    assert_allclose(clarke(fn, 0.5).vertices, [[1.0]])
    assert_allclose(clarke(fn, -0.5).vertices, [[-1.0]])


def test_max_quad_subdifferential_at_origin():
    fn = get_function("max_quad")
    assert_allclose(_sorted_rows(clarke(fn, [0.0, 0.0]).vertices), [[0.0, -2.0], [0.0, 2.0]])


def test_enlarged_clarke_covers_kink():
    fn = get_function("abs")
    P = enlarged_clarke(fn, 0.05, 0.1)
    assert_allclose(_sorted_rows(P.vertices), [[-1.0], [1.0]])
    assert_allclose(enlarged_clarke(fn, 0.5, 0.1).vertices, [[1.0]])


def test_dist_to_crit():
    assert dist_to_crit(get_function("double_well"), 0.4) == pytest.approx(0.4)
    assert dist_to_crit(get_function("ridge_nc"), [0.0, 0.9]) == pytest.approx(0.1)


def test_crit_eps_grid_for_abs_is_origin():
    fn = get_function("abs")
    nodes = crit_eps_grid(fn, 0.5)
    assert nodes.shape[0] == 1
    assert abs(nodes[0, 0]) < 1e-12


def test_vcrit_eps_double_well():
    fn = get_function("double_well")
    segments = vcrit_eps(fn, 0.05)
    assert segments[0][0] == pytest.approx(0.0, abs=1e-12)
    assert segments[0][1] == pytest.approx(0.05 ** 2 / 4, abs=3e-4)
    assert segments[-1][0] == pytest.approx(1.0, abs=1e-9)
    assert dist_value_to_vcrit_eps(fn, 0.5, 0.05) == pytest.approx(0.5 - 0.000625, abs=1e-3)


def test_dist_value_to_vcrit_eps_vectorized():
    fn = get_function("power_2")
    d = dist_value_to_vcrit_eps(fn, np.array([0.0, 1.0, 2.0]), 0.0)
    assert d.shape == (3,)
    assert_allclose(d, [0.0, 1.0, 2.0], atol=1e-9)


def test_crit_eps_bounded():
    assert check_crit_eps_bounded(get_function("power_2"), 0.1).bounded
    verdict = check_crit_eps_bounded(get_function("sqrt_growth"), 0.1, box=[(-100.0, 100.0)])
    assert not verdict.bounded
    assert verdict.to_dict()["n_witnesses"] > 0


def test_growth_condition():
    assert growth_exponent_check(get_function("power_2"), 1.0).passed
    assert growth_exponent_check(get_function("double_well"), 1.0).passed


@pytest.mark.parametrize("name", ["abs", "power_2", "power_3", "double_well", "max_quad"])
def test_kl_mr_certificate(name):
    report = kl_mr_certificate(get_function(name), resolution=401)
    assert report.passed, report.to_dict()
    assert report.n_band_points > 0


def test_certificate_requires_exponents():
    with pytest.raises(InapplicableError):
        kl_mr_certificate(get_function("sqrt_growth"))


def test_catalog_listing():
    names = list_functions(include_diagnostic=False)
    assert "sqrt_growth" not in names
    assert set(names) < set(CATALOG)
    entries = describe_catalog()
    abs_entry = next(e for e in entries if e["name"] == "abs")
    assert abs_entry["kl"]["theta"] == 0.0
    assert abs_entry["convex"]


def test_power_entries_exponents():
    for a in (2, 3, 4):
        fn = get_function(f"power_{a}")
        assert fn.kl.theta == pytest.approx(1.0 - 1.0 / a)
        assert fn.mr.beta == pytest.approx(1.0 / (a - 1))


def test_crit_eps_grid_with_even_resolution_keeps_kink():
    fn = get_function("abs")
    points = crit_eps_grid(fn, 0.5, resolution=4000)
    assert points.shape[0] >= 1
    assert np.min(np.abs(points[:, 0])) < 1e-12
    assert vcrit_eps(fn, 0.5, resolution=4000) == [(0.0, 0.0)]
    assert dist_value_to_vcrit_eps(fn, 0.0, 0.5, resolution=4000) == pytest.approx(0.0)


@pytest.mark.parametrize("name,box,resolution", [
    ("power_2", None, 1000),
    ("double_well", [(-3.3, 2.9)], 100),
    ("ridge_nc", [(-2.1, 1.7)], 60),
])
def test_zero_eps_grid_recovers_crit_points(name, box, resolution):
    fn = get_function(name)
    points = crit_eps_grid(fn, 0.0, box=box, resolution=resolution)
    for c in fn.crit_points:
        assert np.min(np.linalg.norm(points - c, axis=1)) < 1e-12
    assert_allclose(
        [lo for lo, _ in vcrit_eps(fn, 0.0, box=box, resolution=resolution)], fn.crit_values, atol=1e-9
    )


@pytest.mark.parametrize("name", list(CATALOG))
def test_clarke_matches_finite_differences_at_smooth_points(name):
    fn = get_function(name)
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(20):
        x = rng.uniform(0.1, 2.0, size=fn.dim) * rng.choice([-1.0, 1.0], size=fn.dim)
        numeric = np.array([
            (evaluate(fn, x + h * e) - evaluate(fn, x - h * e)) / (2 * h) for e in np.eye(fn.dim)
        ])
        vertices = clarke(fn, x).vertices
        assert vertices.shape[0] == 1
        assert_allclose(vertices[0], numeric, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("name", list(CATALOG))
def test_lipschitz_constant_on_default_box(name):
    fn = get_function(name)
    rng = np.random.default_rng(4)
    lo, hi = -fn.half_width, fn.half_width
    X = rng.uniform(lo, hi, size=(500, fn.dim))
    Y = rng.uniform(lo, hi, size=(500, fn.dim))
    ratio = np.abs(fn.value_batch(X) - fn.value_batch(Y)) / np.linalg.norm(X - Y, axis=1)
    assert ratio.max() <= fn.lipschitz_on_box * (1 + 1e-9)


def test_diagnostic_entry_names_its_substitute():
    meta = next(e for e in describe_catalog() if e["name"] == "sqrt_growth")
    assert meta["diagnostic"]
    assert "sqrt(|x|)" in meta["description"]
    assert "(1 + x^2)^(1/4)" in meta["description"]
