import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.catalog import CATALOG, get_function
from src.models.data_types import BiasModel, StepSchedule
from src.models.errors import DivergedError, InvalidInputError
from src.polytope.min_norm import distance
from src.solver.biased_subgradient import BiasOracle, biased_oracle, run, select_subgradient

NO_BIAS = BiasModel()


def test_min_norm_selection():
    assert_allclose(select_subgradient(get_function("abs"), 0.0), [0.0])
    assert_allclose(select_subgradient(get_function("abs"), -0.5), [-1.0])
    assert_allclose(select_subgradient(get_function("max_quad"), [0.0, 0.0]), [0.0, 0.0])


def test_adversarial_oracle_on_abs():
    fn = get_function("abs")
    v = biased_oracle(fn, 0.5, BiasModel(kind="adversarial", epsilon=0.5))
    assert_allclose(v, [0.5])
    assert_allclose(biased_oracle(fn, 0.5, NO_BIAS), [1.0])


def test_fixed_oracle_on_square():
    fn = get_function("power_2")
    v = biased_oracle(fn, 1.0, BiasModel(kind="fixed", epsilon=0.25, direction=(1.0,)))
    assert_allclose(v, [2.25])


def test_adversarial_at_stationary_point_uses_first_axis():
    oracle = BiasOracle(BiasModel(kind="adversarial", epsilon=0.3), dim=2)
    assert_allclose(oracle.perturbation(np.zeros(2)), [0.3, 0.0])


def test_random_bounded_stays_in_ball():
    oracle = BiasOracle(BiasModel(kind="random_bounded", epsilon=0.2), dim=2, seed=3)
    norms = [np.linalg.norm(oracle.perturbation(np.ones(2))) for _ in range(500)]
    assert max(norms) <= 0.2 + 1e-15


def test_fixed_direction_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        BiasOracle(BiasModel(kind="fixed", epsilon=0.1, direction=(1.0, 0.0)), dim=1)


def test_fixed_requires_nonzero_direction():
    with pytest.raises(InvalidInputError):
        BiasModel(kind="fixed", epsilon=0.1, direction=(0.0,))


def test_abs_constant_step_reaches_minimizer():
    traj = run(get_function("abs"), [1.0], StepSchedule(alpha=0.25), NO_BIAS, K=8)
    assert len(traj) == 9
    assert_array_equal(traj.points[:, 0], [1.0, 0.75, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert traj.oracle_vectors.shape == (8, 1)
    assert traj.horizon == pytest.approx(2.0)


def test_abs_period_two_orbit():
    traj = run(get_function("abs"), [1.0], StepSchedule(alpha=0.4), NO_BIAS, K=6)
    assert_allclose(traj.points[:, 0], [1.0, 0.6, 0.2, -0.2, 0.2, -0.2, 0.2], atol=1e-12)


def test_square_contracts_geometrically():
    traj = run(get_function("power_2"), [1.0], StepSchedule(alpha=0.25), NO_BIAS, K=3)
    assert_array_equal(traj.points[:, 0], [1.0, 0.5, 0.25, 0.125])


def test_fixed_bias_shifts_fixed_point():
    bias = BiasModel(kind="fixed", epsilon=0.1, direction=(1.0,))
    traj = run(get_function("power_2"), [1.0], StepSchedule(alpha=0.1), bias, K=500)
    assert traj.points[-1, 0] == pytest.approx(-0.05, abs=1e-9)


def test_trajectory_recursion_holds():
    bias = BiasModel(kind="random_bounded", epsilon=0.1)
    traj = run(get_function("ridge_nc"), [0.5, 0.5], StepSchedule(kind="one_over_k", alpha=0.1),
               bias, K=50, seed=4)
    assert_allclose(traj.points[1:], traj.points[:-1] - traj.steps[:, None] * traj.oracle_vectors)


def test_oracle_vectors_are_admissible():
    fn = get_function("max_quad")
    bias = BiasModel(kind="random_bounded", epsilon=0.15)
    traj = run(fn, [1.0, -0.5], StepSchedule(alpha=0.05), bias, K=200, seed=1)
    for x, v in zip(traj.points[:-1], traj.oracle_vectors):
        assert distance(fn.clarke(x), v) <= 0.15 + 1e-12


def test_same_seed_same_trajectory():
    fn = get_function("l1_2d")
    bias = BiasModel(kind="random_bounded", epsilon=0.2)
    a = run(fn, [1.0, 2.0], StepSchedule(alpha=0.01), bias, K=100, seed=9)
    b = run(fn, [1.0, 2.0], StepSchedule(alpha=0.01), bias, K=100, seed=9)
    c = run(fn, [1.0, 2.0], StepSchedule(alpha=0.01), bias, K=100, seed=10)
    assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_divergence_returns_partial_trajectory():
    with pytest.raises(DivergedError) as info:
        run(get_function("power_2"), [1.0], StepSchedule(alpha=10.0), NO_BIAS, K=100)
    partial = info.value.partial
    assert 1 <= len(partial) < 101
    assert len(partial) == partial.iterations + 1


@pytest.mark.parametrize("kwargs", [
    {"x0": [1.0], "K": 0},
    {"x0": [1.0, 2.0], "K": 5},
    {"x0": [np.inf], "K": 5},
])
def test_invalid_run_inputs(kwargs):
    with pytest.raises(InvalidInputError):
        run(get_function("abs"), kwargs["x0"], StepSchedule(alpha=0.1), NO_BIAS, K=kwargs["K"])


def test_schedules():
    assert StepSchedule(kind="sqrt_horizon", horizon=3).step(0) == pytest.approx(0.5)
    assert StepSchedule(kind="one_over_k", alpha=1.0).step(3) == pytest.approx(0.25)
    assert StepSchedule(kind="power", alpha=1.0, power=0.5).step(3) == pytest.approx(0.5)
    assert StepSchedule(kind="explicit", values=(0.3, 0.2)).step(5) == pytest.approx(0.2)
    with pytest.raises(InvalidInputError):
        StepSchedule(kind="constant", alpha=-1.0)


@pytest.mark.parametrize("name", list(CATALOG))
def test_interval_selection_matches_polytope_selection(name):
    fn = get_function(name)
    rng = np.random.default_rng(5)
    X = rng.uniform(-3.0, 3.0, size=(40, fn.dim))
    X[::4, 0] = 0.0
    X[::3, -1] = 0.0
    for x in X:
        assert_allclose(select_subgradient(fn, x), select_subgradient(fn, x, via_polytope=True), atol=1e-9)


def test_selection_rejects_wrong_dimension():
    with pytest.raises(InvalidInputError):
        select_subgradient(get_function("abs"), [1.0, 2.0])
