import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import linregress

from src.catalog import get_function
from src.flow import (
    decrease_check,
    integrate,
    interpolate,
    interpolation_defect,
    quantitative_estimate_check,
    stationarity_check,
    weak_lyapunov_check,
)
from src.models.data_types import BiasModel, StepSchedule
from src.models.errors import InapplicableError, InvalidInputError
from src.solver.biased_subgradient import run


def test_integrate_abs_moves_at_unit_speed():
    curve = integrate(get_function("abs"), [1.0], 0.0, None, T=0.5, h=0.01)
    assert len(curve) == 51
    assert_allclose(curve.states[:, 0], 1.0 - curve.times, atol=1e-12)


def test_integrate_rejects_bad_mesh():
    with pytest.raises(InvalidInputError):
        integrate(get_function("abs"), [1.0], 0.0, None, T=0.01, h=0.1)


def test_fixed_bias_flow_has_shifted_equilibrium():
    bias = BiasModel(kind="fixed", epsilon=0.1, direction=(1.0,))
    curve = integrate(get_function("power_2"), [0.0], 0.1, bias, T=10.0, h=1e-3)
    assert curve.states[-1, 0] == pytest.approx(-0.05, abs=1e-6)


@pytest.mark.parametrize("name,x0,eps", [
    ("power_2", 1.5, 0.0),
    ("power_2", 1.5, 0.1),
    ("abs", 1.5, 0.1),
])
def test_weak_lyapunov_holds(name, x0, eps):
    fn = get_function(name)
    curve = integrate(fn, [x0], eps, None, T=2.0, h=1e-3)
    report = weak_lyapunov_check(curve, fn, eps)
    assert report.passed, report.to_dict()


def test_quantitative_hit_time_on_square():
    fn = get_function("power_2")
    curve = integrate(fn, [1.5], 0.0, None, T=2.0, h=1e-3)
    report = quantitative_estimate_check(curve, fn, 0.0, a=0.0, b=2.25, delta=0.5)
    assert not report.violation
    assert report.hit_time <= report.horizon
    assert report.hit_time == pytest.approx(np.log(6.0) / 2, abs=0.02)


def test_quantitative_requires_delta_above_eps():
    fn = get_function("power_2")
    curve = integrate(fn, [1.5], 0.1, None, T=0.1, h=1e-3)
    with pytest.raises(InvalidInputError):
        quantitative_estimate_check(curve, fn, 0.1, a=0.0, b=2.25, delta=0.1)


def test_quantitative_band_exit_is_inapplicable():
    fn = get_function("power_2")
    curve = integrate(fn, [1.5], 0.0, None, T=2.0, h=1e-3)
    with pytest.raises(InapplicableError):
        quantitative_estimate_check(curve, fn, 0.0, a=1.0, b=2.25, delta=0.5)


def test_stationarity_near_minimizer():
    fn = get_function("power_2")
    curve = integrate(fn, [0.01], 0.0, None, T=1.0, h=1e-3)
    report = stationarity_check(curve, fn, 0.0, tol=1e-3, tol_prime=0.05)
    assert report.passed


def test_stationarity_inapplicable_for_large_variation():
    fn = get_function("power_2")
    curve = integrate(fn, [1.0], 0.0, None, T=1.0, h=1e-3)
    with pytest.raises(InapplicableError):
        stationarity_check(curve, fn, 0.0, tol=1e-3, tol_prime=0.05)


def test_decrease_from_sublevel():
    fn = get_function("power_2")
    curve = integrate(fn, [1.0], 0.1, None, T=2.0, h=1e-3)
    assert decrease_check(curve, fn, 0.1, level=1.0).passed


def test_decrease_inapplicable_cases():
    fn = get_function("power_2")
    curve = integrate(fn, [1.0], 0.0, None, T=0.5, h=1e-3)
    with pytest.raises(InapplicableError):
        decrease_check(curve, fn, 0.0, level=0.0)
    with pytest.raises(InapplicableError):
        decrease_check(curve, fn, 0.0, level=0.5)


def test_interpolation_passes_through_iterates():
    fn = get_function("power_2")
    traj = run(fn, [1.0], StepSchedule(alpha=0.1), BiasModel(), K=5)
    curve = interpolate(traj, fn, h=0.025)
    assert curve.times[0] == 0.0
    assert curve.horizon == pytest.approx(0.5)
    assert_allclose(curve.states[0], traj.points[0])
    assert_allclose(curve.states[4], traj.points[1], atol=1e-12)
    assert_allclose(curve.states[-1], traj.points[-1], atol=1e-12)


def test_interpolated_bias_is_bounded():
    fn = get_function("abs")
    bias = BiasModel(kind="adversarial", epsilon=0.2)
    traj = run(fn, [1.0], StepSchedule(alpha=0.05), bias, K=60)
    curve = interpolate(traj, fn)
    assert np.linalg.norm(curve.bias_vectors, axis=1).max() <= 0.2 + 1e-12


@pytest.mark.parametrize("name,x0,kind,eps", [
    ("abs", [1.0], "none", 0.0),
    ("double_well", [2.0], "adversarial", 0.1),
    ("max_quad", [1.0, 1.0], "random_bounded", 0.05),
])
def test_interpolation_defect_within_bound(name, x0, kind, eps):
    fn = get_function(name)
    traj = run(fn, x0, StepSchedule(alpha=0.005), BiasModel(kind=kind, epsilon=eps), K=200, seed=2)
    report = interpolation_defect(traj, fn, eps)
    assert report.passed, report.to_dict()


def test_gradient_flow_of_square_is_exponential():
    curve = integrate(get_function("power_2"), [1.0], 0.0, None, T=1.0, h=1e-4)
    assert curve.states[-1, 0] == pytest.approx(np.exp(-2.0), abs=1e-3)


def test_adversarial_bias_halves_abs_descent_speed():
    curve = integrate(get_function("abs"), [1.0], 0.5, "adversarial", T=2.0, h=1e-4)
    assert curve.states[-1, 0] == pytest.approx(0.0, abs=2e-4)
    mid = len(curve) // 2
    assert curve.states[mid, 0] == pytest.approx(0.5, abs=2e-4)


@pytest.mark.parametrize("name,x0", [("power_2", 1.0), ("double_well", 2.0)])
def test_integrator_converges_at_first_order(name, x0):
    fn = get_function(name)
    steps = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
    ends = [integrate(fn, [x0], 0.0, None, T=1.0, h=h).states[-1, 0] for h in steps]
    changes = np.abs(np.diff(ends))
    fit = linregress(np.log(steps[:-1]), np.log(changes))
    assert fit.slope >= 0.9
