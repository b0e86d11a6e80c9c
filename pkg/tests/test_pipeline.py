import dataclasses
import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.models.data_types import BiasModel, StepSchedule
from src.models.errors import CatalogMissError, ConfigError, InvalidInputError
from src.parsers import load_trajectory_csv
from src.pipeline import (
    ExperimentConfig,
    ExperimentRunner,
    SweepConfig,
    SweepRunner,
    VerificationRunner,
    VerifyConfig,
    config_hash,
)

ABS_CONFIG = {
    "function": "abs",
    "x0": [1.0],
    "schedule": {"kind": "constant", "alpha": 0.25},
    "bias": {"kind": "none", "epsilon": 0.0},
    "iterations": 8,
    "seed": 0,
}


def _abs_config(tmp_path, **overrides):
    data = dict(ABS_CONFIG, output_path=str(tmp_path / "run"))
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


# ---------- 配置 ----------

def test_config_hash_is_canonical():
    assert config_hash({"b": 1, "a": [1.0, 2.0]}) == config_hash({"a": [1.0, 2.0], "b": 1})
    assert len(config_hash({"a": 1})) == 16


def test_experiment_config_round_trip(tmp_path):
    config = _abs_config(tmp_path)
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    path = tmp_path / "config.json"
    config.to_json(str(path))
    assert ExperimentConfig.from_json(str(path)).config_hash() == config.config_hash()


def test_scalar_x0_is_accepted(tmp_path):
    assert _abs_config(tmp_path, x0=0.5).x0 == (0.5,)


@pytest.mark.parametrize("missing", ["function", "x0", "schedule", "seed"])
def test_missing_field(missing):
    data = {k: v for k, v in ABS_CONFIG.items() if k != missing}
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_invalid_nested_schedule():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(ABS_CONFIG, schedule={"kind": "constant", "alpha": -1}))


@pytest.mark.parametrize("field,value", [("bias", None), ("bias", "adversarial"), ("schedule", "constant"),
                                         ("schedule", [0.1])])
def test_non_object_nested_fields(field, value):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(ABS_CONFIG, **{field: value}))


def test_validate_rejects_wrong_nested_types(tmp_path):
    config = dataclasses.replace(_abs_config(tmp_path), bias=None)
    with pytest.raises(ConfigError):
        config.validate()


def test_validate_rejects_bad_fields(tmp_path):
    with pytest.raises(ConfigError):
        _abs_config(tmp_path, iterations=0).validate()
    with pytest.raises(ConfigError):
        _abs_config(tmp_path, x0=[1.0, 2.0]).validate()
    with pytest.raises(CatalogMissError):
        _abs_config(tmp_path, function="foo").validate()


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(str(tmp_path / "absent.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(str(bad))


# ---------- 单次实验 ----------

def test_run_writes_trajectory(tmp_path):
    config = _abs_config(tmp_path)
    results = ExperimentRunner(config).run()
    assert results.status == "ok"
    assert results.report is None   # 轨迹过短

    lines = (tmp_path / "run" / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# config_hash={config.config_hash()} seed=0"
    assert lines[1] == "k,alpha_k,x_0,f,oracle_0,dist_crit"
    assert len(lines) == 2 + 9
    assert lines[-1] == "8,,0.0,0.0,,0.0"

    payload = json.loads((tmp_path / "run" / "fluctuation.json").read_text(encoding="utf-8"))
    assert payload["status"] == "ok"
    assert payload["fluctuation"] is None


def test_rerun_is_byte_identical(tmp_path):
    config = _abs_config(tmp_path, bias={"kind": "random_bounded", "epsilon": 0.1},
                         iterations=200, seed=5)
    csv_file = tmp_path / "run" / "trajectory.csv"
    ExperimentRunner(config).run()
    first = csv_file.read_bytes()
    ExperimentRunner(config).run()
    assert csv_file.read_bytes() == first


def test_trajectory_csv_loads_back(tmp_path):
    config = _abs_config(tmp_path, bias={"kind": "adversarial", "epsilon": 0.1},
                         iterations=60, seed=3)
    results = ExperimentRunner(config).run()
    loaded = load_trajectory_csv(str(tmp_path / "run" / "trajectory.csv"), "abs")
    assert loaded.seed == 3
    assert_array_equal(loaded.points, results.trajectory.points)
    assert_array_equal(loaded.steps, results.trajectory.steps)
    assert_array_equal(loaded.oracle_vectors, results.trajectory.oracle_vectors)


def test_truncated_csv_is_rejected(tmp_path):
    config = _abs_config(tmp_path)
    ExperimentRunner(config).run()
    csv_file = tmp_path / "run" / "trajectory.csv"
    lines = csv_file.read_text(encoding="utf-8").splitlines()
    csv_file.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_trajectory_csv(str(csv_file))


def test_diverged_run_keeps_partial_trajectory(tmp_path):
    config = ExperimentConfig(function="power_2", x0=(1.0,), schedule=StepSchedule(alpha=10.0),
                              bias=BiasModel(), iterations=50, output_path=str(tmp_path / "div"))
    results = ExperimentRunner(config).run()
    assert results.status == "diverged"
    assert len(results.trajectory) < 51
    assert (tmp_path / "div" / "trajectory.csv").exists()


def test_long_run_has_fluctuation_report(tmp_path):
    config = _abs_config(tmp_path, schedule={"kind": "constant", "alpha": 0.4}, iterations=100)
    results = ExperimentRunner(config).run()
    assert results.report.radius == pytest.approx(0.2, abs=1e-9)


# ---------- 扫描 ----------

def test_sweep_config_requires_eps():
    config = SweepConfig(function="power_2", eps_grid=(), alpha_grid=(0.01,))
    with pytest.raises(ConfigError):
        config.validate()


def test_sweep_runner_outputs(tmp_path):
    config = SweepConfig(function="power_2", eps_grid=(0.2, 0.1, 0.05), alpha_grid=(0.01,),
                         iterations=2000, x0=(1.0,), output_path=str(tmp_path / "sweep"))
    results = SweepRunner(config).run()
    lines = (tmp_path / "sweep" / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "epsilon,alpha,seed,radius,value_dist,status"
    assert len(lines) == 2 + 3
    fit = json.loads((tmp_path / "sweep" / "sweep_fit.json").read_text(encoding="utf-8"))["fit"]
    assert fit["fitted_slope"] == pytest.approx(1.0, abs=0.05)
    assert results.table.fitted_slope == fit["fitted_slope"]


def test_sweep_config_round_trip():
    config = SweepConfig(function="abs", eps_grid=(0.1, 0.05), alpha_grid=(0.4, 0.04), seeds=(1, 2))
    assert SweepConfig.from_dict(config.to_dict()) == config


# ---------- 验证 ----------

def _quick_verify(tmp_path, **overrides):
    config = VerifyConfig(
        output_path=str(tmp_path / "verify"), lemma_triples=500, polytope_sets=50,
        catalog_resolution=201, convex_iterations=1000, convex_seeds=2, ekeland_triples=10,
        interpolation_configs=5,
    )
    return dataclasses.replace(config, **overrides)


@pytest.mark.parametrize("suite", ["exponents", "numeric-lemma", "polytope", "convex",
                                   "error-bound", "ekeland", "interpolation"])
def test_quick_suites_pass(tmp_path, suite):
    report = VerificationRunner(_quick_verify(tmp_path)).run(suite)
    assert report["passed"], [c for c in report["checks"] if not c["passed"]]
    saved = json.loads((tmp_path / "verify" / f"verify_{suite}.json").read_text(encoding="utf-8"))
    assert saved["n_checks"] == report["n_checks"] > 0
    assert saved["seed"] == 0


def test_unknown_suite(tmp_path):
    with pytest.raises(ConfigError):
        VerificationRunner(_quick_verify(tmp_path)).run("nonsense")


def test_verify_config_from_dict_ignores_unknown_keys():
    config = VerifyConfig.from_dict({"seed": 4, "flow_eps": [0.0], "comment": "x"})
    assert config.seed == 4
    assert config.flow_eps == (0.0,)


def test_exponent_check_reports_products(tmp_path):
    report = VerificationRunner(_quick_verify(tmp_path)).run("exponents")
    assert all(c["max_violation"] <= 1e-15 for c in report["checks"])
    assert np.isfinite([c["max_violation"] for c in report["checks"]]).all()
