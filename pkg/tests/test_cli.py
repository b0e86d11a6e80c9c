import json

import pytest

from src.cli import app, build_parser, main


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def abs_config(tmp_path):
    return _write(tmp_path / "run_abs.json", {
        "function": "abs",
        "x0": [1.0],
        "schedule": {"kind": "constant", "alpha": 0.25},
        "bias": {"kind": "none", "epsilon": 0.0},
        "iterations": 8,
        "seed": 0,
    })


def test_run_command(tmp_path, abs_config, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", abs_config, "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2 + 9
    assert "运行完成" in capsys.readouterr().out


def test_seed_override_is_recorded(tmp_path, abs_config):
    out = tmp_path / "out"
    assert main(["run", "-c", abs_config, "-o", str(out), "--seed", "3"]) == 0
    first = (out / "trajectory.csv").read_text(encoding="utf-8").splitlines()[0]
    assert first.endswith("seed=3")


def test_run_without_config_is_usage_error():
    assert main(["run"]) == 2


def test_unknown_function_exit_code(tmp_path):
    config = _write(tmp_path / "bad.json", {
        "function": "foo", "x0": [1.0], "schedule": {"kind": "constant", "alpha": 0.1}, "seed": 0,
    })
    assert main(["run", "--config", config, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file_exit_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2


def test_diverged_run_exit_code(tmp_path):
    config = _write(tmp_path / "div.json", {
        "function": "power_2", "x0": [1.0], "schedule": {"kind": "constant", "alpha": 10.0},
        "iterations": 50, "seed": 0,
    })
    assert main(["run", "--config", config, "--out", str(tmp_path / "o")]) == 1


def test_sweep_with_empty_grid(tmp_path):
    config = _write(tmp_path / "sweep.json", {
        "function": "power_2", "eps_grid": [], "alpha_grid": [0.01],
    })
    assert main(["sweep", "--config", config, "--out", str(tmp_path / "o")]) == 2


def test_sweep_command(tmp_path):
    config = _write(tmp_path / "sweep.json", {
        "function": "power_2", "eps_grid": [0.2, 0.1, 0.05], "alpha_grid": [0.01],
        "iterations": 2000, "x0": [1.0],
    })
    out = tmp_path / "o"
    assert main(["sweep", "--config", config, "--out", str(out), "--jobs", "2"]) == 0
    assert (out / "sweep.csv").exists()
    assert (out / "sweep_fit.json").exists()


def test_verify_command(tmp_path, capsys):
    out = tmp_path / "v"
    assert main(["verify", "numeric-lemma", "--out", str(out)]) == 0
    report = json.loads((out / "verify_numeric-lemma.json").read_text(encoding="utf-8"))
    assert report["passed"]
    assert "PASS" in capsys.readouterr().out


def test_unknown_suite_is_rejected_by_parser():
    with pytest.raises(SystemExit) as info:
        main(["verify", "nonsense"])
    assert info.value.code == 2


def test_catalog_command(tmp_path, capsys):
    assert main(["catalog", "--out", str(tmp_path)]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert {e["name"] for e in entries} >= {"abs", "power_2", "double_well", "max_quad"}
    assert (tmp_path / "catalog.json").exists()


def test_parser_defaults():
    args = build_parser().parse_args(["sweep", "-c", "x.json"])
    assert args.jobs == 1
    assert args.seed is None
    assert not args.verbose


@pytest.mark.parametrize("override", [{"bias": None}, {"schedule": "constant"}, {"bias": [0.1]}])
def test_malformed_nested_fields_exit_code(tmp_path, override):
    data = {
        "function": "abs", "x0": [1.0], "schedule": {"kind": "constant", "alpha": 0.25},
        "iterations": 8, "seed": 0,
    }
    data.update(override)
    config = _write(tmp_path / "bad.json", data)
    assert main(["run", "--config", config, "--out", str(tmp_path / "o")]) == 2


def test_non_object_config_exit_code(tmp_path):
    config = _write(tmp_path / "list.json", [1, 2, 3])
    assert main(["run", "--config", config]) == 2


def test_verify_passes_jobs_to_runner(tmp_path, monkeypatch):
    seen = {}

    class RecordingRunner(app.VerificationRunner):
        def __init__(self, config, jobs=1):
            seen["jobs"] = jobs
            super().__init__(config, jobs=jobs)

    monkeypatch.setattr(app, "VerificationRunner", RecordingRunner)
    assert main(["verify", "exponents", "--out", str(tmp_path / "v"), "--jobs", "3"]) == 0
    assert seen["jobs"] == 3
