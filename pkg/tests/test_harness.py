"""Config parsing, experiment runs, report emission, KS statistics, CLI."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qcs.errors import EmptySample, SchemaError
from qcs.harness import (
    ExperimentConfig,
    Report,
    emit_report,
    render_report,
    run_experiment,
)
from qcs.spectral import StepCDF
from qcs.stats import empirical_cdf, ks_statistic, ks_threshold
from qcs.cli import main as cli_main

WITNESS_CDF = StepCDF((-1.0, 0.0, 1.0), (0.625, 0.875, 1.0))


def test_ks_statistic_perfect_fit():
    # samples placed at the quantile levels of the target
    qs = np.linspace(0.001, 0.999, 2000)
    samples = [WITNESS_CDF.quantile(float(s)) for s in qs]
    assert ks_statistic(samples, WITNESS_CDF) < 0.01


def test_ks_statistic_constant_samples():
    cdf = StepCDF((0.0, 1.0), (0.3, 1.0))
    stat = ks_statistic(np.ones(100), cdf)
    assert stat >= 0.3


def test_ks_statistic_empty():
    with pytest.raises(EmptySample):
        ks_statistic([], WITNESS_CDF)


def test_ks_threshold_table():
    assert abs(ks_threshold(10_000, 0.99) - 0.0163) < 1e-12
    with pytest.raises(KeyError):
        ks_threshold(100, 0.5)


def test_empirical_cdf():
    assert empirical_cdf([1.0, 2.0, 3.0], 2.0) == 2 / 3


def measure_config(**extra):
    base = {
        "kind": "measure",
        "operator": [[1, 0, 0], [0, 0, 0], [0, 0, -1]],
        "state": [[1.0, 0.0], [1.0, 1.0], [0.0, -1.0]],
        "normalize": True,
        "barrier": {"kind": "rotation", "c": "3/8"},
        "seed": 5,
        "samples": 2000,
    }
    base.update(extra)
    return ExperimentConfig.from_json(base)


def test_measure_experiment_runs():
    report = run_experiment(measure_config())
    dist = report.results["distribution"]
    assert [row["eigenvalue"] for row in dist] == [-1.0, 0.0, 1.0]
    assert report.results["max_error"] < 1e-12
    assert report.results["ks"]["passed"]


def test_measure_reproducibility():
    r1 = run_experiment(measure_config())
    r2 = run_experiment(measure_config())
    assert render_report(
        Report(r1.experiment, r1.results, r1.seed, 0.0), "json"
    ) == render_report(Report(r2.experiment, r2.results, r2.seed, 0.0), "json")


def test_measure_samples_file(tmp_path):
    out = tmp_path / "samples.txt"
    config = measure_config(samples=50, samples_out=str(out))
    run_experiment(config)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 50
    assert all(float(x) in (-1.0, 0.0, 1.0) for x in lines)


def test_schema_rejects_non_hermitian():
    with pytest.raises(SchemaError):
        run_experiment(
            ExperimentConfig.from_json(
                {"kind": "measure", "operator": [[0, 1], [0, 0]], "state": [1, 0]}
            )
        )


def test_schema_rejects_unnormalized_state():
    with pytest.raises(SchemaError):
        run_experiment(
            ExperimentConfig.from_json(
                {"kind": "measure", "operator": [[1, 0], [0, 1]], "state": [1, 1]}
            )
        )


def test_schema_rejects_unknown_kind():
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json({"kind": "nope"})
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json({"kind": "measure", "seed": -3})
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json([1, 2, 3])


def test_example4_experiment():
    report = run_experiment(ExperimentConfig.from_json({"kind": "example4"}))
    res = report.results
    assert res["disagreement_exact"] == "1/2"
    assert res["repaired_disagreement_exact"] == "0"
    assert res["repair_equals_shift_ae"] is True
    assert res["passed"] is True


def test_example4_with_rotated_barrier():
    report = run_experiment(
        ExperimentConfig.from_json(
            {"kind": "example4", "barrier": {"kind": "rotation", "c": "1/5"}}
        )
    )
    assert report.results["disagreement_exact"] == "1/2"
    assert report.results["repaired_disagreement_exact"] == "0"


def test_cat_experiment_threshold():
    awake = run_experiment(
        ExperimentConfig.from_json({"kind": "cat", "p": "3/10", "z": 0.8})
    )
    assert awake.results["outcome"] == "awake" and awake.results["value"] == 1
    asleep = run_experiment(
        ExperimentConfig.from_json({"kind": "cat", "p": "3/10", "z": 0.6})
    )
    assert asleep.results["outcome"] == "asleep" and asleep.results["value"] == 0
    boundary = run_experiment(
        ExperimentConfig.from_json({"kind": "cat", "p": "3/10", "z": "7/10"})
    )
    assert boundary.results["outcome"] == "asleep"


def test_dynamics_experiment_rows():
    config = ExperimentConfig.from_json(
        {
            "kind": "dynamics",
            "H": [[0, 1], [1, 0]],
            "A": [[1, 0], [0, -1]],
            "psi0": [1, 0],
            "times": [0.0, 0.5, 1.0],
        }
    )
    report = run_experiment(config)
    assert report.results["passed"] is True
    rows = report.results["rows"]
    assert [row["t"] for row in rows] == [0.0, 0.5, 1.0]
    for row in rows:
        assert abs(row["operator_side"] - math.cos(2 * row["t"])) < 1e-10
        assert row["gap"] < 1e-10


def test_phase_space_experiment():
    rng = np.random.default_rng(2)
    n = 8
    raw = rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n))
    total = math.sqrt(float((np.abs(raw) ** 2).sum()) * 0.25)
    psi = [[[z.real, z.imag] for z in row] for row in raw / total]
    config = ExperimentConfig.from_json(
        {
            "kind": "phase_space",
            "sigma": "1/2",
            "N": n,
            "dq": 0.25,
            "psi": psi,
            "observable": {"kind": "position", "g": {"kind": "identity"}},
        }
    )
    report = run_experiment(config)
    assert report.results["gap"] < 1e-12
    assert report.results["passed"] is True


def test_verify_suite_experiment_kind():
    report = run_experiment(
        ExperimentConfig.from_json({"kind": "verify_suite", "suite": "spectral"})
    )
    assert report.results["passed"] is True
    assert all(row["passed"] for row in report.results["checks"])
    with pytest.raises(SchemaError):
        run_experiment(ExperimentConfig.from_json({"kind": "verify_suite", "suite": "nope"}))


def test_report_emission_deterministic(tmp_path):
    report = run_experiment(measure_config(samples=0))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(report, "json", str(p1))
    emit_report(report, "json", str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    parsed = json.loads(p1.read_text())
    assert parsed["experiment"] == "measure"


def test_report_csv_rows(tmp_path):
    report = run_experiment(measure_config(samples=0))
    path = tmp_path / "dist.csv"
    emit_report(report, "csv", str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "eigenvalue,probability"
    assert len(lines) == 4


def test_dynamics_csv(tmp_path):
    config = ExperimentConfig.from_json(
        {
            "kind": "dynamics",
            "H": [[0, 1], [1, 0]],
            "A": [[1, 0], [0, -1]],
            "psi0": [1, 0],
            "times": [0.0, 1.0],
        }
    )
    path = tmp_path / "dyn.csv"
    emit_report(run_experiment(config), "csv", str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,operator_side,label_side,gap"
    assert len(lines) == 3


def test_floats_rendered_at_17_digits():
    report = Report("x", {"value": 1 / 3}, 0, 0.0)
    assert "0.33333333333333331" in render_report(report, "json")


def test_cli_example4_and_cat(capsys):
    assert cli_main(["example4"]) == 0
    out = capsys.readouterr().out
    assert '"1/2"' in out.replace(" ", "") or "0.5" in out
    assert cli_main(["cat", "--p", "3/10", "--z", "0.8"]) == 0
    assert "awake" in capsys.readouterr().out


def test_cli_run_and_config_errors(tmp_path, capsys):
    config = {
        "kind": "measure",
        "operator": [[1, 0], [0, -1]],
        "state": [1, 0],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert cli_main(["run", "--config", str(path)]) == 0
    capsys.readouterr()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "nope"}))
    assert cli_main(["run", "--config", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    assert cli_main(["run", "--config", str(missing)]) == 2


def test_cli_verify_suite_runs(capsys):
    assert cli_main(["verify", "--suite", "spectral"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "checks passed" in out


def test_cli_entry_point_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "qcs.cli", "cat", "--p", "1/2", "--z", "0.75"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "awake" in proc.stdout
