import csv
import json
import math
import os

import pytest

from qvacuum.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, run
from qvacuum.services.report_service import ReportService

pytestmark = pytest.mark.integration

@pytest.fixture
def write_config(tmp_path):
    def _write(**overrides):
        data = {
            "momenta": [{"label": "p0", "omega": 1.0, "epsilon": 0.3}],
            "overlap": {"epsilon": 1.0, "epsilon_prime": 0.0, "n_pairs_max": 4},
        }
        data.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return _write

def _cli(experiment, config, out, *extra):
    return run([experiment, "--config", config, "--out", out, "--no-log-file", *extra])

def _read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))

def test_overlap_scaling(write_config, output_dir, capsys):
    code = _cli("overlap-scaling", write_config(), output_dir)

    report_path = os.path.join(output_dir, "overlap-scaling.csv")
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == report_path
    rows = _read_csv(report_path)
    assert [int(r["n_pairs"]) for r in rows] == [1, 2, 3, 4]
    for row in rows:
        assert float(row["ratio"]) == pytest.approx(0.648054, abs=1e-6)
        assert row["pass"] == "true"
    assert float(rows[3]["overlap"]) == pytest.approx(math.cosh(1.0) ** -4, abs=1e-10)
    assert os.path.exists(os.path.join(output_dir, "overlap-scaling.manifest.json"))

def test_overlap_scaling_json(write_config, output_dir):
    code = _cli("overlap-scaling", write_config(), output_dir, "--format", "json")

    record = ReportService.load_json(os.path.join(output_dir, "overlap-scaling.json"))
    assert code == EXIT_OK
    assert record.experiment == "overlap-scaling"
    assert record.passed
    assert record.config["planned_cutoff"] == 7
    assert record.manifest.config_hash

def test_reports_are_byte_identical(write_config, tmp_path):
    config = write_config()
    first, second = str(tmp_path / "first"), str(tmp_path / "second")

    assert _cli("overlap-scaling", config, first) == EXIT_OK
    assert _cli("overlap-scaling", config, second) == EXIT_OK

    with open(os.path.join(first, "overlap-scaling.csv"), "rb") as a, \
            open(os.path.join(second, "overlap-scaling.csv"), "rb") as b:
        assert a.read() == b.read()

def test_unknown_experiment(write_config, output_dir, capsys):
    code = _cli("fly-to-the-moon", write_config(), output_dir)

    assert code == EXIT_VALIDATION
    assert "Unknown experiment" in capsys.readouterr().err
    assert not os.path.exists(output_dir)

def test_missing_argument(capsys):
    assert run(["--no-log-file"]) == EXIT_VALIDATION
    assert "[ERROR]" in capsys.readouterr().err

def test_invalid_omega(write_config, output_dir, capsys):
    config = write_config(momenta=[{"label": "p0", "omega": -1.0, "epsilon": 0.3}])

    code = _cli("vacuum-check", config, output_dir)

    assert code == EXIT_VALIDATION
    assert "momenta.0.omega" in capsys.readouterr().err

def test_cutoff_below_plan(write_config, output_dir, capsys):
    code = _cli("vacuum-check", write_config(cutoff=5), output_dir)

    assert code == EXIT_VALIDATION
    assert "minimal admissible cutoff is 7" in capsys.readouterr().err

def test_missing_config_file(tmp_path, output_dir):
    code = _cli("vacuum-check", str(tmp_path / "absent.json"), output_dir)
    assert code == EXIT_VALIDATION

def test_entropy_guard(write_config, output_dir, capsys):
    config = write_config(momenta=[{"label": "p0", "omega": 1.0, "epsilon": 0.0}])

    code = _cli("thermo-scan", config, output_dir)

    assert code == EXIT_VALIDATION
    assert "epsilon_min" in capsys.readouterr().err

def test_shallow_cutoff_fails_vacuum_checks(write_config, output_dir, capsys):
    code = _cli("vacuum-check", write_config(cutoff=7), output_dir)

    assert code == EXIT_NUMERIC
    rows = _read_csv(os.path.join(output_dir, "vacuum-check.csv"))
    failed = {r["check"] for r in rows if r["pass"] == "false"}
    assert "annihilation_residual" in failed
    assert "reconstruction_infidelity" in failed
    assert "[FAIL]" in capsys.readouterr().err

def test_tolerance_override_is_recorded(write_config, output_dir):
    code = _cli("algebra-check", write_config(), output_dir, "--tolerance", "1e-6", "--format", "json")

    record = ReportService.load_json(os.path.join(output_dir, "algebra-check.json"))
    assert code == EXIT_OK
    assert record.config["tolerance"] == 1e-6
    assert all(row["pass"] for row in record.rows)

@pytest.mark.slow
def test_thermo_scan(write_config, output_dir):
    code = _cli("thermo-scan", write_config(), output_dir)

    rows = _read_csv(os.path.join(output_dir, "thermo-scan.csv"))
    assert code == EXIT_OK
    assert len(rows) == 15
    for row in rows:
        assert abs(float(row["sinh2_star"]) - float(row["bose_einstein"])) < 1e-8

@pytest.mark.slow
def test_verify_all_is_reproducible(write_config, tmp_path):
    config = write_config()
    first, second = str(tmp_path / "first"), str(tmp_path / "second")

    assert _cli("verify-all", config, first) == EXIT_OK
    assert _cli("verify-all", config, second) == EXIT_OK

    with open(os.path.join(first, "verify-all.csv"), "rb") as a, \
            open(os.path.join(second, "verify-all.csv"), "rb") as b:
        assert a.read() == b.read()
