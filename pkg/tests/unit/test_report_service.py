import json
import os

import pytest

from qvacuum.core.exceptions import FockValidationError, ReportIOError
from qvacuum.schemas.report import InvariantCheck, ReportRecord
from qvacuum.services.report_service import (
    ROW_SCHEMAS,
    ReportService,
    build_manifest,
    config_hash,
    format_cell,
    read_config_text,
)

pytestmark = pytest.mark.unit

@pytest.fixture
def report():
    rows = [
        {"n_pairs": 1, "overlap": 0.5, "predicted": 0.5, "ratio": 0.5, "deviation": 0.0,
         "tolerance": 1e-10, "pass": True, "leak": 0.0},
        {"n_pairs": 2, "overlap": 0.25, "predicted": 0.25, "ratio": 0.5, "deviation": 1e-17,
         "tolerance": 1e-10, "pass": True, "leak": 2e-12},
    ]
    return ReportRecord(
        experiment="overlap-scaling",
        config={"tolerance": 1e-8, "momenta": [{"label": "p0"}]},
        columns=ROW_SCHEMAS["overlap-scaling"],
        rows=rows,
        invariants=[InvariantCheck.below("overlap.power_law", 1e-17, 1e-10)],
        duration_seconds=1.5,
    )

def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(3) == "3"
    assert format_cell(0.1) == "0.1"
    assert format_cell(1e-17) == "1e-17"
    assert format_cell("p0") == "p0"

def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})

def test_invariant_check():
    assert InvariantCheck.below("x", 1e-9, 1e-8).passed
    assert not InvariantCheck.below("x", 1e-7, 1e-8).passed
    assert not InvariantCheck.below("x", float("nan"), 1e-8).passed
    assert InvariantCheck.below("x", 0.0, 0.0).model_dump(by_alias=True)["pass"] is True

def test_report_verdicts(report):
    assert report.passed
    assert report.truncation_leak == 2e-12
    assert report.failures() == []

    failing = report.model_copy(update={"invariants": [InvariantCheck.below("bad", 1.0, 0.1)]})
    assert not failing.passed
    assert failing.failures() == ["bad"]

def test_render_csv(report, output_dir):
    text = ReportService(output_dir).render_csv(report)

    lines = text.splitlines()
    assert lines[0] == "n_pairs,overlap,predicted,ratio,deviation,tolerance,pass,leak"
    assert lines[2] == "2,0.25,0.25,0.5,1e-17,1e-10,true,2e-12"
    assert text.endswith("\n")

def test_emit_writes_report_and_manifest(report, output_dir):
    paths = ReportService(output_dir).emit(report, "csv")

    assert paths["report"] == os.path.join(output_dir, "overlap-scaling.csv")
    with open(paths["manifest"], "r", encoding="utf-8") as f:
        manifest = json.load(f)
    assert manifest["experiment"] == "overlap-scaling"
    assert manifest["passed"] is True
    assert manifest["duration_seconds"] == 1.5
    assert manifest["config_hash"] == config_hash(report.config)
    assert manifest["invariants"][0]["pass"] is True
    assert manifest["timestamp_utc"]

def test_json_report_round_trip(report, output_dir):
    service = ReportService(output_dir)

    paths = service.emit(report, "json")
    loaded = service.load_json(paths["report"])

    assert loaded.rows == report.rows
    assert loaded.invariants == report.invariants
    assert loaded.manifest.timestamp_utc is None
    with open(paths["report"], "r", encoding="utf-8") as f:
        assert "duration_seconds" not in f.read()

def test_report_is_independent_of_run_time(report, output_dir):
    service = ReportService(output_dir)

    first = service.render_json(report.model_copy(update={"manifest": build_manifest(report.config)}))
    slower = report.model_copy(update={"duration_seconds": 99.0, "manifest": build_manifest(report.config)})

    assert service.render_json(slower) == first

def test_emit_rejects_unknown_format(report, output_dir):
    with pytest.raises(FockValidationError):
        ReportService(output_dir).emit(report, "xml")

def test_unwritable_output(report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("occupied")
    with pytest.raises(ReportIOError):
        ReportService(str(blocker / "reports")).emit(report, "csv")

def test_missing_config_file(tmp_path):
    with pytest.raises(ReportIOError):
        read_config_text(str(tmp_path / "missing.json"))
