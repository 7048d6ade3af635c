import csv
import hashlib
import io
import json
import logging
import os
import platform
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np
import scipy

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, ReportIOError
from qvacuum.schemas.report import Cell, ReportRecord, RunManifest

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ("suite", "check", "parameter", "value", "tolerance", "pass", "leak")

# Column order of every CSV report; documented in README.md
ROW_SCHEMAS: Dict[str, tuple] = {
    "algebra-check": CHECK_COLUMNS,
    "bogoliubov-check": CHECK_COLUMNS,
    "vacuum-check": CHECK_COLUMNS,
    "verify-all": CHECK_COLUMNS,
    "thermo-scan": (
        "beta", "omega", "epsilon_star", "sinh2_star", "bose_einstein", "deviation", "tolerance", "pass", "leak",
    ),
    "entangle-report": (
        "epsilon", "n", "w_analytic", "w_empirical", "partial_sum", "partial_sum_closed", "deviation",
        "tolerance", "pass", "leak",
    ),
    "overlap-scaling": (
        "n_pairs", "overlap", "predicted", "ratio", "deviation", "tolerance", "pass", "leak",
    ),
}


def format_cell(value: Cell) -> str:
    """Shortest round-trip text for floats; fixed spellings for the rest."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def config_hash(config: Dict[str, Any]) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_manifest(config: Dict[str, Any]) -> RunManifest:
    return RunManifest(
        tool=settings.PROJECT_NAME,
        version=settings.VERSION,
        config_hash=config_hash(config),
        python=platform.python_version(),
        numpy=np.__version__,
        scipy=scipy.__version__,
    )


def default_config_path() -> str:
    return os.path.join(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
        "core", "configs", "default.json",
    )


class ReportService:
    def __init__(self, output_dir: str):
        """Writes reports and their manifest sidecars under ``output_dir``"""
        self.output_dir = output_dir

    def _path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _write_text(self, path: str, text: str) -> None:
        try:
            os.makedirs(self.output_dir, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            logger.error(f"Could not write {path}: {str(e)}")
            raise ReportIOError(f"Could not write {path}: {e.strerror or e}") from e

    def render_csv(self, report: ReportRecord) -> str:
        columns = ROW_SCHEMAS.get(report.experiment, report.columns)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in report.rows:
            writer.writerow([format_cell(row.get(column)) for column in columns])
        return buffer.getvalue()

    def render_json(self, report: ReportRecord) -> str:
        payload = report.model_dump(mode="json", by_alias=True, exclude={"manifest": {"timestamp_utc", "duration_seconds"}})
        return json.dumps(payload, indent=2, allow_nan=True) + "\n"

    def emit(self, report: ReportRecord, format: str = "csv") -> Dict[str, str]:
        """
        Write ``<experiment>.<format>`` plus ``<experiment>.manifest.json``.

        The report file depends only on the config and the results; the
        timestamp and wall-clock duration go to the sidecar.

        Returns
        -------
        dict
            ``{"report": path, "manifest": path}``
        """
        if format not in ("csv", "json"):
            raise FockValidationError(f"Unknown report format {format!r}; use csv or json")
        if report.manifest is None:
            report = report.model_copy(update={"manifest": build_manifest(report.config)})

        report_path = self._path(f"{report.experiment}.{format}")
        text = self.render_csv(report) if format == "csv" else self.render_json(report)
        self._write_text(report_path, text)

        sidecar = report.manifest.model_copy(
            update={
                "timestamp_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "duration_seconds": report.duration_seconds,
            }
        )
        manifest_payload = {
            **sidecar.model_dump(mode="json"),
            "experiment": report.experiment,
            "passed": report.passed,
            "invariants": [check.model_dump(mode="json", by_alias=True) for check in report.invariants],
        }
        manifest_path = self._path(f"{report.experiment}.manifest.json")
        self._write_text(manifest_path, json.dumps(manifest_payload, indent=2, allow_nan=True) + "\n")

        logger.info(f"Wrote {report_path} ({len(report.rows)} rows) and {manifest_path}")
        return {"report": report_path, "manifest": manifest_path}

    @staticmethod
    def load_json(path: str) -> ReportRecord:
        try:
            with open(path, "r", encoding="utf-8") as f:
                return ReportRecord.model_validate_json(f.read())
        except OSError as e:
            raise ReportIOError(f"Could not read {path}: {e.strerror or e}") from e


def read_config_text(path: Optional[str]) -> str:
    path = path or default_config_path()
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        logger.error(f"Error loading config {path}: {str(e)}")
        raise ReportIOError(f"Could not read config {path}: {e.strerror or e}") from e
