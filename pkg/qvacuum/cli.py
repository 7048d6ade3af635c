"""
Command-line front end.

    qvacuum <experiment> [--config PATH] [--out DIR] [--format csv|json] [--tolerance FLOAT]

Exit codes: 0 every invariant holds, 1 validation / resource / I/O error,
2 numerical failure or a failed invariant.
"""
import argparse
import logging
import sys
from typing import List, Optional

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError, ReportIOError, ResourceLimitError
from qvacuum.core.logging_config import setup_logging
from qvacuum.schemas.run_config import EXPERIMENTS, parse_config, with_tolerance
from qvacuum.services.report_service import ReportService, read_config_text
from qvacuum.tasks.experiments import run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    # Usage errors are validation errors (exit 1), not argparse's default 2
    def error(self, message: str):
        raise FockValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qvacuum",
        description="Numerical checks of q-deformed coproducts, Bogoliubov vacua, thermal and entanglement structure.",
    )
    parser.add_argument("experiment", help=f"one of: {', '.join(EXPERIMENTS)}")
    parser.add_argument("--config", help="JSON run config (default: the packaged default config)")
    parser.add_argument("--out", help="output directory (default: output_dir from the config)")
    parser.add_argument("--format", help="csv or json (default: format from the config)")
    parser.add_argument("--tolerance", type=float, help="override the config tolerance")
    parser.add_argument("--log-level", default=None, help=f"logging level (default {settings.LOG_LEVEL})")
    parser.add_argument("--no-log-file", action="store_true", help="log to stderr only")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except FockValidationError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_VALIDATION

    setup_logging(ns.log_level, log_to_file=False if ns.no_log_file else None)
    try:
        if ns.experiment not in EXPERIMENTS:
            raise FockValidationError(f"Unknown experiment {ns.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        cfg = parse_config(read_config_text(ns.config))
        if ns.tolerance is not None:
            cfg = with_tolerance(cfg, ns.tolerance)
        record = run_experiment(ns.experiment, cfg)
        paths = ReportService(ns.out or cfg.output_dir).emit(record, ns.format or cfg.format)
    except (FockValidationError, ResourceLimitError, ReportIOError) as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as e:
        residual = f" (residual {e.residual:.3e})" if e.residual is not None else ""
        logger.error(f"NumericError: {str(e)}{residual}")
        print(f"[ERROR] {e}{residual}", file=sys.stderr)
        return EXIT_NUMERIC

    print(paths["report"])
    if not record.passed:
        print(f"[FAIL] {', '.join(record.failures()) or 'row tolerance verdicts'}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
