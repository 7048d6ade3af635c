import logging
import os
from logging.handlers import RotatingFileHandler

from qvacuum.core.config import settings

def setup_logging(level: str = None, log_to_file: bool = None):
    """Configure logging for the command-line tool"""
    level = (level or settings.LOG_LEVEL).upper()
    log_to_file = settings.LOG_TO_FILE if log_to_file is None else log_to_file

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Repeated CLI invocations inside one interpreter (tests) must not stack handlers
    for handler in list(root_logger.handlers):
        if getattr(handler, "_qvacuum", False):
            root_logger.removeHandler(handler)
            handler.close()

    file_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    console_formatter = logging.Formatter(
        '%(levelname)s - %(message)s'
    )

    if log_to_file:
        os.makedirs(settings.LOG_DIR, exist_ok=True)
        file_handler = RotatingFileHandler(
            os.path.join(settings.LOG_DIR, 'qvacuum.log'),
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(file_formatter)
        file_handler._qvacuum = True
        root_logger.addHandler(file_handler)

    # Console goes to stderr so CSV/JSON on stdout stays clean
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(console_formatter)
    console_handler._qvacuum = True
    root_logger.addHandler(console_handler)

    logging.getLogger('qvacuum.services').setLevel(level)
    logging.getLogger('qvacuum.tasks').setLevel(level)

    logging.info("Logging configured successfully")
