"""Structured JSON logging for jobs."""
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from src.config import settings


class JSONFormatter(logging.Formatter):
    def format(self, record):
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName
        }
        if hasattr(record, "duration"):
            log_entry["duration_seconds"] = record.duration
        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_entry)


def setup_logging(job_name: str, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configure the root logger with a JSON-lines file handler and a console handler.

    Calling it twice for the same process replaces the previous handlers.

    Args:
        job_name: Used for the log file name (<log_dir>/<job_name>.log)
        log_dir: Directory for log files (uses settings if not provided)

    Returns:
        The configured root logger
    """
    log_dir = Path(log_dir or settings.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / f"{job_name}.log"

    # Setup file handler with JSON formatter
    file_handler = logging.FileHandler(log_file)
    file_handler.setFormatter(JSONFormatter())

    # Setup console handler with standard format
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        if getattr(handler, "_fmi_handler", False):
            root_logger.removeHandler(handler)
            handler.close()
    for handler in (file_handler, console_handler):
        handler._fmi_handler = True
        root_logger.addHandler(handler)
    root_logger.setLevel(settings.log_level.upper())
    return root_logger
