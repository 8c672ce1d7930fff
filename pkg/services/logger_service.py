"""
CFGWC Logger Service
====================
Centralized logging for the clustering toolkit.
Provides structured logging to console (always) and file (when enabled and writable).
"""
import logging
import os
import sys
from pathlib import Path

# Determine log directory (relative to project root unless overridden)
PROJECT_ROOT = Path(__file__).parent.parent
LOG_DIR = Path(os.getenv("CFGWC_LOG_DIR", str(PROJECT_ROOT / "logs")))
LOG_FILE = LOG_DIR / "cfgwc_activity.log"
CONSOLE_LEVEL = os.getenv("CFGWC_LOG_LEVEL", "INFO").upper()


def _file_logging_enabled() -> bool:
    if os.getenv("CFGWC_FILE_LOGGING", "0").lower() not in ("1", "true", "yes"):
        return False
    try:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        # Test if writable
        test_file = LOG_DIR / ".write_test"
        test_file.touch()
        test_file.unlink()
        return True
    except (OSError, PermissionError):
        return False


FILE_LOGGING_ENABLED = _file_logging_enabled()


class CFGWCFormatter(logging.Formatter):
    """Custom formatter with module-aware formatting"""

    def format(self, record):
        if not hasattr(record, "module_name"):
            record.module_name = record.name.upper()
        return super().format(record)


class _MaxLevelFilter(logging.Filter):
    """Allow only records strictly below the given level (keeps INFO/DEBUG
    on stdout while WARNING+ goes to stderr)."""

    def __init__(self, max_level: int):
        super().__init__()
        self.max_level = max_level

    def filter(self, record: logging.LogRecord) -> bool:
        return record.levelno < self.max_level


def create_logger(name: str = "CFGWC") -> logging.Logger:
    """
    Create and configure the toolkit logger.

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    console_format = CFGWCFormatter(
        fmt="[%(asctime)s] [%(levelname)s] [%(module_name)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    # stdout handler -> INFO and DEBUG only
    stdout_handler = logging.StreamHandler(sys.stdout)
    stdout_handler.setLevel(getattr(logging, CONSOLE_LEVEL, logging.INFO))
    stdout_handler.addFilter(_MaxLevelFilter(logging.WARNING))
    stdout_handler.setFormatter(console_format)
    logger.addHandler(stdout_handler)

    # stderr handler -> WARNING and above only
    stderr_handler = logging.StreamHandler(sys.stderr)
    stderr_handler.setLevel(logging.WARNING)
    stderr_handler.setFormatter(console_format)
    logger.addHandler(stderr_handler)

    if FILE_LOGGING_ENABLED:
        try:
            from logging.handlers import TimedRotatingFileHandler

            file_handler = TimedRotatingFileHandler(
                filename=str(LOG_FILE),
                when="midnight",
                interval=1,
                backupCount=30,
                encoding="utf-8",
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(console_format)
            file_handler.suffix = "%Y-%m-%d"
            logger.addHandler(file_handler)
        except Exception as e:
            logger.warning(f"Could not setup file logging: {e}")

    return logger


# Global logger instance
app_logger = create_logger()


def log_iteration(module: str, iteration: int, objective: float, delta: float):
    """Log one step of an alternating optimization loop"""
    app_logger.debug(
        f"[ITER {iteration}] J={objective:.10g} delta={delta:.3e}",
        extra={"module_name": module.upper()},
    )


def log_run(operation: str, details: str = "", success: bool = True):
    """Log a pipeline operation (run, compare, synth)"""
    status = "OK" if success else "FAIL"
    app_logger.info(f"[{operation}] {details} [{status}]", extra={"module_name": "PIPELINE"})


def log_artifact(path, detail: str = ""):
    """Log a written artifact file"""
    suffix = f" ({detail})" if detail else ""
    app_logger.info(f"[WRITE] {path}{suffix}", extra={"module_name": "EXPORT"})


def log_error(module: str, message: str, error: Exception = None):
    """
    Generic error logging.

    Args:
        module: Module name where error occurred
        message: Error message
        error: Optional exception object (traceback logged at DEBUG only)
    """
    if error:
        app_logger.error(f"{message}: {error}", extra={"module_name": module.upper()})
        app_logger.debug("Traceback", exc_info=error, extra={"module_name": module.upper()})
    else:
        app_logger.error(message, extra={"module_name": module.upper()})


def log_info(module: str, message: str):
    """Generic info logging"""
    app_logger.info(message, extra={"module_name": module.upper()})


def log_debug(module: str, message: str):
    """Generic debug logging"""
    app_logger.debug(message, extra={"module_name": module.upper()})


def log_warning(module: str, message: str):
    """Generic warning logging"""
    app_logger.warning(message, extra={"module_name": module.upper()})
