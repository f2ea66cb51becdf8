"""
Logging for hypangles runs

Everything goes through loguru. Console output is on stderr because the
CSV tables own the output directory; records carry the subcommand and the
config hash once `bind_run` has been called.
"""
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from loguru import logger

from config.settings import settings

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<magenta>{extra[command]}</magenta> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {extra[command]} {extra[config_hash]} | "
    "{name}:{function}:{line} | {message}"
)

# Libraries whose stdlib loggers are forwarded
FORWARDED = ("joblib", "py.warnings")


class InterceptHandler(logging.Handler):
    """Forward stdlib logging records (joblib, scipy warnings) to loguru"""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Walk out of the logging module so loguru reports the real caller
        frame, depth = logging.currentframe(), 2
        while frame is not None and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def _file_sink(log_file: str, log_level: str, json_logs: bool) -> Dict[str, Any]:
    path = Path(log_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    sink: Dict[str, Any] = {
        "sink": str(path),
        "level": log_level,
        "rotation": "10 MB",
        "retention": "30 days",
        "encoding": "utf-8",
    }
    if json_logs:
        sink["serialize"] = True
    else:
        sink["format"] = FILE_FORMAT
    return sink


def setup_logging(
    log_level: str = settings.LOG_LEVEL,
    log_file: Optional[str] = settings.LOG_FILE,
    json_logs: bool = False,
) -> None:
    """
    Configure the loguru sinks for one run

    Args:
        log_level: DEBUG shows per-shard and per-level detail, INFO the
            progress of each stage
        log_file: Optional rotating file sink
        json_logs: Serialize file records as JSON lines
    """
    handlers = [{"sink": sys.stderr, "level": log_level, "format": CONSOLE_FORMAT, "colorize": True}]
    if log_file:
        handlers.append(_file_sink(log_file, log_level, json_logs))
    logger.configure(handlers=handlers, extra={"command": "-", "config_hash": "-"})

    # Integration warnings from scipy arrive as warnings, not log records
    logging.captureWarnings(True)
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    for name in FORWARDED:
        logging.getLogger(name).handlers = [InterceptHandler()]


def bind_run(command: str, config_hash: str) -> None:
    """Tag every later record with the subcommand and config hash"""
    logger.configure(extra={"command": command, "config_hash": config_hash})


def get_logger(name: str) -> "logger":
    """Logger bound to a module name"""
    return logger.bind(name=name)
