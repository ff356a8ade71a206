"""Colored logger shared by every module of the toolkit."""

import inspect
import logging
import sys

from mutual_independence.common.settings import get_settings


COLOR_MAP = {
    "DEBUG": "\033[36m",  # Cyan
    "INFO": "\033[32m",  # Green
    "WARNING": "\033[33m",  # Yellow
    "ERROR": "\033[31m",  # Red
    "CRITICAL": "\033[41m",  # Red background
}
RESET_COLOR = "\033[0m"


class ColoredFormatter(logging.Formatter):
    """Logging formatter adding color, timestamp and ``file:line:Class:method`` metadata."""

    def format(self, record: logging.LogRecord) -> str:
        """Format a log record with color and its source location."""
        color = COLOR_MAP.get(record.levelname, "")
        reset = RESET_COLOR if color else ""
        timestamp = self.formatTime(record, datefmt="%Y-%m-%d %H:%M:%S")
        file_name = record.pathname.split("/")[-1]
        location = [file_name, str(record.lineno)]
        cls_name = self._owner_class(record.funcName)
        if cls_name:
            location.append(cls_name)
        location.append(record.funcName)
        return (
            f"{color}[{timestamp}] [{record.name}] {record.levelname} "
            f"[{':'.join(location)}]{reset} {record.getMessage()}"
        )

    @staticmethod
    def _owner_class(func_name: str) -> str | None:
        """Find the class of ``self`` in the first stack frame running ``func_name``."""
        try:
            frame = inspect.currentframe()
            while frame:
                if frame.f_code.co_name == func_name:
                    owner = frame.f_locals.get("self")
                    return type(owner).__name__ if owner is not None else None
                frame = frame.f_back
        except Exception:
            return None
        return None


def set_level(level: str) -> None:
    """
    Change the level of the package logger and its handlers.

    :param str level: Standard logging level name
    """
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


# stdout carries reports, logs go to stderr
logger = logging.getLogger(name="mutual_independence")
if not logger.hasHandlers():
    ch = logging.StreamHandler(sys.stderr)
    ch.setFormatter(ColoredFormatter())
    logger.addHandler(ch)
    set_level(get_settings().log_level)
