"""Logging utilities for spikedpca."""

import logging
from pathlib import Path
from typing import Optional, Union

PACKAGE_LOGGER = "spikedpca"

DETAILED_FORMAT = (
    "%(asctime)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(funcName)s() - %(message)s"
)
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for the given name.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


def setup_logging(
    level: Union[int, str] = logging.WARNING,
    log_path: Optional[Union[str, Path]] = None,
) -> logging.Logger:
    """Configure the package logger.

    A stream handler is always attached at ``level``. When ``log_path`` is
    given, a file handler records everything down to DEBUG with file and
    line information. Calling this again replaces the previous handlers.

    Args:
        level: Level name or number for the console handler.
        log_path: Optional path of a detailed log file.

    Returns:
        The configured ``spikedpca`` logger.
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(logging.DEBUG if log_path else level)
    logger.handlers.clear()

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(level)
    stream_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(stream_handler)

    if log_path:
        log_file = Path(log_path)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(fmt=DETAILED_FORMAT, datefmt=DATE_FORMAT)
        )
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger
