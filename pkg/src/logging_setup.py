"""Logging configuration driven by the `logging` config section."""

import logging
from pathlib import Path
from typing import Optional

from rich.logging import RichHandler

from .config_loader import Config

_FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(config: Config, output_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        config: Configuration object
        output_dir: Directory for the log file; no file handler when None

    Returns:
        The package root logger
    """
    level = str(config.get("logging.level", "INFO")).upper()
    logger = logging.getLogger("src")
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.propagate = False

    console = RichHandler(show_path=False, rich_tracebacks=False)
    console.setLevel(level)
    logger.addHandler(console)

    log_name = config.get("logging.file")
    if output_dir is not None and log_name:
        output_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(output_dir / Path(log_name).name, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(_FILE_FORMAT))
        file_handler.setLevel(level)
        logger.addHandler(file_handler)

    return logger
