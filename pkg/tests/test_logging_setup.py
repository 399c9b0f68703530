import logging

import pytest

from src.config_loader import Config
from src.logging_setup import setup_logging


@pytest.fixture
def package_logger():
    logger = logging.getLogger("src")
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def file_handlers(logger):
    return [h for h in logger.handlers if isinstance(h, logging.FileHandler)]


def test_log_file_in_output_dir(package_logger, tmp_path):
    config = Config.from_dict({"logging": {"file": "run.log", "level": "DEBUG"}})

    logger = setup_logging(config, tmp_path)
    logging.getLogger("src.dynamics").debug("tick 3")
    for handler in logger.handlers:
        handler.flush()

    assert logger is package_logger
    assert "tick 3" in (tmp_path / "run.log").read_text(encoding="utf-8")


def test_reconfiguring_closes_the_previous_file(package_logger, tmp_path):
    config = Config.from_dict({"logging": {"file": "run.log"}})

    setup_logging(config, tmp_path / "first")
    [first] = file_handlers(package_logger)
    setup_logging(config, tmp_path / "second")

    assert first.stream is None
    assert first not in package_logger.handlers
    assert len(file_handlers(package_logger)) == 1


def test_no_output_dir_means_console_only(package_logger):
    setup_logging(Config.from_dict({"logging": {"file": "run.log"}}))

    assert file_handlers(package_logger) == []
