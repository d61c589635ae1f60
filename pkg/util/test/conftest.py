import logging

import pytest

from util.logger import logger


@pytest.fixture(autouse=True)
def restore_log_level():
    # cli sub-commands set the level from --log-level
    level = logger.level
    yield
    logger.setLevel(level if level != logging.NOTSET else logging.INFO)
