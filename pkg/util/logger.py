import logging
import sys

from util.constants import LOG_FILE

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

logger = logging.getLogger("trustnav")
logger.setLevel(logging.INFO)
formatter = logging.Formatter(LOG_FORMAT)

stdout_handler = logging.StreamHandler(sys.stdout)
stdout_handler.setFormatter(formatter)

file_handler = logging.FileHandler(LOG_FILE)
file_handler.setFormatter(formatter)

logger.addHandler(file_handler)
logger.addHandler(stdout_handler)


def setLogLevel(level_name: str):
    """Set the level on the logger, eg from a --log-level flag"""
    level_name = level_name.upper()
    if level_name not in LOG_LEVELS:
        raise ValueError(f"log level must be one of {LOG_LEVELS}, got {level_name!r}")
    logger.setLevel(getattr(logging, level_name))
