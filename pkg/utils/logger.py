"""Console logging shared by the CLI, the engine and pool workers."""

import logging
import sys

from config.settings import settings

LOG_FORMAT = "[%(levelname)s] %(asctime)s %(processName)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(name: str = "hdlogit") -> logging.Logger:
    """
    Return the ``name`` logger with a single stderr handler.

    Records go to stderr so that tables printed on stdout stay parseable.
    The process name tells pool workers apart from the main process.
    """
    log = logging.getLogger(name)
    level = logging.DEBUG if settings.DEBUG else logging.INFO
    log.setLevel(level)

    # spawned workers import this module again
    if log.handlers:
        return log

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
    log.addHandler(handler)
    log.propagate = False
    return log


logger = setup_logger()
