"""
PyMGCMA logger module.
"""

import datetime
import logging
import os
import platform
import sys

import numpy as np

from . import __about__

# Ensure log directory exists
LOG_DIR = os.getenv("MGCMA_LOG_DIR", "logs")
os.makedirs(LOG_DIR, exist_ok=True)

# Date for the log file name
dt = datetime.datetime.now()
dt = dt.strftime("%Y%m%d")

# Configure the logger
LOG_FILE = os.path.join(LOG_DIR, f"output_{dt}.log")
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

# Logging Level
LOGGING_LEVEL = getattr(logging, os.getenv("MGCMA_LOG_LEVEL", "INFO").upper(), logging.INFO)

# Initialize root logger
root_logger = logging.getLogger()
if not root_logger.hasHandlers():
    logging.basicConfig(
        level=LOGGING_LEVEL,
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(LOG_FILE, mode="a"),
        ],
    )

# Log the project version
logging.info(f"Project Version: {__about__.__version__}")


def _log_run_info():
    """Log environment information."""
    info = [
        f"Python Version: {sys.version}",
        f"Python Implementation: {platform.python_implementation()}",
        f"Architecture: {platform.architecture()[0]}",
        f"Operating System: {platform.system()} {platform.release()}",
        f"Machine: {platform.machine()}",
        f"NumPy Version: {np.__version__}",
    ]
    for line in info:
        logging.info(line)


# Log the environment information
_log_run_info()


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the specified name."""
    return logging.getLogger(name)


def attach_stderr_handler(level: int = logging.INFO) -> logging.Handler:
    """Mirror log records to stderr, keeping stdout free for reports."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler
