# pymgcma/__about__.py

"""
This module contains metadata about the pymgcma package.
"""

import datetime
from importlib.metadata import PackageNotFoundError, version

# Project name
__project_name__ = "pymgcma"

# Get the project version
__version__ = "unknown"
try:
    __version__ = version(__project_name__)
except PackageNotFoundError:
    pass

# Project metadata
__author__ = "pymgcma developers"
__license__ = "MIT"
__description__ = (
    "Multi-Granularity Cross-Modal Alignment "
    "for Speech-Text Emotion Recognition"
)

# Date
__date__ = datetime.date.today().isoformat()
