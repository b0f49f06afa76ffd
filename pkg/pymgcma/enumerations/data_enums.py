"""
Dataset Enums.
"""

from enum import Enum


class Modality(Enum):
    """Input modality of a feature sequence."""

    SPEECH = "speech"
    TEXT = "text"
