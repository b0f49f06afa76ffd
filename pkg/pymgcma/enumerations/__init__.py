# pymgcma/enumerations/__init__.py

"""
PyMGCMA Enumerations.
"""

from .data_enums import Modality
from .pipeline_enums import AblationVariant, EmbeddingTap, EmotionLabel, Stage

__all__ = [
    "Modality",
    "Stage",
    "EmotionLabel",
    "EmbeddingTap",
    "AblationVariant",
]
