# pymgcma/__init__.py

"""
PyMGCMA - Python Package for Multi-Granularity Cross-Modal Alignment
in Speech-Text Emotion Recognition.
"""

from .logger import get_logger

logger = get_logger(__name__)


from .pipeline import PipelineConfig, build_pipeline_params, forward, predict
from .training import RunConfig, TrainConfig, Trainer, cross_validate, evaluate, train


__all__ = [
    "PipelineConfig",
    "build_pipeline_params",
    "forward",
    "predict",
    "TrainConfig",
    "RunConfig",
    "Trainer",
    "train",
    "evaluate",
    "cross_validate",
]
