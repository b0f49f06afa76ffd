# pymgcma/pipeline/__init__.py

"""
Model pipeline: configuration, forward pass, prediction and checkpoints.
"""

from .checkpoint import (
    CHECKPOINT_MAGIC,
    CHECKPOINT_NAME,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .config import PipelineConfig
from .model_pipeline import (
    LossBreakdown,
    PipelineParams,
    build_pipeline_params,
    cross_entropy,
    encode,
    forward,
    parse_tap,
    predict,
)

__all__ = [
    "PipelineConfig",
    "PipelineParams",
    "LossBreakdown",
    "build_pipeline_params",
    "forward",
    "cross_entropy",
    "predict",
    "encode",
    "parse_tap",
    "CHECKPOINT_MAGIC",
    "CHECKPOINT_NAME",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
]
