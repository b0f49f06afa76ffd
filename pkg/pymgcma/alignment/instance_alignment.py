"""
Instance-based alignment module.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core.exceptions import ContractError, DimensionError, EmptyInputError
from ..core.tensor import Tensor, l2_normalize, mean_pool, stack
from ..logger import get_logger
from .contrastive import ContrastiveTerms, symmetric_info_nce

logger = get_logger(__name__)

NORM_TOLERANCE = 1e-12


@dataclass
class InstanceVector:
    """Pooled utterance vector (D) or a batch of them (N x D)."""

    v: Tensor
    normalized: bool = False

    def __post_init__(self):
        if not self.normalized:
            return
        norms = np.linalg.norm(self.v.data, axis=-1)
        if (np.abs(norms - 1.0) > NORM_TOLERANCE).any():
            error_string = (
                f"Instance vectors flagged normalized have norms {np.atleast_1d(norms).tolist()}."
            )
            logger.error(error_string)
            raise ContractError(error_string)


def pool_instance(x: Tensor, normalize: bool = True) -> InstanceVector:
    """Mean-pool a sequence and scale the result to unit length."""
    pooled = mean_pool(x)
    if not normalize:
        return InstanceVector(pooled, normalized=False)
    return InstanceVector(l2_normalize(pooled), normalized=True)


def stack_instances(vectors: Sequence[InstanceVector]) -> InstanceVector:
    """Batch per-utterance vectors; the batch is normalized only if all are."""
    if not vectors:
        error_string = "Cannot stack an empty list of instance vectors."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    return InstanceVector(
        stack([vector.v for vector in vectors]),
        normalized=all(vector.normalized for vector in vectors),
    )


def _as_batch(vectors) -> InstanceVector:
    if isinstance(vectors, InstanceVector):
        return stack_instances([vectors]) if vectors.v.ndim == 1 else vectors
    return stack_instances(list(vectors))


def instance_contrastive_loss(
    speech: Sequence[InstanceVector] | InstanceVector,
    text: Sequence[InstanceVector] | InstanceVector,
    tau: float,
    require_normalized: bool = True,
) -> ContrastiveTerms:
    """
    Instance-level alignment loss L_IA with dot-product similarity.

    Inputs must be normalized unless ``require_normalized`` is off (the
    un-normalized variant of the loss).
    """
    speech_batch = _as_batch(speech)
    text_batch = _as_batch(text)
    if require_normalized and not (speech_batch.normalized and text_batch.normalized):
        error_string = "Instance contrastive loss needs normalized instance vectors."
        logger.error(error_string)
        raise ContractError(error_string)
    if speech_batch.v.shape != text_batch.v.shape:
        error_string = (
            f"Speech and text batches differ: {speech_batch.v.shape} vs {text_batch.v.shape}."
        )
        logger.error(error_string)
        raise DimensionError(error_string)

    similarity = speech_batch.v @ text_batch.v.transpose()
    return symmetric_info_nce(similarity, tau)
