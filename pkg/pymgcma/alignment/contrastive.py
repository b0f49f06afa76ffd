"""
Symmetric in-batch contrastive loss shared by the distribution and
instance alignment modules.
"""

from dataclasses import dataclass

import numpy as np

from ..core.exceptions import ConfigError, DimensionError, EmptyInputError
from ..core.tensor import Tensor, log_softmax_rows
from ..logger import get_logger

logger = get_logger(__name__)


@dataclass
class ContrastiveTerms:
    """Averaged loss plus the per-pair speech-to-text / text-to-speech terms."""

    loss: Tensor
    s2t: np.ndarray
    t2s: np.ndarray


def symmetric_info_nce(similarity: Tensor, tau: float) -> ContrastiveTerms:
    """
    Loss over an N x N similarity matrix whose entry (i, n) compares
    speech i with text n; the diagonal holds the positive pairs.

    L = (1 / 2N) * sum_i (L_i^s2t + L_i^t2s), where L_i^s2t is the negative
    log-softmax of row i at column i and L_i^t2s the same on the transpose.
    """
    if tau <= 0:
        raise ConfigError(f"Temperature must be positive, got {tau}.")
    if similarity.ndim != 2 or similarity.shape[0] != similarity.shape[1]:
        error_string = f"Similarity must be square, got shape {similarity.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)
    count = similarity.shape[0]
    if count == 0:
        error_string = "Contrastive loss over an empty batch."
        logger.error(error_string)
        raise EmptyInputError(error_string)

    logits = similarity * (1.0 / tau)
    diagonal = (np.arange(count), np.arange(count))
    s2t = -log_softmax_rows(logits)[diagonal]
    t2s = -log_softmax_rows(logits.transpose())[diagonal]
    loss = (s2t.sum() + t2s.sum()) * (1.0 / (2.0 * count))
    return ContrastiveTerms(loss=loss, s2t=s2t.numpy(), t2s=t2s.numpy())
