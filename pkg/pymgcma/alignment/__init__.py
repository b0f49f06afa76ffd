# pymgcma/alignment/__init__.py

"""
PyMGCMA alignment modules: attention, distribution-, token- and
instance-based alignment.
"""

from .attention import AttentionConfig, AttentionParams, multi_head, scaled_dot_attention
from .contrastive import ContrastiveTerms, symmetric_info_nce
from .distribution_alignment import (
    ContrastiveConfig,
    DistributionConstructorParams,
    GaussianEmbedding,
    construct_distribution,
    distribution_contrastive_loss,
    pairwise_wasserstein2_sq,
    similarity,
    similarity_matrix,
    stack_gaussians,
    wasserstein2_sq,
)
from .instance_alignment import (
    InstanceVector,
    instance_contrastive_loss,
    pool_instance,
    stack_instances,
)
from .token_alignment import AlignedPair, TokenAlignmentParams, token_align

__all__ = [
    "AttentionConfig",
    "AttentionParams",
    "scaled_dot_attention",
    "multi_head",
    "ContrastiveTerms",
    "symmetric_info_nce",
    "ContrastiveConfig",
    "DistributionConstructorParams",
    "GaussianEmbedding",
    "construct_distribution",
    "wasserstein2_sq",
    "pairwise_wasserstein2_sq",
    "similarity",
    "similarity_matrix",
    "stack_gaussians",
    "distribution_contrastive_loss",
    "AlignedPair",
    "TokenAlignmentParams",
    "token_align",
    "InstanceVector",
    "pool_instance",
    "stack_instances",
    "instance_contrastive_loss",
]
