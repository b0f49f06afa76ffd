"""
Attention module.

Scaled dot-product attention and multi-head assembly with separate
per-head projections. Self-attention passes the same tensor as query and
key/value input; cross-attention passes the other modality as key/value.
"""

import math
from dataclasses import dataclass
from typing import List

from ..core.exceptions import ConfigError, DimensionError, EmptyInputError
from ..core.parameter_store import ParameterStore
from ..core.tensor import Tensor, concat, matmul, softmax_rows
from ..logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class AttentionConfig:
    """Model width D and head count k; each head is D / k wide."""

    model_dim: int
    num_heads: int

    def __post_init__(self):
        if self.model_dim <= 0 or self.num_heads <= 0:
            raise ConfigError(
                f"model_dim and num_heads must be positive, "
                f"got {self.model_dim} and {self.num_heads}."
            )
        if self.model_dim % self.num_heads != 0:
            raise ConfigError(
                f"model_dim {self.model_dim} is not divisible by num_heads {self.num_heads}."
            )

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.num_heads


@dataclass
class AttentionParams:
    """Per-head W_q, W_k, W_v (D x d each) and the output W_o (D x D)."""

    config: AttentionConfig
    query: List[Tensor]
    key: List[Tensor]
    value: List[Tensor]
    output: Tensor

    @classmethod
    def build(cls, store: ParameterStore, prefix: str, config: AttentionConfig):
        """Register k projection triples then W_o, in that order."""
        query, key, value = [], [], []
        shape = (config.model_dim, config.head_dim)
        for head in range(config.num_heads):
            query.append(store.register(f"{prefix}.head{head}.w_q", shape))
            key.append(store.register(f"{prefix}.head{head}.w_k", shape))
            value.append(store.register(f"{prefix}.head{head}.w_v", shape))
        output = store.register(f"{prefix}.w_o", (config.model_dim, config.model_dim))
        return cls(config, query, key, value, output)


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """softmax(Q K^T / sqrt(d)) V over the last two axes."""
    if k.shape[-2] == 0:
        error_string = "Attention over an empty key sequence."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    if q.shape[-1] != k.shape[-1]:
        error_string = f"Query and key widths differ: {q.shape} vs {k.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)
    if k.shape[-2] != v.shape[-2]:
        error_string = f"Key and value lengths differ: {k.shape} vs {v.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)

    scale = 1.0 / math.sqrt(q.shape[-1])
    weights = softmax_rows(matmul(q, k.transpose()) * scale)
    return matmul(weights, v)


def multi_head(x_q: Tensor, x_kv: Tensor, params: AttentionParams) -> Tensor:
    """[head_1, ..., head_k] W_o with head_i = Attention(x_q W_i^q, x_kv W_i^k, x_kv W_i^v)."""
    model_dim = params.config.model_dim
    if x_q.shape[-1] != model_dim or x_kv.shape[-1] != model_dim:
        error_string = (
            f"Attention inputs {x_q.shape} / {x_kv.shape} do not match model_dim {model_dim}."
        )
        logger.error(error_string)
        raise DimensionError(error_string)

    heads = [
        scaled_dot_attention(matmul(x_q, w_q), matmul(x_kv, w_k), matmul(x_kv, w_v))
        for w_q, w_k, w_v in zip(params.query, params.key, params.value)
    ]
    merged = heads[0] if len(heads) == 1 else concat(heads, axis=-1)
    return matmul(merged, params.output)
