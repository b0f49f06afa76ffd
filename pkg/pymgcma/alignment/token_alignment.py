"""
Token-based alignment module.

A stack of blocks, each running self-attention and then cross-attention
for both modalities. Speech queries attend to text keys/values (text-aware
speech) and text queries attend to speech (speech-aware text).
"""

from dataclasses import dataclass
from typing import List, NamedTuple

from ..core.exceptions import ConfigError, DimensionError, EmptyInputError
from ..core.parameter_store import ParameterStore
from ..core.tensor import Tensor, layer_norm
from ..logger import get_logger
from .attention import AttentionConfig, AttentionParams, multi_head

logger = get_logger(__name__)


class AlignedPair(NamedTuple):
    """Text-aware speech and speech-aware text sequences."""

    speech: Tensor
    text: Tensor


@dataclass
class BranchParams:
    """Self- and cross-attention of one modality branch in one block."""

    self_attention: AttentionParams
    cross_attention: AttentionParams


@dataclass
class BlockParams:
    speech: BranchParams
    text: BranchParams


@dataclass
class TokenAlignmentParams:
    """Per-block, per-branch attention parameters."""

    blocks: List[BlockParams]
    layer_norm: bool = False

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @classmethod
    def build(
        cls,
        store: ParameterStore,
        prefix: str,
        config: AttentionConfig,
        n_blocks: int,
        share_branch_weights: bool = False,
        use_layer_norm: bool = False,
    ):
        """
        Register n_blocks x 2 branches x 2 attention instances.

        With ``share_branch_weights`` the text branch reuses the speech
        branch instances, so only half of them are registered.
        """
        if n_blocks < 1:
            raise ConfigError(f"n_blocks must be at least 1, got {n_blocks}.")
        blocks = []
        for index in range(n_blocks):
            block_prefix = f"{prefix}.block{index}"
            speech = BranchParams(
                AttentionParams.build(store, f"{block_prefix}.speech.self", config),
                AttentionParams.build(store, f"{block_prefix}.speech.cross", config),
            )
            if share_branch_weights:
                text = speech
            else:
                text = BranchParams(
                    AttentionParams.build(store, f"{block_prefix}.text.self", config),
                    AttentionParams.build(store, f"{block_prefix}.text.cross", config),
                )
            blocks.append(BlockParams(speech, text))
        return cls(blocks, use_layer_norm)


def _residual(x: Tensor, update: Tensor, normalize: bool) -> Tensor:
    out = x + update
    return layer_norm(out) if normalize else out


def token_align(x_s: Tensor, x_t: Tensor, params: TokenAlignmentParams) -> AlignedPair:
    """
    Run the block stack over speech (L_s x D) and text (L_t x D) sequences.

    Block i reads the previous block's cross-attention outputs; its
    cross-attention reads this block's self-attention outputs. Sequence
    lengths are preserved.
    """
    if x_s.ndim < 2 or x_t.ndim < 2 or x_s.shape[-2] == 0 or x_t.shape[-2] == 0:
        error_string = f"Token alignment needs non-empty sequences, got {x_s.shape} and {x_t.shape}."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    if x_s.shape[-1] != x_t.shape[-1]:
        error_string = f"Speech and text widths differ: {x_s.shape[-1]} vs {x_t.shape[-1]}."
        logger.error(error_string)
        raise DimensionError(error_string)

    speech, text = x_s, x_t
    for block in params.blocks:
        speech_self = _residual(
            speech, multi_head(speech, speech, block.speech.self_attention), params.layer_norm
        )
        text_self = _residual(
            text, multi_head(text, text, block.text.self_attention), params.layer_norm
        )
        speech = _residual(
            speech_self,
            multi_head(speech_self, text_self, block.speech.cross_attention),
            params.layer_norm,
        )
        text = _residual(
            text_self,
            multi_head(text_self, speech_self, block.text.cross_attention),
            params.layer_norm,
        )
    return AlignedPair(speech=speech, text=text)
