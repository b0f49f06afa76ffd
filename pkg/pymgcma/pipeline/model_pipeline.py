"""
Model pipeline module.

Composes the input projections, the alignment stages in a configurable
order and the classifier head. The distribution and instance stages
attach a loss to the running (speech, text) representations and pass
them through unchanged; the token stage transforms them.

A batch whose utterances differ in length is processed in buckets of
equal (L_s, L_t). Per-utterance results are restored to batch order
before any loss sees them.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..alignment.distribution_alignment import (
    DistributionConstructorParams,
    GaussianEmbedding,
    construct_distribution,
    distribution_contrastive_loss,
)
from ..alignment.instance_alignment import InstanceVector, instance_contrastive_loss
from ..alignment.token_alignment import TokenAlignmentParams, token_align
from ..core.exceptions import ConfigError, ContractError, DimensionError, EmptyInputError
from ..core.parameter_store import LinearParams, ParameterStore, register_linear
from ..core.tensor import (
    Tensor,
    concat,
    l2_normalize,
    linear,
    log_softmax_rows,
    mean_pool,
    no_grad,
    stack,
)
from ..data.batch import PairBatch
from ..enumerations import EmbeddingTap, Modality, Stage
from ..logger import get_logger
from .config import PipelineConfig

logger = get_logger(__name__)


@dataclass
class PipelineParams:
    """
    All trainable parts of the model, backed by one ParameterStore.

    Every stage is registered whatever the enabled set, in the order
    projections, distribution constructors (speech, text), token
    alignment, classifier. Variants built from one seed therefore share
    the initial weights of every component.
    """

    config: PipelineConfig
    store: ParameterStore
    speech_projection: LinearParams | None
    text_projection: LinearParams | None
    speech_distribution: DistributionConstructorParams
    text_distribution: DistributionConstructorParams
    token_alignment: TokenAlignmentParams
    classifier: LinearParams

    def copy(self) -> "PipelineParams":
        """Independent parameters with equal values."""
        clone = build_pipeline_params(self.config, self.store.rng_seed)
        clone.store.load_arrays(self.store.snapshot())
        return clone


def build_pipeline_params(cfg: PipelineConfig, seed: int) -> PipelineParams:
    """Register and initialize every parameter of the pipeline from ``seed``."""
    store = ParameterStore(seed)
    attention = cfg.attention

    speech_projection = text_projection = None
    if cfg.needs_projection:
        speech_projection = register_linear(store, "proj.speech", cfg.feature_dim, cfg.model_dim)
        text_projection = register_linear(store, "proj.text", cfg.feature_dim, cfg.model_dim)

    speech_distribution = DistributionConstructorParams.build(
        store, "dam.speech", attention, cfg.branch_layers
    )
    text_distribution = DistributionConstructorParams.build(
        store, "dam.text", attention, cfg.branch_layers
    )
    token_alignment = TokenAlignmentParams.build(
        store,
        "tam",
        attention,
        cfg.n_blocks,
        share_branch_weights=cfg.share_branch_weights,
        use_layer_norm=cfg.layer_norm,
    )
    classifier = register_linear(store, "classifier", 2 * cfg.model_dim, cfg.num_classes)

    logger.info(
        f"Built pipeline with {len(store)} parameters ({store.num_elements} values), "
        f"stages {[s.value for s in cfg.stage_order]}, seed {seed}."
    )
    return PipelineParams(
        config=cfg,
        store=store,
        speech_projection=speech_projection,
        text_projection=text_projection,
        speech_distribution=speech_distribution,
        text_distribution=text_distribution,
        token_alignment=token_alignment,
        classifier=classifier,
    )


@dataclass
class LossBreakdown:
    """
    Loss terms of one forward pass.

    ``total`` is l_da + l_ia + l_ce; a disabled stage contributes an exact
    zero. Per-direction terms are kept as arrays, None for disabled stages.
    """

    l_da: Tensor
    l_ia: Tensor
    l_ce: Tensor
    total: Tensor
    da_s2t: np.ndarray | None = None
    da_t2s: np.ndarray | None = None
    ia_s2t: np.ndarray | None = None
    ia_t2s: np.ndarray | None = None

    def values(self) -> Dict[str, float]:
        return {
            "l_da": self.l_da.item(),
            "l_ia": self.l_ia.item(),
            "l_ce": self.l_ce.item(),
            "total": self.total.item(),
        }


@dataclass
class _StageResult:
    encoder_speech: Tensor
    encoder_text: Tensor
    pooled_speech: Tensor
    pooled_text: Tensor
    l_da: Tensor | None = None
    l_ia: Tensor | None = None
    da_terms: tuple | None = None
    ia_terms: tuple | None = None


def _check_compatible(params: PipelineParams, cfg: PipelineConfig) -> None:
    built = params.config
    shape_keys = (
        "model_dim",
        "num_heads",
        "n_blocks",
        "num_classes",
        "branch_layers",
        "share_branch_weights",
        "feature_dim",
    )
    mismatched = [key for key in shape_keys if getattr(built, key) != getattr(cfg, key)]
    if mismatched:
        error_string = f"Config disagrees with the built parameters on {mismatched}."
        logger.error(error_string)
        raise ContractError(error_string)


def _bucket_indices(batch: PairBatch) -> List[np.ndarray]:
    """Batch positions grouped by (L_s, L_t), buckets in order of first appearance."""
    groups: Dict[Tuple[int, int], List[int]] = {}
    for index, pair in enumerate(batch):
        groups.setdefault((pair.speech.length, pair.text.length), []).append(index)
    return [np.array(indices, dtype=np.int64) for indices in groups.values()]


def _gather(parts: List[Tensor], inverse: np.ndarray | None) -> Tensor:
    """Merge per-bucket N_b x D results and restore batch order."""
    merged = parts[0] if len(parts) == 1 else concat(parts, axis=0)
    return merged if inverse is None else merged[inverse]


def _project(x: Tensor, projection: LinearParams | None) -> Tensor:
    return x if projection is None else linear(x, projection.weight, projection.bias)


def _apply_stages(
    batch: PairBatch, params: PipelineParams, cfg: PipelineConfig, with_losses: bool = True
) -> _StageResult:
    if len(batch) == 0:
        error_string = "Forward pass over an empty batch."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    for pair in batch:
        if pair.speech.dim != cfg.feature_dim or pair.text.dim != cfg.feature_dim:
            error_string = (
                f"Features of {pair.utterance_id} have widths {pair.speech.dim}/{pair.text.dim}, "
                f"model expects {cfg.feature_dim}."
            )
            logger.error(error_string)
            raise DimensionError(error_string)

    buckets = _bucket_indices(batch)
    order = np.concatenate(buckets)
    inverse = None if np.array_equal(order, np.arange(len(batch))) else np.argsort(order)

    speech = [stack([batch.pairs[i].speech.tokens for i in indices]) for indices in buckets]
    text = [stack([batch.pairs[i].text.tokens for i in indices]) for indices in buckets]
    encoder_speech = _gather([mean_pool(x) for x in speech], inverse)
    encoder_text = _gather([mean_pool(x) for x in text], inverse)

    speech = [_project(x, params.speech_projection) for x in speech]
    text = [_project(x, params.text_projection) for x in text]

    result = _StageResult(encoder_speech, encoder_text, encoder_speech, encoder_text)
    for stage in cfg.stage_order:
        if stage is Stage.TAM:
            aligned = [token_align(s, t, params.token_alignment) for s, t in zip(speech, text)]
            speech = [pair.speech for pair in aligned]
            text = [pair.text for pair in aligned]
        elif not with_losses:
            continue
        elif stage is Stage.DAM:
            speech_parts = [construct_distribution(x, params.speech_distribution) for x in speech]
            text_parts = [construct_distribution(x, params.text_distribution) for x in text]
            speech_gaussians = GaussianEmbedding(
                _gather([g.mu for g in speech_parts], inverse),
                _gather([g.sigma for g in speech_parts], inverse),
            )
            text_gaussians = GaussianEmbedding(
                _gather([g.mu for g in text_parts], inverse),
                _gather([g.sigma for g in text_parts], inverse),
            )
            terms = distribution_contrastive_loss(speech_gaussians, text_gaussians, cfg.contrastive)
            result.l_da, result.da_terms = terms.loss, (terms.s2t, terms.t2s)
        elif stage is Stage.IAM:
            speech_vectors = _gather([mean_pool(x) for x in speech], inverse)
            text_vectors = _gather([mean_pool(x) for x in text], inverse)
            if cfg.normalize_instances:
                speech_instances = InstanceVector(l2_normalize(speech_vectors), normalized=True)
                text_instances = InstanceVector(l2_normalize(text_vectors), normalized=True)
            else:
                speech_instances = InstanceVector(speech_vectors)
                text_instances = InstanceVector(text_vectors)
            terms = instance_contrastive_loss(
                speech_instances, text_instances, cfg.tau, cfg.normalize_instances
            )
            result.l_ia, result.ia_terms = terms.loss, (terms.s2t, terms.t2s)

    result.pooled_speech = _gather([mean_pool(x) for x in speech], inverse)
    result.pooled_text = _gather([mean_pool(x) for x in text], inverse)
    return result


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of integer labels under row-softmax logits."""
    labels = np.asarray(labels, dtype=np.int64)
    count, num_classes = logits.shape
    if labels.shape != (count,):
        error_string = f"Expected {count} labels, got shape {labels.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        error_string = f"Labels outside 0-{num_classes - 1}: {labels.tolist()}."
        logger.error(error_string)
        raise ContractError(error_string)
    picked = log_softmax_rows(logits)[(np.arange(count), labels)]
    return -picked.mean()


def forward(
    batch: PairBatch, params: PipelineParams, cfg: PipelineConfig | None = None
) -> Tuple[Tensor, LossBreakdown]:
    """
    Run the stages in ``cfg.stage_order`` and the classifier head.

    :param cfg: Stage arrangement and contrastive settings; defaults to the
        config the parameters were built with. Shape keys must agree.
    :return: N x C logits and the loss breakdown.
    """
    cfg = params.config if cfg is None else cfg
    _check_compatible(params, cfg)

    stages = _apply_stages(batch, params, cfg)
    features = concat([stages.pooled_speech, stages.pooled_text], axis=-1)
    logits = linear(features, params.classifier.weight, params.classifier.bias)

    l_ce = cross_entropy(logits, batch.labels)
    l_da = stages.l_da if stages.l_da is not None else Tensor(0.0)
    l_ia = stages.l_ia if stages.l_ia is not None else Tensor(0.0)
    total = l_da + l_ia + l_ce

    da_s2t, da_t2s = stages.da_terms or (None, None)
    ia_s2t, ia_t2s = stages.ia_terms or (None, None)
    return logits, LossBreakdown(
        l_da=l_da,
        l_ia=l_ia,
        l_ce=l_ce,
        total=total,
        da_s2t=da_s2t,
        da_t2s=da_t2s,
        ia_s2t=ia_s2t,
        ia_t2s=ia_t2s,
    )


def predict(logits) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class code."""
    values = logits.data if isinstance(logits, Tensor) else np.asarray(logits, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionError(f"Logits must be N x C, got shape {values.shape}.")
    if not np.isfinite(values).all():
        raise ContractError("Logits must be finite.")
    return np.argmax(values, axis=1)


def parse_tap(tap: EmbeddingTap | str) -> EmbeddingTap:
    try:
        return EmbeddingTap(tap)
    except ValueError:
        error_string = f"Unknown embedding tap '{tap}'; choose from {[t.value for t in EmbeddingTap]}."
        logger.error(error_string)
        raise ConfigError(error_string)


def encode(
    batch: PairBatch, params: PipelineParams, tap: EmbeddingTap | str
) -> Dict[Modality, np.ndarray]:
    """
    Per-utterance vectors of both modalities at a tap point, in batch order.

    ENCODER is the mean-pooled raw features, POST_ALIGNMENT the classifier
    input halves, POOLED the latter scaled to unit length.
    """
    tap = parse_tap(tap)
    with no_grad():
        stages = _apply_stages(batch, params, params.config, with_losses=False)
        if tap is EmbeddingTap.ENCODER:
            speech, text = stages.encoder_speech, stages.encoder_text
        elif tap is EmbeddingTap.POST_ALIGNMENT:
            speech, text = stages.pooled_speech, stages.pooled_text
        else:
            speech, text = l2_normalize(stages.pooled_speech), l2_normalize(stages.pooled_text)
    return {Modality.SPEECH: speech.numpy(), Modality.TEXT: text.numpy()}
