"""
Experiment runner module.

Leave-one-session-out cross-validation, the ablation and stage-order
table (systems S0-S9), embedding export for external visualization and
the gradient check of every loss component.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
import pandas as pd

from ..core.exceptions import UnknownVariantError
from ..core.grad_check import grad_check
from ..core.tensor import Tensor
from ..data.batch import LabeledPair, PairBatch
from ..data.feature_files import FeatureSequence
from ..data.folds import Fold, split_folds
from ..data.manifest import DatasetManifest
from ..enumerations import AblationVariant, EmbeddingTap, EmotionLabel, Modality
from ..logger import get_logger
from ..pipeline.checkpoint import load_checkpoint
from ..pipeline.config import PipelineConfig
from ..pipeline.model_pipeline import (
    PipelineParams,
    build_pipeline_params,
    encode,
    forward,
    parse_tap,
)
from .config import TrainConfig
from .metrics import MetricsReport, pool_reports
from .trainer import EpochRecord, evaluate, train

logger = get_logger(__name__)

ABLATION_COLUMNS = [
    "system",
    "configuration",
    "stage_order",
    "wa",
    "ua",
    "fold_mean_wa",
    "fold_mean_ua",
    "max_l_da",
    "max_l_ia",
]
METRICS_COLUMNS = ["scope", "wa", "ua", "n"]


def fold_seed(seed: int, session: int) -> int:
    """Independent per-fold seed derived from the master seed and fold index."""
    return int(np.random.SeedSequence([seed, session]).generate_state(1)[0])


class FoldOutcome(NamedTuple):
    session: int
    report: MetricsReport
    history: List[EpochRecord]


def _run_fold(manifest: DatasetManifest, cfg: TrainConfig, fold: Fold) -> FoldOutcome:
    fold_cfg = replace(cfg, seed=fold_seed(cfg.seed, fold.session))
    result = train(manifest, fold_cfg, records=fold.train)
    report = evaluate(result.params, manifest, records=fold.test, batch_size=cfg.batch_size)
    logger.info(
        f"Fold {fold.session}: {len(fold.train)} train / {len(fold.test)} test, "
        f"WA {report.wa:.4f} UA {report.ua:.4f}."
    )
    return FoldOutcome(fold.session, report, result.history)


def run_folds(manifest: DatasetManifest, cfg: TrainConfig, threads: int = 1) -> List[FoldOutcome]:
    """Train and test every fold; outcomes come back in fold order."""
    folds = split_folds(manifest)
    if threads <= 1:
        return [_run_fold(manifest, cfg, fold) for fold in folds]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda fold: _run_fold(manifest, cfg, fold), folds))


def cross_validate(manifest: DatasetManifest, cfg: TrainConfig, threads: int = 1) -> MetricsReport:
    """Pooled leave-one-session-out metrics; fold reports ride along in ``folds``."""
    outcomes = run_folds(manifest, cfg, threads)
    report = pool_reports([outcome.report for outcome in outcomes])
    logger.info(
        f"Cross-validation pooled WA {report.wa:.4f} UA {report.ua:.4f}; "
        f"fold mean WA {report.fold_mean_wa:.4f} UA {report.fold_mean_ua:.4f}."
    )
    return report


def metrics_frame(report: MetricsReport) -> pd.DataFrame:
    """One row for the report plus one per fold and the fold mean, if any."""
    scope = "pooled" if report.folds else "overall"
    rows = [{"scope": scope, "wa": report.wa, "ua": report.ua, "n": report.total}]
    for index, fold in enumerate(report.folds, start=1):
        rows.append({"scope": f"fold{index}", "wa": fold.wa, "ua": fold.ua, "n": fold.total})
    if report.folds:
        rows.append(
            {
                "scope": "fold_mean",
                "wa": report.fold_mean_wa,
                "ua": report.fold_mean_ua,
                "n": report.total,
            }
        )
    return pd.DataFrame(rows, columns=METRICS_COLUMNS)


def parse_variants(names: str | Sequence[str]) -> List[AblationVariant]:
    """Parse 'S0,S4' or ['S0', 'S4'] into variants."""
    if isinstance(names, str):
        names = [name for name in names.split(",") if name.strip()]
    variants = []
    for name in names:
        key = name.strip().upper()
        if key not in AblationVariant.__members__:
            error_string = f"Unknown ablation system '{name}'; choose from S0-S9."
            logger.error(error_string)
            raise UnknownVariantError(error_string)
        variants.append(AblationVariant[key])
    return variants


@dataclass
class AblationTable:
    """Rows of system id, configuration, stage order and metrics."""

    rows: List[dict] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=ABLATION_COLUMNS)

    def to_csv(self, path_or_buf=None, float_format: str | None = None):
        return self.to_frame().to_csv(path_or_buf, index=False, float_format=float_format)


def run_ablations(
    manifest: DatasetManifest,
    cfg: TrainConfig,
    variants: Sequence[AblationVariant] | str,
    threads: int = 1,
) -> AblationTable:
    """Cross-validate every variant with the same seed and data."""
    if isinstance(variants, str) or any(not isinstance(v, AblationVariant) for v in variants):
        variants = parse_variants(variants)

    table = AblationTable()
    for variant in variants:
        variant_cfg = replace(cfg, pipeline=cfg.pipeline.with_stages(variant.stages))
        logger.info(f"Running system {variant.name}: {variant.description}.")
        outcomes = run_folds(manifest, variant_cfg, threads)
        report = pool_reports([outcome.report for outcome in outcomes])
        records = [record for outcome in outcomes for record in outcome.history]
        table.rows.append(
            {
                "system": variant.name,
                "configuration": variant.description,
                "stage_order": ">".join(stage.value for stage in variant.stages),
                "wa": report.wa,
                "ua": report.ua,
                "fold_mean_wa": report.fold_mean_wa,
                "fold_mean_ua": report.fold_mean_ua,
                "max_l_da": max(record.l_da for record in records),
                "max_l_ia": max(record.l_ia for record in records),
            }
        )
    return table


def export_embeddings(
    checkpoint: str | Path | PipelineParams,
    manifest: DatasetManifest,
    tap: EmbeddingTap | str,
    out: str | Path | None = None,
    chunk_size: int = 64,
) -> pd.DataFrame:
    """
    Per-utterance vectors at a tap point, one row per utterance and modality.

    Columns: utterance_id, modality, label, v0 .. v{D-1}. Written as CSV
    when ``out`` is given.
    """
    tap = parse_tap(tap)
    params = checkpoint if isinstance(checkpoint, PipelineParams) else load_checkpoint(checkpoint)
    rows = []
    for start in range(0, len(manifest), chunk_size):
        records = manifest.records[start : start + chunk_size]
        vectors = encode(manifest.load_batch(records), params, tap)
        for position, record in enumerate(records):
            for modality in Modality:
                row = [record.utterance_id, modality.value, EmotionLabel(record.label).label_name]
                rows.append(row + vectors[modality][position].tolist())

    width = len(rows[0]) - 3
    frame = pd.DataFrame(
        rows, columns=["utterance_id", "modality", "label"] + [f"v{i}" for i in range(width)]
    )
    if out is not None:
        frame.to_csv(out, index=False)
        logger.info(f"Exported {len(frame)} embedding rows ({tap.value}) to {out}.")
    return frame


GRADIENT_COMPONENTS = ("l_da", "l_ia", "l_ce", "total")


def _random_batch(rng: np.random.Generator, dim: int) -> PairBatch:
    # Pairs 0 and 2 share a bucket
    lengths = [(4, 3), (3, 5), (4, 3)]
    pairs = []
    for index, (len_speech, len_text) in enumerate(lengths):
        utterance_id = f"check{index}"
        speech = FeatureSequence(
            utterance_id, Modality.SPEECH, Tensor(0.5 * rng.standard_normal((len_speech, dim)))
        )
        text = FeatureSequence(
            utterance_id, Modality.TEXT, Tensor(0.5 * rng.standard_normal((len_text, dim)))
        )
        pairs.append(LabeledPair(speech, text, EmotionLabel(index % len(EmotionLabel))))
    return PairBatch(pairs)


def gradient_check_report(
    seed: int = 0,
    h: float = 1e-4,
    max_checks_per_param: int | None = 8,
    pipeline: PipelineConfig | None = None,
) -> Dict[str, float]:
    """
    Max relative gradient error of every loss component on a seeded random model.

    Defaults to D=16, k=2, one block and a batch of three pairs.
    """
    cfg = pipeline if pipeline is not None else PipelineConfig(model_dim=16, num_heads=2, n_blocks=1)
    params = build_pipeline_params(cfg, seed)
    batch = _random_batch(np.random.default_rng(seed), cfg.feature_dim)

    errors = {}
    for component in GRADIENT_COMPONENTS:
        errors[component] = grad_check(
            lambda: getattr(forward(batch, params)[1], component),
            params.store,
            h=h,
            max_checks_per_param=max_checks_per_param,
            seed=seed,
        )
        logger.info(f"Gradient check {component}: max relative error {errors[component]:.3e}.")
    return errors
