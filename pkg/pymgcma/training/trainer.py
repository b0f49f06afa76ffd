"""
Trainer module.

Mini-batch Adam over seeded epoch permutations, minimizing
l_da + l_ia + l_ce, with per-epoch logging and checkpointing.
"""

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import List, NamedTuple, Sequence

import numpy as np

from ..core.exceptions import DatasetError, EmptyInputError
from ..core.tensor import backward, no_grad
from ..data.batch import PairBatch
from ..data.manifest import DatasetManifest, ManifestRecord
from ..logger import get_logger
from ..pipeline.checkpoint import CHECKPOINT_NAME, load_checkpoint, save_checkpoint
from ..pipeline.config import PipelineConfig
from ..pipeline.model_pipeline import PipelineParams, build_pipeline_params, forward, predict
from .config import TrainConfig
from .metrics import MetricsReport, compute_metrics
from .optimizer import AdamState, adam_step

logger = get_logger(__name__)

TRAIN_LOG_NAME = "train_log.jsonl"


@dataclass
class EpochRecord:
    """One line of the training log."""

    epoch: int
    l_da: float
    l_ia: float
    l_ce: float
    total: float
    train_wa: float
    train_ua: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def write_train_log(history: Sequence[EpochRecord], path: str | Path) -> Path:
    """Write one JSON object per epoch."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(record.to_json() + "\n" for record in history), encoding="utf-8")
    return path


def resolve_pipeline(pipeline: PipelineConfig, dim: int) -> PipelineConfig:
    """Fill an unset input_dim from the dataset; an explicit one must match it."""
    if pipeline.input_dim is None:
        return replace(pipeline, input_dim=dim)
    if pipeline.input_dim != dim:
        error_string = f"Config input_dim {pipeline.input_dim} does not match dataset dim {dim}."
        logger.error(error_string)
        raise DatasetError(error_string)
    return pipeline


class Trainer:
    """Optimizes one PipelineParams under a TrainConfig."""

    def __init__(self, config: TrainConfig, params: PipelineParams | None = None):
        self.logger = get_logger(self.__class__.__name__)
        self.config = config
        self.params = (
            params if params is not None else build_pipeline_params(config.pipeline, config.seed)
        )
        self.state = AdamState()
        self.history: List[EpochRecord] = []

    # region Private methods
    def _minibatches(self, data: PairBatch, epoch: int) -> List[PairBatch]:
        """Seeded permutation of the data, cut into batch_size chunks."""
        order = np.random.default_rng([self.config.seed, epoch]).permutation(len(data))
        size = self.config.batch_size
        return [data.subset(order[start : start + size]) for start in range(0, len(data), size)]

    def _step(self, batch: PairBatch) -> dict:
        store = self.params.store
        store.zero_grad()
        _, losses = forward(batch, self.params)
        backward(losses.total)
        adam_step(
            store,
            store.gradients(),
            self.state,
            self.config.learning_rate,
            self.config.beta1,
            self.config.beta2,
            self.config.eps,
        )
        return losses.values()

    # endregion

    def predict_batch(self, data: PairBatch) -> np.ndarray:
        """Class codes for every pair, evaluated in order without the graph."""
        if len(data) == 0:
            error_string = "Prediction over an empty set."
            self.logger.error(error_string)
            raise EmptyInputError(error_string)
        size = self.config.batch_size
        predictions = []
        with no_grad():
            for start in range(0, len(data), size):
                chunk = data.subset(range(start, min(start + size, len(data))))
                logits, _ = forward(chunk, self.params)
                predictions.append(predict(logits))
        return np.concatenate(predictions)

    def evaluate(self, data: PairBatch) -> MetricsReport:
        return compute_metrics(
            data.labels, self.predict_batch(data), self.params.config.num_classes
        )

    def train_epoch(self, data: PairBatch, epoch: int) -> EpochRecord:
        """One pass over the data; losses are size-weighted batch means."""
        sums = {"l_da": 0.0, "l_ia": 0.0, "l_ce": 0.0, "total": 0.0}
        for batch in self._minibatches(data, epoch):
            values = self._step(batch)
            for key in sums:
                sums[key] += values[key] * len(batch)

        report = self.evaluate(data)
        record = EpochRecord(
            epoch=epoch,
            **{key: value / len(data) for key, value in sums.items()},
            train_wa=report.wa,
            train_ua=report.ua,
        )
        self.history.append(record)
        self.logger.info(
            f"Epoch {epoch}: total {record.total:.6f} (da {record.l_da:.6f}, "
            f"ia {record.l_ia:.6f}, ce {record.l_ce:.6f}), "
            f"train WA {record.train_wa:.4f} UA {record.train_ua:.4f}."
        )
        return record

    def fit(self, data: PairBatch) -> List[EpochRecord]:
        if len(data) == 0:
            error_string = "Training over an empty set."
            self.logger.error(error_string)
            raise EmptyInputError(error_string)
        self.logger.info(
            f"Training on {len(data)} pairs for {self.config.max_epochs} epochs "
            f"(batch {self.config.batch_size}, lr {self.config.learning_rate})."
        )
        for epoch in range(1, self.config.max_epochs + 1):
            self.train_epoch(data, epoch)
        return self.history


class TrainResult(NamedTuple):
    params: PipelineParams
    history: List[EpochRecord]
    checkpoint_path: Path | None
    log_path: Path | None


def train(
    manifest: DatasetManifest,
    cfg: TrainConfig,
    out_dir: str | Path | None = None,
    records: Sequence[ManifestRecord] | None = None,
) -> TrainResult:
    """
    Train on the manifest (or the given subset of its records).

    With ``out_dir`` the checkpoint and the training log are written there.
    """
    cfg = replace(cfg, pipeline=resolve_pipeline(cfg.pipeline, manifest.dim))
    data = manifest.load_batch(records)
    trainer = Trainer(cfg)
    history = trainer.fit(data)

    checkpoint_path = log_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        checkpoint_path = save_checkpoint(trainer.params, out_dir / CHECKPOINT_NAME)
        log_path = write_train_log(history, out_dir / TRAIN_LOG_NAME)
        logger.info(f"Wrote training log to {log_path}.")
    return TrainResult(trainer.params, history, checkpoint_path, log_path)


def evaluate(
    checkpoint: str | Path | PipelineParams,
    manifest: DatasetManifest,
    session: int | None = None,
    records: Sequence[ManifestRecord] | None = None,
    batch_size: int = 16,
) -> MetricsReport:
    """
    Metrics of a checkpoint over the manifest, one session of it, or a record subset.
    """
    params = checkpoint if isinstance(checkpoint, PipelineParams) else load_checkpoint(checkpoint)
    if params.config.feature_dim != manifest.dim:
        error_string = (
            f"Checkpoint expects features of width {params.config.feature_dim}, "
            f"dataset has {manifest.dim}."
        )
        logger.error(error_string)
        raise DatasetError(error_string)

    records = manifest.records if records is None else list(records)
    if session is not None:
        records = [record for record in records if record.session == session]
    if not records:
        error_string = "Evaluation over an empty test set."
        logger.error(error_string)
        raise EmptyInputError(error_string)

    trainer = Trainer(TrainConfig(batch_size=batch_size, pipeline=params.config), params)
    report = trainer.evaluate(manifest.load_batch(records))
    logger.info(f"Evaluated {len(records)} pairs: WA {report.wa:.4f}, UA {report.ua:.4f}.")
    return report
