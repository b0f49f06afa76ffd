# pymgcma/training/__init__.py

"""
Training harness: configuration, optimizer, metrics, trainer and experiments.
"""

from .config import PRESETS, RunConfig, TrainConfig, load_run_config
from .experiments import (
    AblationTable,
    cross_validate,
    export_embeddings,
    fold_seed,
    gradient_check_report,
    metrics_frame,
    parse_variants,
    run_ablations,
    run_folds,
)
from .metrics import MetricsReport, compute_metrics, metrics_from_confusion, pool_reports
from .optimizer import AdamState, adam_step
from .trainer import EpochRecord, Trainer, evaluate, train, write_train_log

__all__ = [
    "PRESETS",
    "TrainConfig",
    "RunConfig",
    "load_run_config",
    "AdamState",
    "adam_step",
    "MetricsReport",
    "compute_metrics",
    "metrics_from_confusion",
    "pool_reports",
    "EpochRecord",
    "Trainer",
    "train",
    "evaluate",
    "write_train_log",
    "fold_seed",
    "run_folds",
    "cross_validate",
    "metrics_frame",
    "parse_variants",
    "AblationTable",
    "run_ablations",
    "export_embeddings",
    "gradient_check_report",
]
