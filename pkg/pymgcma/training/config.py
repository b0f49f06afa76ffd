"""
Training and run configuration.

A run is described by one flat JSON document merging the training keys,
the pipeline keys and the data paths. Every key has a default; unknown
keys are rejected.
"""

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict

from ..core.exceptions import ConfigError
from ..logger import get_logger
from ..pipeline.config import PipelineConfig, pipeline_keys

logger = get_logger(__name__)

THREADS_ENV = "MGCMA_THREADS"

# Overrides applied on top of the defaults
PRESETS: Dict[str, dict] = {
    "desk": {},
    "full": {
        "model_dim": 768,
        "num_heads": 12,
        "n_blocks": 6,
        "learning_rate": 1e-5,
        "batch_size": 4,
    },
}


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and loop settings plus the pipeline they train."""

    learning_rate: float = 1e-3
    batch_size: int = 16
    max_epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be non-negative, got {self.learning_rate}.")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}.")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be positive, got {self.max_epochs}.")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}.")
        if self.eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.eps}.")

    def to_dict(self) -> dict:
        values = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "pipeline"}
        values.update(self.pipeline.to_dict())
        return values


def train_keys():
    return [f.name for f in fields(TrainConfig) if f.name != "pipeline"]


@dataclass(frozen=True)
class RunConfig:
    """TrainConfig plus data/output directories and fold parallelism."""

    train: TrainConfig = field(default_factory=TrainConfig)
    data_dir: str | None = None
    out_dir: str | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}.")

    @property
    def pipeline(self) -> PipelineConfig:
        return self.train.pipeline

    @property
    def worker_count(self) -> int:
        """Configured threads, else MGCMA_THREADS, else 1."""
        if self.threads is not None:
            return self.threads
        raw = os.getenv(THREADS_ENV, "1")
        try:
            return max(1, int(raw))
        except ValueError:
            error_string = f"{THREADS_ENV} must be an integer, got '{raw}'."
            logger.error(error_string)
            raise ConfigError(error_string)

    def to_dict(self) -> dict:
        values = self.train.to_dict()
        values.update(data_dir=self.data_dir, out_dir=self.out_dir, threads=self.threads)
        return values

    @classmethod
    def from_dict(cls, values: dict, preset: str = "desk") -> "RunConfig":
        """Build from a flat key map layered over a preset."""
        if preset not in PRESETS:
            error_string = f"Unknown preset '{preset}'; choose from {sorted(PRESETS)}."
            logger.error(error_string)
            raise ConfigError(error_string)

        merged = dict(PRESETS[preset])
        merged.update(values)
        run_keys = {"data_dir", "out_dir", "threads"}
        known = set(train_keys()) | set(pipeline_keys()) | run_keys
        unknown = sorted(set(merged) - known)
        if unknown:
            error_string = f"Unknown config keys: {unknown}."
            logger.error(error_string)
            raise ConfigError(error_string)

        try:
            pipeline = PipelineConfig.from_dict(
                {key: merged[key] for key in pipeline_keys() if key in merged}
            )
            train = TrainConfig(
                pipeline=pipeline, **{key: merged[key] for key in train_keys() if key in merged}
            )
        except TypeError as e:
            error_string = f"Invalid config values: {e}"
            logger.error(error_string)
            raise ConfigError(error_string)
        return cls(train=train, **{key: merged[key] for key in run_keys if key in merged})

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with keys replaced; None values leave a key untouched."""
        values = self.to_dict()
        values.update({key: value for key, value in overrides.items() if value is not None})
        return RunConfig.from_dict(values, preset="desk")


def load_run_config(path: str | Path | None = None, preset: str = "desk") -> RunConfig:
    """Read a run config JSON file; no path gives the preset defaults."""
    if path is None:
        return RunConfig.from_dict({}, preset)
    path = Path(path)
    try:
        values = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        error_string = f"Config file {path} does not exist."
        logger.error(error_string)
        raise ConfigError(error_string)
    except json.JSONDecodeError as e:
        error_string = f"Config file {path} is not valid JSON: {e}"
        logger.error(error_string)
        raise ConfigError(error_string)
    if not isinstance(values, dict):
        error_string = f"Config file {path} must hold a JSON object."
        logger.error(error_string)
        raise ConfigError(error_string)
    logger.info(f"Loaded run config {path} with preset '{preset}'.")
    return RunConfig.from_dict(values, preset)
