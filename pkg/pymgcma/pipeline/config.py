"""
Pipeline configuration.
"""

from dataclasses import asdict, dataclass, fields
from typing import List, Tuple

from ..alignment.attention import AttentionConfig
from ..alignment.distribution_alignment import ContrastiveConfig
from ..core.exceptions import ConfigError, ContractError, ExitCode
from ..enumerations import EmotionLabel, Stage
from ..logger import get_logger

logger = get_logger(__name__)

DEFAULT_STAGE_ORDER = (Stage.DAM, Stage.TAM, Stage.IAM)


def _as_stages(values) -> Tuple[Stage, ...]:
    try:
        return tuple(value if isinstance(value, Stage) else Stage(value) for value in values)
    except ValueError as e:
        error_string = f"Unknown stage in {list(values)}: {e}"
        logger.error(error_string)
        raise ContractError(error_string, ExitCode.UsageError)


@dataclass(frozen=True)
class PipelineConfig:
    """
    Model shape and stage arrangement.

    ``enabled_stages`` defaults to ``stage_order``. ``input_dim`` is the
    feature width on disk; None means it equals ``model_dim``.
    """

    stage_order: Tuple[Stage, ...] = DEFAULT_STAGE_ORDER
    enabled_stages: Tuple[Stage, ...] | None = None
    model_dim: int = 64
    num_heads: int = 4
    n_blocks: int = 2
    tau: float = 0.07
    p: float = 1.0
    q: float = 0.0
    num_classes: int = len(EmotionLabel)
    branch_layers: int = 1
    normalize_instances: bool = True
    layer_norm: bool = False
    share_branch_weights: bool = False
    input_dim: int | None = None

    def __post_init__(self):
        order = _as_stages(self.stage_order)
        enabled = order if self.enabled_stages is None else _as_stages(self.enabled_stages)
        object.__setattr__(self, "stage_order", order)
        object.__setattr__(self, "enabled_stages", enabled)

        if len(set(order)) != len(order):
            error_string = f"Stage order repeats a stage: {[s.value for s in order]}."
            logger.error(error_string)
            raise ContractError(error_string, ExitCode.UsageError)
        if set(order) != set(enabled):
            error_string = (
                f"Stage order {[s.value for s in order]} is not a permutation of the "
                f"enabled stages {[s.value for s in enabled]}."
            )
            logger.error(error_string)
            raise ContractError(error_string, ExitCode.UsageError)

        # Raises ConfigError for non-positive or indivisible widths
        AttentionConfig(self.model_dim, self.num_heads)
        ContrastiveConfig(self.p, self.q, self.tau)
        if self.n_blocks < 1:
            raise ConfigError(f"n_blocks must be at least 1, got {self.n_blocks}.")
        if self.branch_layers < 1:
            raise ConfigError(f"branch_layers must be at least 1, got {self.branch_layers}.")
        if not 2 <= self.num_classes <= len(EmotionLabel):
            raise ConfigError(
                f"num_classes must be in 2-{len(EmotionLabel)}, got {self.num_classes}."
            )
        if self.input_dim is not None and self.input_dim < 1:
            raise ConfigError(f"input_dim must be positive, got {self.input_dim}.")

    @property
    def attention(self) -> AttentionConfig:
        return AttentionConfig(self.model_dim, self.num_heads)

    @property
    def contrastive(self) -> ContrastiveConfig:
        return ContrastiveConfig(self.p, self.q, self.tau)

    @property
    def feature_dim(self) -> int:
        return self.model_dim if self.input_dim is None else self.input_dim

    @property
    def needs_projection(self) -> bool:
        return self.feature_dim != self.model_dim

    def has_stage(self, stage: Stage) -> bool:
        return stage in self.enabled_stages

    def with_stages(self, stages) -> "PipelineConfig":
        """Copy with a new stage order; all listed stages are enabled."""
        values = self.to_dict()
        values["stage_order"] = [Stage(s).value for s in stages]
        values["enabled_stages"] = None
        return PipelineConfig.from_dict(values)

    def to_dict(self) -> dict:
        values = asdict(self)
        values["stage_order"] = [stage.value for stage in self.stage_order]
        values["enabled_stages"] = [stage.value for stage in self.enabled_stages]
        return values

    @classmethod
    def from_dict(cls, values: dict) -> "PipelineConfig":
        unknown = sorted(set(values) - {f.name for f in fields(cls)})
        if unknown:
            error_string = f"Unknown pipeline keys: {unknown}."
            logger.error(error_string)
            raise ConfigError(error_string)
        values = dict(values)
        for key in ("stage_order", "enabled_stages"):
            if values.get(key) is not None:
                values[key] = tuple(values[key])
        return cls(**values)


def pipeline_keys() -> List[str]:
    return [f.name for f in fields(PipelineConfig)]
