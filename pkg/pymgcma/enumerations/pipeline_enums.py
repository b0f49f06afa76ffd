"""
Pipeline Enums.
"""

from enum import Enum, IntEnum


class Stage(Enum):
    """Alignment stages of the pipeline."""

    DAM = "DAM"  # distribution-based alignment
    TAM = "TAM"  # token-based alignment
    IAM = "IAM"  # instance-based alignment


class EmotionLabel(IntEnum):
    """Emotion classes with stable integer codes."""

    ANGRY = 0
    HAPPY = 1
    SAD = 2
    NEUTRAL = 3

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        """Look up a label by its lower-case name."""
        return cls[name.upper()]

    @property
    def label_name(self) -> str:
        return self.name.lower()


class EmbeddingTap(Enum):
    """Points in the pipeline where embeddings can be exported."""

    ENCODER = "encoder"
    POST_ALIGNMENT = "post_alignment"
    POOLED = "pooled"


class AblationVariant(Enum):
    """Ablation and stage-order systems S0-S9."""

    S0 = (Stage.DAM, Stage.TAM, Stage.IAM)
    S1 = (Stage.TAM, Stage.IAM)
    S2 = (Stage.DAM, Stage.IAM)
    S3 = (Stage.DAM, Stage.TAM)
    S4 = ()
    S5 = (Stage.DAM, Stage.IAM, Stage.TAM)
    S6 = (Stage.IAM, Stage.DAM, Stage.TAM)
    S7 = (Stage.IAM, Stage.TAM, Stage.DAM)
    S8 = (Stage.TAM, Stage.DAM, Stage.IAM)
    S9 = (Stage.TAM, Stage.IAM, Stage.DAM)

    @property
    def stages(self) -> tuple:
        return self.value

    @property
    def description(self) -> str:
        """Human-readable configuration, e.g. 'w/o DAM' or 'DAM + TAM + IAM'."""
        if self is AblationVariant.S4:
            return "w/o (DAM + TAM + IAM)"
        if len(self.stages) == 2:
            missing = [s for s in Stage if s not in self.stages][0]
            return f"w/o {missing.value}"
        return " + ".join(stage.value for stage in self.stages)
