"""
Labeled speech-text pairs and batches.
"""

from dataclasses import dataclass, field
from typing import Iterator, List

import numpy as np

from ..core.exceptions import DatasetError
from ..enumerations import EmotionLabel, Modality
from .feature_files import FeatureSequence


@dataclass
class LabeledPair:
    """Speech and text features of one utterance with its emotion label."""

    speech: FeatureSequence
    text: FeatureSequence
    label: EmotionLabel

    def __post_init__(self):
        if self.speech.utterance_id != self.text.utterance_id:
            raise DatasetError(
                f"Pair members disagree on utterance id: "
                f"{self.speech.utterance_id} vs {self.text.utterance_id}."
            )
        if self.speech.session != self.text.session:
            raise DatasetError(
                f"Pair members of {self.speech.utterance_id} disagree on session."
            )
        if self.speech.modality is not Modality.SPEECH or self.text.modality is not Modality.TEXT:
            raise DatasetError(f"Pair {self.speech.utterance_id} has swapped modalities.")
        self.label = EmotionLabel(self.label)

    @property
    def utterance_id(self) -> str:
        return self.speech.utterance_id

    @property
    def session(self) -> int:
        return self.speech.session


@dataclass
class PairBatch:
    """N labeled pairs forming the in-batch contrastive set."""

    pairs: List[LabeledPair] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[LabeledPair]:
        return iter(self.pairs)

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(pair.label) for pair in self.pairs], dtype=np.int64)

    @property
    def utterance_ids(self) -> List[str]:
        return [pair.utterance_id for pair in self.pairs]

    def subset(self, indices) -> "PairBatch":
        return PairBatch([self.pairs[index] for index in indices])
