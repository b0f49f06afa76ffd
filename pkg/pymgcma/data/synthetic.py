"""
Synthetic dataset generator.

Each class owns an anchor direction scaled by ``separation``. Speech and
text tokens are the anchor pushed through a fixed random linear map of
their modality plus unit Gaussian noise per token. Sessions are assigned
round-robin, labels cycle over the classes.
"""

from pathlib import Path

import numpy as np

from ..core.exceptions import ConfigError
from ..core.tensor import Tensor
from ..enumerations import EmotionLabel, Modality
from ..logger import get_logger
from .feature_files import FEATURE_SUFFIX, FeatureSequence, write_feature_file
from .manifest import DatasetManifest, ManifestRecord, write_manifest

logger = get_logger(__name__)

NUM_SESSIONS = 5


def _class_anchors(rng: np.random.Generator, n_classes: int, dim: int, separation: float):
    directions = rng.standard_normal((n_classes, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * separation


def generate_synthetic(
    out_dir: str | Path,
    n_pairs: int,
    n_classes: int = 4,
    dim: int = 32,
    len_speech: int = 8,
    len_text: int = 6,
    separation: float = 4.0,
    seed: int = 0,
    session_shift: float = 0.0,
) -> DatasetManifest:
    """
    Write a labeled speech-text dataset and its manifest under ``out_dir``.

    :param separation: Anchor norm; 0 removes every class signal.
    :param session_shift: Norm of a per-session bias added to both modalities.
    :return: The written manifest.
    """
    if separation < 0:
        raise ConfigError(f"separation must be non-negative, got {separation}.")
    if session_shift < 0:
        raise ConfigError(f"session_shift must be non-negative, got {session_shift}.")
    if not 1 <= n_classes <= len(EmotionLabel):
        raise ConfigError(f"n_classes must be in 1-{len(EmotionLabel)}, got {n_classes}.")
    if n_pairs < n_classes:
        raise ConfigError(f"n_pairs ({n_pairs}) must be at least n_classes ({n_classes}).")
    if min(dim, len_speech, len_text) < 1:
        raise ConfigError("dim, len_speech and len_text must be positive.")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    speech_map = rng.normal(0.0, 1.0 / np.sqrt(dim), size=(dim, dim))
    text_map = rng.normal(0.0, 1.0 / np.sqrt(dim), size=(dim, dim))
    anchors = _class_anchors(rng, n_classes, dim, separation)
    session_bias = _class_anchors(rng, NUM_SESSIONS, dim, session_shift)

    records = []
    for index in range(n_pairs):
        label = EmotionLabel(index % n_classes)
        session = index % NUM_SESSIONS + 1
        utterance_id = f"utt{index:05d}"
        bias = session_bias[session - 1]

        speech_tokens = anchors[label] @ speech_map + bias + rng.standard_normal((len_speech, dim))
        text_tokens = anchors[label] @ text_map + bias + rng.standard_normal((len_text, dim))

        speech_path = Path(Modality.SPEECH.value) / f"{utterance_id}{FEATURE_SUFFIX}"
        text_path = Path(Modality.TEXT.value) / f"{utterance_id}{FEATURE_SUFFIX}"
        write_feature_file(
            FeatureSequence(utterance_id, Modality.SPEECH, Tensor(speech_tokens), session),
            out_dir / speech_path,
        )
        write_feature_file(
            FeatureSequence(utterance_id, Modality.TEXT, Tensor(text_tokens), session),
            out_dir / text_path,
        )
        records.append(
            ManifestRecord(
                utterance_id=utterance_id,
                label=label,
                session=session,
                speech_path=speech_path.as_posix(),
                text_path=text_path.as_posix(),
                len_speech=len_speech,
                len_text=len_text,
            )
        )

    manifest = DatasetManifest(records=records, dim=dim, root=out_dir)
    write_manifest(manifest)
    logger.info(
        f"Generated {n_pairs} synthetic pairs (dim {dim}, separation {separation}, "
        f"seed {seed}) in {out_dir}."
    )
    return manifest
