"""
Feature file module.

Binary layout, little-endian:
    magic  b"MGCF"
    u32    format version (1)
    u32    L, token count
    u32    D, feature width
    f32    L x D payload, row-major
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from ..core.exceptions import (
    DatasetError,
    EmptyInputError,
    FeatureCorruptionError,
    FeatureFormatError,
)
from ..core.tensor import Tensor
from ..enumerations import Modality
from ..logger import get_logger

logger = get_logger(__name__)

FEATURE_MAGIC = b"MGCF"
FEATURE_VERSION = 1
FEATURE_SUFFIX = ".mgcf"
_HEADER = struct.Struct("<4sIII")
_PAYLOAD_DTYPE = np.dtype("<f4")


@dataclass
class FeatureSequence:
    """Token features of one utterance in one modality."""

    utterance_id: str
    modality: Modality
    tokens: Tensor
    session: int = 1

    def __post_init__(self):
        if self.tokens.ndim != 2:
            raise DatasetError(f"Tokens must be L x D, got shape {self.tokens.shape}.")
        if self.tokens.shape[0] < 1:
            raise EmptyInputError(f"Utterance {self.utterance_id} has no tokens.")
        if not 1 <= self.session <= 5:
            raise DatasetError(f"Session must be in 1-5, got {self.session}.")

    @property
    def length(self) -> int:
        return self.tokens.shape[0]

    @property
    def dim(self) -> int:
        return self.tokens.shape[1]


def _parse_header(raw: bytes, path: Path) -> Tuple[int, int]:
    if len(raw) < _HEADER.size:
        error_string = f"Feature file {path} is truncated inside the header ({len(raw)} bytes)."
        logger.error(error_string)
        raise FeatureCorruptionError(error_string)
    magic, version, length, dim = _HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        error_string = f"Feature file {path} has bad magic {magic!r}."
        logger.error(error_string)
        raise FeatureFormatError(error_string)
    if version != FEATURE_VERSION:
        error_string = f"Feature file {path} has unsupported version {version}."
        logger.error(error_string)
        raise FeatureFormatError(error_string)
    if length < 1 or dim < 1:
        error_string = f"Feature file {path} declares an empty shape {length} x {dim}."
        logger.error(error_string)
        raise FeatureFormatError(error_string)
    return length, dim


def read_feature_header(path: str | Path) -> Tuple[int, int]:
    """Return (L, D) from a feature file header."""
    path = Path(path)
    with open(path, "rb") as file:
        raw = file.read(_HEADER.size)
    return _parse_header(raw, path)


def read_feature_file(
    path: str | Path,
    utterance_id: str | None = None,
    modality: Modality = Modality.SPEECH,
    session: int = 1,
) -> FeatureSequence:
    """
    Read a feature file into a FeatureSequence (payload widened to f64).

    :param utterance_id: Defaults to the file stem.
    """
    path = Path(path)
    raw = path.read_bytes()
    length, dim = _parse_header(raw, path)

    expected = _HEADER.size + length * dim * _PAYLOAD_DTYPE.itemsize
    if len(raw) != expected:
        error_string = (
            f"Feature file {path} holds {len(raw)} bytes, header implies {expected}."
        )
        logger.error(error_string)
        raise FeatureCorruptionError(error_string)

    payload = np.frombuffer(raw, dtype=_PAYLOAD_DTYPE, offset=_HEADER.size)
    tokens = payload.astype(np.float64).reshape(length, dim)
    logger.debug(f"Read {length} x {dim} features from {path}.")
    return FeatureSequence(
        utterance_id=utterance_id if utterance_id is not None else path.stem,
        modality=modality,
        tokens=Tensor(tokens),
        session=session,
    )


def encode_feature_sequence(seq: FeatureSequence) -> bytes:
    """Serialize to the feature file layout."""
    length, dim = seq.tokens.shape
    header = _HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, length, dim)
    return header + seq.tokens.data.astype(_PAYLOAD_DTYPE).tobytes(order="C")


def write_feature_file(seq: FeatureSequence, path: str | Path) -> None:
    """Write a FeatureSequence; identical input gives identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_feature_sequence(seq))
    logger.debug(f"Wrote {seq.length} x {seq.dim} features to {path}.")
