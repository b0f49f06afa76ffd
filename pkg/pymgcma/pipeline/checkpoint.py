"""
Model checkpoint module.

Binary layout, little-endian:
    magic  b"MGCMAMDL"
    u32    format version (1)
    u64    length of the UTF-8 JSON pipeline config, then the JSON
    per parameter, in store order:
        u32 name length, UTF-8 name, u32 rank, u64 x rank extents, f64 data
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..core.exceptions import CheckpointError, MGCMAError
from ..logger import get_logger
from .config import PipelineConfig
from .model_pipeline import PipelineParams, build_pipeline_params

logger = get_logger(__name__)

CHECKPOINT_MAGIC = b"MGCMAMDL"
CHECKPOINT_VERSION = 1
CHECKPOINT_NAME = "model.mgcma"

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_DATA_DTYPE = np.dtype("<f8")


class _Reader:
    """Cursor over a checkpoint blob that fails loudly on truncation."""

    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.blob):
            error_string = (
                f"Checkpoint truncated: need {size} bytes at offset {self.offset}, "
                f"blob holds {len(self.blob)}."
            )
            logger.error(error_string)
            raise CheckpointError(error_string)
        chunk = self.blob[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(_U32.size))[0]

    def u64(self) -> int:
        return _U64.unpack(self.take(_U64.size))[0]


def encode_checkpoint(params: PipelineParams) -> bytes:
    """Serialize config and parameter values."""
    config_json = json.dumps(params.config.to_dict(), sort_keys=True).encode("utf-8")
    chunks = [CHECKPOINT_MAGIC, _U32.pack(CHECKPOINT_VERSION), _U64.pack(len(config_json)), config_json]
    for name, parameter in params.store.items():
        encoded_name = name.encode("utf-8")
        chunks.append(_U32.pack(len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(_U32.pack(parameter.ndim))
        chunks.extend(_U64.pack(extent) for extent in parameter.shape)
        chunks.append(parameter.data.astype(_DATA_DTYPE).tobytes(order="C"))
    return b"".join(chunks)


def decode_checkpoint(blob: bytes) -> PipelineParams:
    """Rebuild PipelineParams from a checkpoint blob."""
    reader = _Reader(blob)
    magic = reader.take(len(CHECKPOINT_MAGIC))
    if magic != CHECKPOINT_MAGIC:
        error_string = f"Not a checkpoint: bad magic {magic!r}."
        logger.error(error_string)
        raise CheckpointError(error_string)
    version = reader.u32()
    if version != CHECKPOINT_VERSION:
        error_string = f"Unsupported checkpoint version {version}."
        logger.error(error_string)
        raise CheckpointError(error_string)

    try:
        config = PipelineConfig.from_dict(json.loads(reader.take(reader.u64()).decode("utf-8")))
    except (UnicodeDecodeError, ValueError, TypeError, MGCMAError) as e:
        error_string = f"Checkpoint config is unreadable: {e}"
        logger.error(error_string)
        raise CheckpointError(error_string)

    params = build_pipeline_params(config, seed=0)
    arrays = {}
    for expected_name, parameter in params.store.items():
        name = reader.take(reader.u32()).decode("utf-8", errors="replace")
        if name != expected_name:
            error_string = f"Checkpoint parameter '{name}' found where '{expected_name}' belongs."
            logger.error(error_string)
            raise CheckpointError(error_string)
        shape = tuple(reader.u64() for _ in range(reader.u32()))
        if shape != parameter.shape:
            error_string = f"Checkpoint shape {shape} of {name} does not match {parameter.shape}."
            logger.error(error_string)
            raise CheckpointError(error_string)
        raw = reader.take(int(np.prod(shape, dtype=np.int64)) * _DATA_DTYPE.itemsize)
        arrays[name] = np.frombuffer(raw, dtype=_DATA_DTYPE).reshape(shape).astype(np.float64)

    if reader.offset != len(blob):
        error_string = f"Checkpoint has {len(blob) - reader.offset} trailing bytes."
        logger.error(error_string)
        raise CheckpointError(error_string)
    if not all(np.isfinite(values).all() for values in arrays.values()):
        error_string = "Checkpoint holds non-finite parameter values."
        logger.error(error_string)
        raise CheckpointError(error_string)

    params.store.load_arrays(arrays)
    return params


def save_checkpoint(params: PipelineParams, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(params))
    logger.info(f"Saved checkpoint with {len(params.store)} parameters to {path}.")
    return path


def load_checkpoint(path: str | Path) -> PipelineParams:
    path = Path(path)
    if not path.exists():
        error_string = f"Checkpoint {path} does not exist."
        logger.error(error_string)
        raise CheckpointError(error_string)
    params = decode_checkpoint(path.read_bytes())
    logger.info(f"Loaded checkpoint {path}.")
    return params
