"""
Dataset manifest module.

The manifest is UTF-8 JSON Lines, one record per utterance:
    {"utterance_id", "label", "session", "speech_path", "text_path",
     "len_speech", "len_text", "dim"}
Paths are relative to the manifest directory.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Sequence

from ..core.exceptions import DatasetError
from ..enumerations import EmotionLabel, Modality
from ..logger import get_logger
from .batch import LabeledPair, PairBatch
from .feature_files import read_feature_file, read_feature_header

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class ManifestRecord:
    """One utterance entry of the manifest."""

    utterance_id: str
    label: EmotionLabel
    session: int
    speech_path: str
    text_path: str
    len_speech: int
    len_text: int

    def to_json(self, dim: int) -> str:
        record = asdict(self)
        record["label"] = EmotionLabel(self.label).label_name
        record["dim"] = dim
        return json.dumps(record, sort_keys=True)


@dataclass
class DatasetManifest:
    """Records, shared feature width D and the directory paths resolve against."""

    records: List[ManifestRecord]
    dim: int
    root: Path = field(default_factory=Path)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def sessions(self) -> List[int]:
        return sorted({record.session for record in self.records})

    def validate(self) -> None:
        """Check that every referenced file exists and agrees with its record."""
        for record in self.records:
            for relative, length in (
                (record.speech_path, record.len_speech),
                (record.text_path, record.len_text),
            ):
                path = self.root / relative
                if not path.exists():
                    error_string = f"Feature file {path} of {record.utterance_id} is missing."
                    logger.error(error_string)
                    raise DatasetError(error_string)
                header = read_feature_header(path)
                if header != (length, self.dim):
                    error_string = (
                        f"Header {header} of {path} disagrees with manifest "
                        f"({length}, {self.dim})."
                    )
                    logger.error(error_string)
                    raise DatasetError(error_string)

    def load_pair(self, record: ManifestRecord) -> LabeledPair:
        speech = read_feature_file(
            self.root / record.speech_path, record.utterance_id, Modality.SPEECH, record.session
        )
        text = read_feature_file(
            self.root / record.text_path, record.utterance_id, Modality.TEXT, record.session
        )
        for seq in (speech, text):
            if seq.dim != self.dim:
                error_string = (
                    f"{seq.modality.value} features of {record.utterance_id} have width "
                    f"{seq.dim}, manifest declares {self.dim}."
                )
                logger.error(error_string)
                raise DatasetError(error_string)
        return LabeledPair(speech, text, record.label)

    def load_batch(self, records: Sequence[ManifestRecord] | None = None) -> PairBatch:
        """Read the feature files of the given records (default: all)."""
        records = self.records if records is None else records
        return PairBatch([self.load_pair(record) for record in records])


def write_manifest(manifest: DatasetManifest, path: str | Path | None = None) -> Path:
    """Write the manifest as JSON Lines; defaults to <root>/manifest.jsonl."""
    path = Path(path) if path is not None else manifest.root / MANIFEST_NAME
    lines = [record.to_json(manifest.dim) for record in manifest.records]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.info(f"Wrote manifest with {len(lines)} records to {path}.")
    return path


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load a manifest file, or <dir>/manifest.jsonl when given a directory."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.exists():
        error_string = f"Manifest {path} does not exist."
        logger.error(error_string)
        raise DatasetError(error_string)

    records, dims = [], set()
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            dims.add(int(entry.pop("dim")))
            entry["label"] = EmotionLabel.from_name(entry["label"])
            records.append(ManifestRecord(**entry))
        except (KeyError, TypeError, ValueError) as e:
            error_string = f"Malformed manifest line {number} in {path}: {e}"
            logger.error(error_string)
            raise DatasetError(error_string)

    if not records:
        error_string = f"Manifest {path} has no records."
        logger.error(error_string)
        raise DatasetError(error_string)
    if len(dims) != 1:
        error_string = f"Manifest {path} declares several feature widths: {sorted(dims)}."
        logger.error(error_string)
        raise DatasetError(error_string)

    logger.info(f"Loaded manifest {path} with {len(records)} records.")
    return DatasetManifest(records=records, dim=dims.pop(), root=path.parent)
