# pymgcma/tests/data/test_manifest.py

"""
Dataset manifest tests.
"""

import json

import numpy as np
import pytest

from pymgcma.core import DatasetError, Tensor
from pymgcma.data import (
    FeatureSequence,
    LabeledPair,
    generate_synthetic,
    load_manifest,
    write_feature_file,
    write_manifest,
)
from pymgcma.enumerations import EmotionLabel, Modality


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("manifest_data")
    return generate_synthetic(out_dir, n_pairs=10, dim=4, len_speech=3, len_text=2, seed=1)


def test_reload_matches_written_records(dataset):
    loaded = load_manifest(dataset.root)
    assert loaded.records == dataset.records
    assert loaded.dim == 4
    assert loaded.sessions == [1, 2, 3, 4, 5]


def test_lines_are_sorted_json(dataset):
    first = (dataset.root / "manifest.jsonl").read_text(encoding="utf-8").splitlines()[0]
    entry = json.loads(first)
    print(entry)
    assert list(entry) == sorted(entry)
    assert entry["label"] == "angry"
    assert entry["dim"] == 4


def test_validate_and_load_batch(dataset):
    dataset.validate()
    batch = dataset.load_batch()
    assert len(batch) == 10
    assert batch.labels.tolist() == [i % 4 for i in range(10)]
    assert batch.utterance_ids[0] == "utt00000"
    first = batch.pairs[0]
    assert first.speech.tokens.shape == (3, 4)
    assert first.text.tokens.shape == (2, 4)


def test_missing_and_mismatched_files(tmp_path):
    manifest = generate_synthetic(tmp_path, n_pairs=5, dim=3, len_speech=2, len_text=2)
    record = manifest.records[0]
    write_feature_file(
        FeatureSequence(record.utterance_id, Modality.SPEECH, Tensor(np.ones((4, 3)))),
        tmp_path / record.speech_path,
    )
    with pytest.raises(DatasetError):
        manifest.validate()

    (tmp_path / record.speech_path).unlink()
    with pytest.raises(DatasetError):
        manifest.validate()


def test_malformed_manifests(tmp_path):
    path = tmp_path / "manifest.jsonl"
    path.write_text("{not json}\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        load_manifest(path)

    path.write_text("\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        load_manifest(path)

    with pytest.raises(DatasetError):
        load_manifest(tmp_path / "absent.jsonl")


def test_mixed_widths_are_rejected(tmp_path, dataset):
    lines = [record.to_json(4) for record in dataset.records]
    lines[-1] = dataset.records[-1].to_json(5)
    path = tmp_path / "manifest.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        load_manifest(path)


def test_write_to_explicit_path(tmp_path, dataset):
    path = write_manifest(dataset, tmp_path / "copy.jsonl")
    assert path.read_text(encoding="utf-8") == (dataset.root / "manifest.jsonl").read_text(
        encoding="utf-8"
    )


def test_pair_members_must_agree():
    speech = FeatureSequence("a", Modality.SPEECH, Tensor(np.ones((1, 2))))
    text = FeatureSequence("b", Modality.TEXT, Tensor(np.ones((1, 2))))
    with pytest.raises(DatasetError):
        LabeledPair(speech, text, EmotionLabel.SAD)
    with pytest.raises(DatasetError):
        LabeledPair(
            speech, FeatureSequence("a", Modality.TEXT, Tensor(np.ones((1, 2))), session=3), 0
        )
    with pytest.raises(DatasetError):
        LabeledPair(
            FeatureSequence("a", Modality.TEXT, Tensor(np.ones((1, 2)))),
            FeatureSequence("a", Modality.SPEECH, Tensor(np.ones((1, 2)))),
            0,
        )
    assert LabeledPair(
        speech, FeatureSequence("a", Modality.TEXT, Tensor(np.ones((1, 2)))), 2
    ).label is EmotionLabel.SAD
