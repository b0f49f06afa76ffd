# pymgcma/tests/training/test_acceptance.py

"""
End-to-end runs at desk scale. These take minutes; run them with
``pytest -m slow``.
"""

import numpy as np
import pytest
from sklearn.linear_model import LogisticRegression

from pymgcma.data import generate_synthetic, split_folds
from pymgcma.training import TrainConfig, compute_metrics, cross_validate


def _oracle_ua(manifest) -> float:
    """Pooled UA of a logistic regression on mean-pooled features."""
    batch = manifest.load_batch()
    features = np.stack(
        [
            np.concatenate([p.speech.tokens.data.mean(axis=0), p.text.tokens.data.mean(axis=0)])
            for p in batch
        ]
    )
    labels = batch.labels
    index = {record.utterance_id: i for i, record in enumerate(manifest.records)}
    y_true, y_pred = [], []
    for fold in split_folds(manifest):
        train = [index[r.utterance_id] for r in fold.train]
        test = [index[r.utterance_id] for r in fold.test]
        model = LogisticRegression(max_iter=1000).fit(features[train], labels[train])
        y_true.extend(labels[test])
        y_pred.extend(model.predict(features[test]))
    return compute_metrics(y_true, y_pred).ua


@pytest.mark.slow
def test_separated_data_is_learned(tmp_path):
    manifest = generate_synthetic(tmp_path, n_pairs=200, separation=4.0, seed=0)
    report = cross_validate(manifest, TrainConfig(), threads=5)
    oracle = _oracle_ua(manifest)
    print(report.ua, oracle)
    assert report.ua >= 0.85
    assert report.ua >= oracle - 0.02


@pytest.mark.slow
def test_unseparated_data_stays_at_chance(tmp_path):
    manifest = generate_synthetic(tmp_path, n_pairs=200, separation=0.0, seed=0)
    report = cross_validate(manifest, TrainConfig(max_epochs=30), threads=5)
    print(report.ua)
    assert 0.15 <= report.ua <= 0.35
