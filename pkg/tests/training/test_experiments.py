# pymgcma/tests/training/test_experiments.py

"""
Cross-validation, ablation table, embedding export and gradient check
report tests.
"""

import numpy as np
import pytest

from pymgcma.core import ConfigError, UnknownVariantError
from pymgcma.data import generate_synthetic
from pymgcma.enumerations import AblationVariant
from pymgcma.pipeline import PipelineConfig
from pymgcma.training import (
    TrainConfig,
    cross_validate,
    export_embeddings,
    fold_seed,
    gradient_check_report,
    metrics_frame,
    parse_variants,
    run_ablations,
    train,
)
from pymgcma.training.experiments import ABLATION_COLUMNS


@pytest.fixture(scope="module")
def manifest(tmp_path_factory):
    return generate_synthetic(
        tmp_path_factory.mktemp("experiment_data"),
        n_pairs=20,
        dim=8,
        len_speech=3,
        len_text=2,
        separation=3.0,
        seed=5,
    )


@pytest.fixture(scope="module")
def cfg():
    pipeline = PipelineConfig(model_dim=8, num_heads=2, n_blocks=1, tau=0.2)
    return TrainConfig(learning_rate=1e-2, batch_size=8, max_epochs=2, seed=3, pipeline=pipeline)


@pytest.fixture(scope="module")
def report(manifest, cfg):
    return cross_validate(manifest, cfg)


def test_fold_seeds():
    seeds = [fold_seed(0, session) for session in range(1, 6)]
    assert len(set(seeds)) == 5
    assert seeds == [fold_seed(0, session) for session in range(1, 6)]
    assert fold_seed(1, 1) != fold_seed(0, 1)


def test_cross_validation_pools_five_folds(report):
    assert len(report.folds) == 5
    assert report.total == 20
    assert np.array_equal(report.confusion, sum(fold.confusion for fold in report.folds))
    assert [fold.total for fold in report.folds] == [4] * 5


def test_threads_do_not_change_results(manifest, cfg, report):
    threaded = cross_validate(manifest, cfg, threads=3)
    assert threaded.wa == report.wa
    assert threaded.ua == report.ua
    for first, second in zip(report.folds, threaded.folds):
        assert np.array_equal(first.confusion, second.confusion)


def test_metrics_frame(report):
    frame = metrics_frame(report)
    print(frame)
    assert list(frame.columns) == ["scope", "wa", "ua", "n"]
    assert frame["scope"].tolist() == ["pooled", "fold1", "fold2", "fold3", "fold4", "fold5", "fold_mean"]
    assert frame["n"].iloc[0] == 20


def test_parse_variants():
    assert parse_variants("S0, s4") == [AblationVariant.S0, AblationVariant.S4]
    assert parse_variants(["S9"]) == [AblationVariant.S9]
    with pytest.raises(UnknownVariantError):
        parse_variants("S0,S10")


def test_variant_descriptions():
    assert AblationVariant.S0.description == "DAM + TAM + IAM"
    assert AblationVariant.S1.description == "w/o DAM"
    assert AblationVariant.S4.description == "w/o (DAM + TAM + IAM)"


def test_two_system_table(manifest, cfg):
    table = run_ablations(manifest, cfg, "S0,S4")
    frame = table.to_frame()
    print(frame)
    assert list(frame.columns) == ABLATION_COLUMNS
    assert frame["system"].tolist() == ["S0", "S4"]
    assert frame["stage_order"].tolist() == ["DAM>TAM>IAM", ""]
    bare = frame.iloc[1]
    assert bare["max_l_da"] == 0.0
    assert bare["max_l_ia"] == 0.0
    assert frame.iloc[0]["max_l_da"] > 0.0


def test_every_system_runs(manifest, cfg):
    table = run_ablations(manifest, cfg, list(AblationVariant))
    frame = table.to_frame()
    assert len(frame) == 10
    assert frame["ua"].between(0.0, 1.0).all()


def test_export_embeddings(manifest, cfg, tmp_path):
    params = train(manifest, cfg).params
    out = tmp_path / "pooled.csv"
    frame = export_embeddings(params, manifest, "pooled", out=out, chunk_size=7)
    assert out.exists()
    assert len(frame) == 40
    assert list(frame.columns[:3]) == ["utterance_id", "modality", "label"]
    assert frame.shape[1] == 3 + 8
    assert frame["modality"].tolist()[:2] == ["speech", "text"]
    vectors = frame[[f"v{i}" for i in range(8)]].to_numpy()
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-9)

    encoder = export_embeddings(params, manifest, "encoder")
    first = manifest.load_batch(manifest.records[:1]).pairs[0]
    assert np.allclose(
        encoder.iloc[0, 3:].to_numpy(dtype=float), first.speech.tokens.data.mean(axis=0)
    )
    with pytest.raises(ConfigError):
        export_embeddings(params, manifest, "logits")


def test_gradient_check_report():
    errors = gradient_check_report(seed=3)
    print(errors)
    assert list(errors) == ["l_da", "l_ia", "l_ce", "total"]
    assert all(error < 1e-4 for error in errors.values())
