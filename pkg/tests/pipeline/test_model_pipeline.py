# pymgcma/tests/pipeline/test_model_pipeline.py

"""
Model pipeline tests: stage composition, loss totals, bucketing and
prediction.
"""

import math

import numpy as np
import pytest

from pymgcma.alignment import (
    construct_distribution,
    distribution_contrastive_loss,
    instance_contrastive_loss,
    pool_instance,
    token_align,
)
from pymgcma.core import (
    ConfigError,
    ContractError,
    DimensionError,
    EmptyInputError,
    Tensor,
    grad_check,
)
from pymgcma.data import FeatureSequence, LabeledPair, PairBatch
from pymgcma.enumerations import Modality, Stage
from pymgcma.pipeline import (
    PipelineConfig,
    build_pipeline_params,
    cross_entropy,
    encode,
    forward,
    predict,
)


def _batch(rng, lengths, dim, scale=1.0):
    pairs = []
    for index, (len_speech, len_text) in enumerate(lengths):
        utterance_id = f"utt{index:05d}"
        speech = FeatureSequence(
            utterance_id, Modality.SPEECH, Tensor(scale * rng.standard_normal((len_speech, dim)))
        )
        text = FeatureSequence(
            utterance_id, Modality.TEXT, Tensor(scale * rng.standard_normal((len_text, dim)))
        )
        pairs.append(LabeledPair(speech, text, index % 4))
    return PairBatch(pairs)


@pytest.fixture(scope="module")
def cfg():
    return PipelineConfig(model_dim=8, num_heads=2, n_blocks=1, tau=0.5)


@pytest.fixture(scope="module")
def params(cfg):
    return build_pipeline_params(cfg, seed=0)


@pytest.fixture(scope="module")
def batch():
    """Mixed lengths, so several buckets are interleaved."""
    return _batch(np.random.default_rng(1), [(4, 3), (3, 5), (4, 3), (2, 2), (3, 5)], 8)


def test_uniform_logits_give_log_of_class_count():
    loss = cross_entropy(Tensor(np.zeros((3, 4))), [0, 1, 2])
    assert abs(loss.item() - math.log(4.0)) < 1e-12


def test_cross_entropy_label_checks():
    with pytest.raises(ContractError):
        cross_entropy(Tensor(np.zeros((2, 4))), [0, 4])
    with pytest.raises(DimensionError):
        cross_entropy(Tensor(np.zeros((2, 4))), [0])


def test_total_is_sum_of_terms(batch, params):
    logits, losses = forward(batch, params)
    assert logits.shape == (5, 4)
    assert losses.total.item() == (losses.l_da + losses.l_ia + losses.l_ce).item()
    assert losses.da_s2t.shape == (5,)
    assert losses.ia_t2s.shape == (5,)


def test_matches_per_pair_composition(batch, params, cfg):
    """The bucketed batch equals running every stage on single utterances."""
    speech_gaussians, text_gaussians, speech_instances, text_instances, rows = [], [], [], [], []
    for pair in batch:
        x_s, x_t = pair.speech.tokens, pair.text.tokens
        speech_gaussians.append(construct_distribution(x_s, params.speech_distribution))
        text_gaussians.append(construct_distribution(x_t, params.text_distribution))
        aligned = token_align(x_s, x_t, params.token_alignment)
        speech_instances.append(pool_instance(aligned.speech))
        text_instances.append(pool_instance(aligned.text))
        pooled = np.concatenate(
            [aligned.speech.data.mean(axis=0), aligned.text.data.mean(axis=0)]
        )
        rows.append(pooled @ params.classifier.weight.data + params.classifier.bias.data)

    l_da = distribution_contrastive_loss(speech_gaussians, text_gaussians, cfg.contrastive)
    l_ia = instance_contrastive_loss(speech_instances, text_instances, cfg.tau)
    logits, losses = forward(batch, params)

    assert abs(losses.l_da.item() - l_da.loss.item()) < 1e-12
    assert abs(losses.l_ia.item() - l_ia.loss.item()) < 1e-12
    assert np.allclose(logits.data, np.stack(rows), atol=1e-12)


def test_no_stages_is_the_bare_classifier(batch, params, cfg):
    bare = cfg.with_stages([])
    logits, losses = forward(batch, params, bare)
    assert losses.l_da.item() == 0.0
    assert losses.l_ia.item() == 0.0
    assert losses.total.item() == losses.l_ce.item()
    assert losses.da_s2t is None

    features = np.stack(
        [
            np.concatenate([p.speech.tokens.data.mean(axis=0), p.text.tokens.data.mean(axis=0)])
            for p in batch
        ]
    )
    expected = features @ params.classifier.weight.data + params.classifier.bias.data
    assert np.allclose(logits.data, expected, atol=1e-12)


def test_disabling_instance_alignment_drops_its_term(batch, params, cfg):
    _, full = forward(batch, params)
    _, partial = forward(batch, params, cfg.with_stages([Stage.DAM, Stage.TAM]))
    assert partial.l_ia.item() == 0.0
    assert partial.l_da.item() == full.l_da.item()
    assert partial.l_ce.item() == full.l_ce.item()
    assert abs(partial.total.item() - (full.total.item() - full.l_ia.item())) < 1e-12


def test_stage_order_changes_the_losses(batch, params, cfg):
    _, first = forward(batch, params)
    _, second = forward(batch, params, cfg.with_stages([Stage.TAM, Stage.DAM, Stage.IAM]))
    assert first.l_da.item() != second.l_da.item()
    assert first.l_ia.item() == second.l_ia.item()


def test_shape_keys_must_agree(batch, params):
    with pytest.raises(ContractError):
        forward(batch, params, PipelineConfig(model_dim=16, num_heads=2, n_blocks=1))


def test_logits_do_not_depend_on_batch_mates(batch, params):
    logits, _ = forward(batch, params)
    for index in range(len(batch)):
        single, _ = forward(batch.subset([index]), params)
        assert np.allclose(single.data[0], logits.data[index], atol=1e-12)


def test_empty_batch_and_width_mismatch(params):
    with pytest.raises(EmptyInputError):
        forward(PairBatch([]), params)
    with pytest.raises(DimensionError):
        forward(_batch(np.random.default_rng(2), [(2, 2)], 5), params)


def test_projection_for_other_feature_widths():
    cfg = PipelineConfig(model_dim=8, num_heads=2, n_blocks=1, input_dim=5)
    params = build_pipeline_params(cfg, seed=0)
    assert params.store.names()[0] == "proj.speech.weight"
    assert params.store["proj.speech.weight"].shape == (5, 8)
    logits, _ = forward(_batch(np.random.default_rng(3), [(3, 2), (2, 3)], 5), params)
    assert logits.shape == (2, 4)


def test_variants_share_initial_weights(cfg):
    full = build_pipeline_params(cfg, seed=9).store.snapshot()
    bare = build_pipeline_params(cfg.with_stages([]), seed=9).store.snapshot()
    assert list(full) == list(bare)
    assert all(np.array_equal(full[name], bare[name]) for name in full)


def test_copy_is_independent(params):
    clone = params.copy()
    clone.classifier.weight.data[...] = 0.0
    assert np.any(params.classifier.weight.data != 0.0)


@pytest.mark.parametrize(
    "logits, expected",
    [([[0.0, 0.0, 0.0, 1.0]], [3]), ([[0.5, 0.5, 0.5, 0.5]], [0]), ([[2.0, 1.0], [1.0, 2.0]], [0, 1])],
)
def test_predict(logits, expected):
    assert predict(Tensor(logits)).tolist() == expected


def test_predict_matches_a_loop():
    values = np.random.default_rng(4).standard_normal((20, 4))
    expected = [max(range(4), key=lambda c: (row[c], -c)) for row in values]
    assert predict(values).tolist() == expected


def test_predict_rejects_non_finite():
    with pytest.raises(ContractError):
        predict(np.array([[0.0, np.inf]]))


def test_encode_taps(batch, params, cfg):
    encoder = encode(batch, params, "encoder")
    expected = np.stack([p.speech.tokens.data.mean(axis=0) for p in batch])
    assert np.allclose(encoder[Modality.SPEECH], expected, atol=1e-12)

    pooled = encode(batch, params, "pooled")
    assert np.allclose(np.linalg.norm(pooled[Modality.TEXT], axis=1), 1.0, atol=1e-12)

    post = encode(batch, params, "post_alignment")
    logits, _ = forward(batch, params)
    features = np.concatenate([post[Modality.SPEECH], post[Modality.TEXT]], axis=1)
    expected_logits = features @ params.classifier.weight.data + params.classifier.bias.data
    assert np.allclose(logits.data, expected_logits, atol=1e-12)

    with pytest.raises(ConfigError):
        encode(batch, params, "decoder")


def test_gradients_of_the_total_loss():
    cfg = PipelineConfig(model_dim=4, num_heads=2, n_blocks=1, tau=0.2)
    params = build_pipeline_params(cfg, seed=5)
    batch = _batch(np.random.default_rng(5), [(3, 2), (2, 3), (3, 2)], 4, scale=0.5)
    error = grad_check(lambda: forward(batch, params)[1].total, params.store, max_checks_per_param=6)
    print(error)
    assert error < 1e-4
