# pymgcma/tests/core/test_tensor.py

"""
Tensor arithmetic and reverse-mode differentiation tests.
"""

import math

import numpy as np
import pytest

from pymgcma.core import (
    ContractError,
    DegenerateInputError,
    DimensionError,
    EmptyInputError,
    NonFiniteError,
    Tensor,
    backward,
    concat,
    l2_normalize,
    layer_norm,
    linear,
    log_softmax_rows,
    matmul,
    mean_pool,
    no_grad,
    softmax_rows,
    stack,
)


@pytest.fixture(scope="module")
def rng():
    """Seeded generator shared by the oracle tests."""
    return np.random.default_rng(7)


def test_matmul_identity():
    """Identity times b is b."""
    b = Tensor([[1.5, -2.0], [0.25, 4.0]])
    assert np.array_equal(matmul(Tensor(np.eye(2)), b).data, b.data)


def test_matmul_hand_case():
    """[[1,2],[3,4]] @ [[1],[1]] = [[3],[7]]."""
    out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[1.0], [1.0]]))
    assert out.data.tolist() == [[3.0], [7.0]]


def test_matmul_triple_loop_oracle(rng):
    """Random 3x4 @ 4x2 against an fsum triple loop."""
    a = rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 2))
    out = matmul(Tensor(a), Tensor(b)).data
    for i in range(3):
        for j in range(2):
            expected = math.fsum(a[i, k] * b[k, j] for k in range(4))
            assert abs(out[i, j] - expected) < 1e-12


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_softmax_uniform_row():
    out = softmax_rows(Tensor([[0.0, 0.0, 0.0, 0.0]]))
    assert np.allclose(out.data, 0.25, rtol=0, atol=1e-12)


@pytest.mark.parametrize("shift", [-1000.0, 0.0, 3.5, 1e4])
def test_softmax_shift_invariance(shift):
    """[c, c + ln 3] -> [0.25, 0.75] for any c."""
    out = softmax_rows(Tensor([[shift, shift + math.log(3.0)]])).data[0]
    assert abs(out[0] - 0.25) < 1e-12
    assert abs(out[1] - 0.75) < 1e-12


def test_softmax_direct_oracle():
    out = softmax_rows(Tensor([[1.0, 2.0, 3.0]])).data[0]
    total = math.fsum(math.exp(v) for v in (1.0, 2.0, 3.0))
    for value, logit in zip(out, (1.0, 2.0, 3.0)):
        assert abs(value - math.exp(logit) / total) < 1e-12


def test_softmax_rows_sum_to_one_for_large_values(rng):
    """Rows with entries up to +-1e4 stay finite and normalized."""
    x = rng.uniform(-1e4, 1e4, size=(6, 5))
    out = softmax_rows(Tensor(x)).data
    assert np.all(out >= 0)
    assert np.allclose(out.sum(axis=1), 1.0, rtol=0, atol=1e-12)


def test_log_softmax_matches_log_of_softmax(rng):
    x = Tensor(rng.standard_normal((4, 3)))
    assert np.allclose(log_softmax_rows(x).data, np.log(softmax_rows(x).data), atol=1e-12)


def test_linear_identity():
    x = Tensor([[1.0, -2.0, 3.0]])
    out = linear(x, Tensor(np.eye(3)), Tensor(np.zeros(3)))
    assert np.array_equal(out.data, x.data)


def test_linear_hand_case():
    """x=[1,1], W=[[2],[3]], b=[1] -> [6]."""
    out = linear(Tensor([1.0, 1.0]), Tensor([[2.0], [3.0]]), Tensor([1.0]))
    assert out.shape == (1,)
    assert out.data.tolist() == [6.0]


def test_linear_random_oracle(rng):
    x, w, b = rng.standard_normal((2, 3)), rng.standard_normal((3, 4)), rng.standard_normal(4)
    out = linear(Tensor(x), Tensor(w), Tensor(b)).data
    for i in range(2):
        for j in range(4):
            expected = math.fsum([x[i, k] * w[k, j] for k in range(3)] + [b[j]])
            assert abs(out[i, j] - expected) < 1e-12


def test_linear_shape_mismatch():
    with pytest.raises(DimensionError):
        linear(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))


def test_mean_pool_cases(rng):
    assert mean_pool(Tensor([[1.0, 2.0, 3.0]])).data.tolist() == [1.0, 2.0, 3.0]
    assert mean_pool(Tensor([[0.0, 2.0], [2.0, 0.0]])).data.tolist() == [1.0, 1.0]
    x = rng.standard_normal((5, 3))
    out = mean_pool(Tensor(x)).data
    for j in range(3):
        assert abs(out[j] - math.fsum(x[:, j]) / 5) < 1e-12


def test_mean_pool_empty_sequence():
    with pytest.raises(EmptyInputError):
        mean_pool(Tensor(np.zeros((0, 3))))


def test_l2_normalize_cases(rng):
    assert np.allclose(l2_normalize(Tensor([3.0, 4.0])).data, [0.6, 0.8], atol=1e-12)
    unit = np.array([0.0, 1.0, 0.0])
    assert np.allclose(l2_normalize(Tensor(unit)).data, unit, atol=1e-12)
    v = l2_normalize(Tensor(rng.standard_normal(9))).data
    assert abs(math.sqrt(math.fsum(v * v)) - 1.0) < 1e-12


def test_l2_normalize_zero_vector():
    with pytest.raises(DegenerateInputError):
        l2_normalize(Tensor(np.zeros(4)))


def test_backward_needs_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractError):
        backward(x * 2.0)


def test_backward_is_deterministic(rng):
    """Two passes over one graph from zeroed leaves give identical gradients."""
    w = Tensor(rng.standard_normal((4, 3)), requires_grad=True)
    x = Tensor(rng.standard_normal((5, 4)))
    loss = log_softmax_rows(matmul(x, w).tanh()).sum()

    backward(loss)
    first = w.grad.copy()
    w.zero_grad()
    backward(loss)
    assert np.array_equal(first, w.grad)


def test_leaf_gradients_accumulate():
    x = Tensor([2.0], requires_grad=True)
    backward((x * x).sum())
    backward((x * x).sum())
    assert x.grad.tolist() == [8.0]


def test_broadcast_gradient_is_summed():
    """A bias added to every row collects the row count."""
    x = Tensor(np.ones((3, 4)))
    b = Tensor(np.zeros(4), requires_grad=True)
    backward((x + b).sum())
    assert b.grad.tolist() == [3.0] * 4


def test_indexing_gradient_with_repeats():
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    backward(x[np.array([0, 0, 1])].sum())
    assert x.grad.tolist() == [2.0, 1.0, 0.0]


def test_concat_and_stack_route_gradients():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((2, 3)), requires_grad=True)
    backward((concat([a, b], axis=-1) * 2.0).sum())
    assert np.array_equal(a.grad, np.full((2, 2), 2.0))
    assert np.array_equal(b.grad, np.full((2, 3), 2.0))

    c = Tensor([1.0, 2.0], requires_grad=True)
    d = Tensor([3.0, 4.0], requires_grad=True)
    stacked = stack([c, d])
    assert stacked.shape == (2, 2)
    backward((stacked * Tensor([[1.0, 1.0], [5.0, 5.0]])).sum())
    assert c.grad.tolist() == [1.0, 1.0]
    assert d.grad.tolist() == [5.0, 5.0]


def test_stack_needs_equal_shapes():
    with pytest.raises(DimensionError):
        stack([Tensor(np.ones(2)), Tensor(np.ones(3))])


def test_non_finite_values_are_rejected():
    with pytest.raises(NonFiniteError):
        Tensor([1.0, np.nan])
    with pytest.raises(NonFiniteError):
        Tensor([0.0]).log()


def test_no_grad_skips_the_graph():
    x = Tensor([1.0], requires_grad=True)
    with no_grad():
        y = x * 3.0
    assert not y.requires_grad
    assert (x * 3.0).requires_grad


def test_item_needs_single_element():
    assert Tensor([[2.5]]).item() == 2.5
    with pytest.raises(ContractError):
        Tensor([1.0, 2.0]).item()


def test_layer_norm_rows(rng):
    out = layer_norm(Tensor(rng.standard_normal((3, 6)) * 5.0 + 2.0)).data
    assert np.allclose(out.mean(axis=-1), 0.0, atol=1e-12)
    assert np.allclose(out.var(axis=-1), 1.0, atol=1e-4)


def test_softplus_is_stable():
    out = Tensor([-800.0, 0.0, 800.0]).softplus().data
    assert out[0] == pytest.approx(0.0, abs=1e-300)
    assert out[1] == pytest.approx(math.log(2.0), abs=1e-15)
    assert out[2] == pytest.approx(800.0, rel=1e-15)


def test_scalars_and_full_reductions_are_zero_dimensional():
    """Losses built from full reductions stay 0-d so backward accepts them."""
    assert Tensor(3.0).ndim == 0
    assert Tensor(0.0).shape == ()
    x = Tensor(np.ones(3), requires_grad=True)
    total = x.sum()
    assert total.ndim == 0
    assert x.mean().ndim == 0
    backward(total)
    assert x.grad.tolist() == [1.0, 1.0, 1.0]
