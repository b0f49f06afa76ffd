"""
Tensor module.

Dense 64-bit tensors with reverse-mode differentiation. Every operation
accepts optional leading batch axes, so an utterance (L x D) and a bucket
of utterances (N x L x D) go through the same code.
"""

import threading
from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np

from ..logger import get_logger
from .exceptions import (
    ContractError,
    DegenerateInputError,
    DimensionError,
    EmptyInputError,
    NonFiniteError,
)

logger = get_logger(__name__)

_grad_mode = threading.local()


def is_grad_enabled() -> bool:
    """Return True when new operations record the graph."""
    return getattr(_grad_mode, "enabled", True)


@contextmanager
def no_grad():
    """Evaluate without recording the graph (thread local)."""
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A float64 array that remembers how it was computed."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        array = np.array(data, dtype=np.float64)
        if not np.isfinite(array).all():
            error_string = f"Non-finite values in tensor {name or ''}".strip()
            logger.error(error_string)
            raise NonFiniteError(error_string)
        self.data = np.asarray(array, dtype=np.float64, order="C")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @classmethod
    def _result(
        cls,
        array: np.ndarray,
        parents: tuple,
        backward: Callable[[np.ndarray], None],
        op: str,
    ) -> "Tensor":
        """Wrap an operation result and attach it to the graph."""
        if not np.isfinite(array).all():
            error_string = f"Operation '{op}' produced non-finite values."
            logger.error(error_string)
            raise NonFiniteError(error_string)
        out = cls.__new__(cls)
        out.data = np.asarray(array, dtype=np.float64, order="C")
        out.grad = None
        out.name = None
        out._parents = ()
        out._backward = None
        out.requires_grad = False
        if is_grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    # region Properties
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            error_string = f"Tensor of shape {self.shape} is not a scalar."
            logger.error(error_string)
            raise ContractError(error_string)
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        """Return a copy of the data."""
        return self.data.copy()

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # endregion

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64)
        else:
            self.grad = self.grad + grad

    def zero_grad(self) -> None:
        self.grad = None

    # region Arithmetic
    def __add__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other

        def backward(grad):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(grad, b.shape))

        return Tensor._result(a.data + b.data, (a, b), backward, "add")

    def __radd__(self, other) -> "Tensor":
        return as_tensor(other) + self

    def __neg__(self) -> "Tensor":
        a = self

        def backward(grad):
            a._accumulate(-grad)

        return Tensor._result(-a.data, (a,), backward, "neg")

    def __sub__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other

        def backward(grad):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(-grad, b.shape))

        return Tensor._result(a.data - b.data, (a, b), backward, "sub")

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) - self

    def __mul__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other

        def backward(grad):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad * b.data, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(grad * a.data, b.shape))

        return Tensor._result(a.data * b.data, (a, b), backward, "mul")

    def __rmul__(self, other) -> "Tensor":
        return as_tensor(other) * self

    def __truediv__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other

        def backward(grad):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad / b.data, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(-grad * a.data / (b.data * b.data), b.shape))

        return Tensor._result(a.data / b.data, (a, b), backward, "div")

    def __rtruediv__(self, other) -> "Tensor":
        return as_tensor(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        if isinstance(exponent, Tensor):
            raise ContractError("Only constant exponents are supported.")
        a = self

        def backward(grad):
            a._accumulate(grad * exponent * a.data ** (exponent - 1))

        return Tensor._result(a.data**exponent, (a,), backward, "pow")

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    # endregion

    # region Shape
    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        a = self

        def backward(grad):
            a._accumulate(grad.reshape(a.shape))

        return Tensor._result(a.data.reshape(shape), (a,), backward, "reshape")

    def transpose(self, axis1: int = -1, axis2: int = -2) -> "Tensor":
        """Swap two axes (the last two by default)."""
        a = self

        def backward(grad):
            a._accumulate(np.swapaxes(grad, axis1, axis2))

        return Tensor._result(np.swapaxes(a.data, axis1, axis2), (a,), backward, "transpose")

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def __getitem__(self, index) -> "Tensor":
        a = self

        def backward(grad):
            full = np.zeros_like(a.data)
            np.add.at(full, index, grad)
            a._accumulate(full)

        return Tensor._result(a.data[index], (a,), backward, "index")

    # endregion

    # region Reductions
    def sum(self, axis: int | tuple | None = None, keepdims: bool = False) -> "Tensor":
        a = self

        def backward(grad):
            if axis is not None and not keepdims:
                grad = np.expand_dims(grad, axis)
            a._accumulate(np.broadcast_to(grad, a.shape))

        return Tensor._result(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward, "sum")

    def mean(self, axis: int | tuple | None = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else np.prod(
            [self.shape[ax] for ax in np.atleast_1d(axis)]
        )
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / float(count))

    # endregion

    # region Elementwise functions
    def exp(self) -> "Tensor":
        a = self
        value = np.exp(a.data)

        def backward(grad):
            a._accumulate(grad * value)

        return Tensor._result(value, (a,), backward, "exp")

    def log(self) -> "Tensor":
        a = self

        def backward(grad):
            a._accumulate(grad / a.data)

        with np.errstate(divide="ignore", invalid="ignore"):
            value = np.log(a.data)
        return Tensor._result(value, (a,), backward, "log")

    def sqrt(self) -> "Tensor":
        a = self
        with np.errstate(invalid="ignore"):
            value = np.sqrt(a.data)

        def backward(grad):
            a._accumulate(grad * 0.5 / value)

        return Tensor._result(value, (a,), backward, "sqrt")

    def tanh(self) -> "Tensor":
        a = self
        value = np.tanh(a.data)

        def backward(grad):
            a._accumulate(grad * (1.0 - value * value))

        return Tensor._result(value, (a,), backward, "tanh")

    def softplus(self) -> "Tensor":
        """ln(1 + e^x), evaluated without overflow."""
        a = self

        def backward(grad):
            # d/dx softplus = sigmoid(x)
            a._accumulate(grad * 0.5 * (1.0 + np.tanh(0.5 * a.data)))

        return Tensor._result(np.logaddexp(0.0, a.data), (a,), backward, "softplus")

    # endregion


def as_tensor(value) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


def _topological_order(root: Tensor) -> list:
    """Nodes reachable from root, parents before children, in construction order."""
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in reversed(node._parents):
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Back-propagate a scalar loss.

    Leaf gradients accumulate across calls; intermediate gradients are
    recomputed on every call, so two passes over one graph from zeroed
    leaves give bit-identical results.
    """
    if loss.ndim != 0:
        error_string = f"backward() needs a scalar loss, got shape {loss.shape}."
        logger.error(error_string)
        raise ContractError(error_string)
    if not loss.requires_grad:
        logger.debug("Loss does not depend on any parameter, nothing to do.")
        return

    order = _topological_order(loss)
    for node in order:
        if node._parents:
            node.grad = None

    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


# region Functional operations
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes, broadcasting leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        error_string = f"matmul needs operands of rank >= 2, got {a.shape} and {b.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)
    if a.shape[-1] != b.shape[-2]:
        error_string = f"matmul inner extents disagree: {a.shape} @ {b.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad @ np.swapaxes(b.data, -1, -2), a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(np.swapaxes(a.data, -1, -2) @ grad, b.shape))

    return Tensor._result(a.data @ b.data, (a, b), backward, "matmul")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate tensors along an existing axis."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise EmptyInputError("concat needs at least one tensor.")
    extents = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + extents)

    def backward(grad):
        for tensor, start, stop in zip(tensors, bounds[:-1], bounds[1:]):
            if tensor.requires_grad:
                index = [slice(None)] * grad.ndim
                index[axis] = slice(start, stop)
                tensor._accumulate(grad[tuple(index)])

    try:
        value = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        logger.error(f"concat shape mismatch: {e}")
        raise DimensionError(f"concat shape mismatch: {e}")
    return Tensor._result(value, tuple(tensors), backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Stack equally shaped tensors along a new axis."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise EmptyInputError("stack needs at least one tensor.")
    if len({t.shape for t in tensors}) != 1:
        error_string = f"stack needs equal shapes, got {[t.shape for t in tensors]}."
        logger.error(error_string)
        raise DimensionError(error_string)

    def backward(grad):
        for position, tensor in enumerate(tensors):
            if tensor.requires_grad:
                tensor._accumulate(np.take(grad, position, axis=axis))

    value = np.stack([t.data for t in tensors], axis=axis)
    return Tensor._result(value, tuple(tensors), backward, "stack")


def softmax_rows(x: Tensor) -> Tensor:
    """Softmax over the last axis with per-row max subtraction."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    value = weights / weights.sum(axis=-1, keepdims=True)

    def backward(grad):
        inner = (grad * value).sum(axis=-1, keepdims=True)
        x._accumulate(value * (grad - inner))

    return Tensor._result(value, (x,), backward, "softmax")


def log_softmax_rows(x: Tensor) -> Tensor:
    """Log-softmax over the last axis, stable for large magnitudes."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    value = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

    def backward(grad):
        x._accumulate(grad - np.exp(value) * grad.sum(axis=-1, keepdims=True))

    return Tensor._result(value, (x,), backward, "log_softmax")


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map x W + b over the last axis; x may be a vector."""
    x = as_tensor(x)
    if weight.ndim != 2 or x.shape[-1] != weight.shape[0]:
        error_string = f"linear: input {x.shape} does not match weight {weight.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)
    if bias is not None and bias.shape != (weight.shape[1],):
        error_string = f"linear: bias {bias.shape} does not match weight {weight.shape}."
        logger.error(error_string)
        raise DimensionError(error_string)

    if x.ndim == 1:
        out = matmul(x.reshape(1, -1), weight).reshape(weight.shape[1])
    else:
        out = matmul(x, weight)
    return out + bias if bias is not None else out


def mean_pool(x: Tensor) -> Tensor:
    """Arithmetic mean over the sequence axis (second to last)."""
    x = as_tensor(x)
    if x.ndim < 2:
        raise DimensionError(f"mean_pool needs a sequence, got shape {x.shape}.")
    if x.shape[-2] == 0:
        error_string = "mean_pool over an empty sequence."
        logger.error(error_string)
        raise EmptyInputError(error_string)
    return x.mean(axis=-2)


def l2_normalize(v: Tensor) -> Tensor:
    """Scale vectors (last axis) to unit Euclidean norm."""
    v = as_tensor(v)
    norms = np.sqrt((v.data * v.data).sum(axis=-1))
    if np.any(norms == 0.0):
        error_string = "l2_normalize of a zero vector."
        logger.error(error_string)
        raise DegenerateInputError(error_string)
    return v / (v * v).sum(axis=-1, keepdims=True).sqrt()


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean and unit variance (no affine)."""
    centred = x - x.mean(axis=-1, keepdims=True)
    variance = (centred * centred).mean(axis=-1, keepdims=True)
    return centred / (variance + eps).sqrt()


# endregion
