"""
Gradient check module.

Compares reverse-mode gradients with central finite differences.
"""

from typing import Callable, Sequence

import numpy as np

from ..logger import get_logger
from .exceptions import ContractError
from .parameter_store import ParameterStore
from .tensor import Tensor, backward, no_grad

logger = get_logger(__name__)

# Floor of the relative-error denominator
DENOMINATOR_FLOOR = 1e-8


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| / max(|a|, |n|, 1e-8)."""
    denominator = max(abs(analytic), abs(numeric), DENOMINATOR_FLOOR)
    return abs(analytic - numeric) / denominator


def grad_check(
    f: Callable[[], Tensor],
    params: Sequence[Tensor] | ParameterStore,
    h: float = 1e-4,
    max_checks_per_param: int | None = None,
    seed: int = 0,
) -> float:
    """
    Return the max relative error between analytic and numeric gradients.

    :param f: Evaluates a scalar loss from the current parameter values.
    :param params: Tensors perturbed in place, one element at a time.
    :param h: Finite-difference step.
    :param max_checks_per_param: Check at most this many elements of each
        parameter, chosen with a seeded generator; None checks every element.
    :param seed: Seed of the element sampler.
    """
    if h <= 0:
        raise ContractError(f"Finite-difference step must be positive, got {h}.")
    if isinstance(params, ParameterStore):
        params = params.parameters()

    for parameter in params:
        parameter.zero_grad()
    backward(f())
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]

    rng = np.random.default_rng(seed)
    worst = 0.0
    with no_grad():
        for parameter, gradient in zip(params, analytic):
            indices = np.arange(parameter.size)
            if max_checks_per_param is not None and parameter.size > max_checks_per_param:
                indices = np.sort(rng.choice(parameter.size, max_checks_per_param, replace=False))
            for index in indices:
                original = parameter.data.flat[index]
                parameter.data.flat[index] = original + h
                plus = f().item()
                parameter.data.flat[index] = original - h
                minus = f().item()
                parameter.data.flat[index] = original
                numeric = (plus - minus) / (2.0 * h)
                error = relative_error(float(gradient.flat[index]), numeric)
                if error > worst:
                    worst = error
                    logger.debug(
                        f"New worst error {error:.3e} at {parameter.name}[{index}] "
                        f"(analytic {gradient.flat[index]:.6e}, numeric {numeric:.6e})"
                    )

    for parameter in params:
        parameter.zero_grad()
    logger.info(f"Gradient check over {len(params)} tensors: max relative error {worst:.3e}")
    return worst
