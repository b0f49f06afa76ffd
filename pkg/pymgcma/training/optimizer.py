"""
Adam optimizer with bias correction.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..core.exceptions import DimensionError
from ..core.parameter_store import ParameterStore
from ..logger import get_logger

logger = get_logger(__name__)


@dataclass
class AdamState:
    """First/second moment estimates by parameter name and the step count."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(
    params: Dict[str, np.ndarray] | ParameterStore,
    grads: Dict[str, np.ndarray],
    state: AdamState,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """
    Apply one Adam update in place.

    m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
    """
    arrays = (
        {name: p.data for name, p in params.items()}
        if isinstance(params, ParameterStore)
        else params
    )
    state.step += 1
    first_correction = 1.0 - beta1**state.step
    second_correction = 1.0 - beta2**state.step

    for name, values in arrays.items():
        gradient = grads[name]
        if gradient.shape != values.shape:
            error_string = f"Gradient of {name} has shape {gradient.shape}, expected {values.shape}."
            logger.error(error_string)
            raise DimensionError(error_string)
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - beta1) * gradient if m is None else beta1 * m + (1.0 - beta1) * gradient
        v = (1.0 - beta2) * gradient * gradient if v is None else beta2 * v + (1.0 - beta2) * gradient * gradient
        state.m[name], state.v[name] = m, v

        m_hat = m / first_correction
        v_hat = v / second_correction
        values -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return state
