"""
Parameter store module.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List

import numpy as np

from ..logger import get_logger
from .exceptions import ContractError, DimensionError
from .tensor import Tensor


class InitScheme(Enum):
    """Initialization schemes for registered parameters."""

    FAN_IN = "fan_in"  # uniform in [-1/sqrt(Din), +1/sqrt(Din)]
    ZEROS = "zeros"


class ParameterStore:
    """Named, ordered, seeded collection of trainable tensors."""

    def __init__(self, rng_seed: int):
        self.logger = get_logger(self.__class__.__name__)
        self.rng_seed = int(rng_seed)
        self._rng = np.random.default_rng(self.rng_seed)
        self._parameters: Dict[str, Tensor] = {}
        self._schemes: Dict[str, InitScheme] = {}

    # region Container protocol
    def __getitem__(self, name: str) -> Tensor:
        return self._parameters[name]

    def __contains__(self, name: str) -> bool:
        return name in self._parameters

    def __iter__(self) -> Iterator[str]:
        return iter(self._parameters)

    def __len__(self) -> int:
        return len(self._parameters)

    def names(self) -> List[str]:
        return list(self._parameters)

    def items(self):
        return self._parameters.items()

    def parameters(self) -> List[Tensor]:
        return list(self._parameters.values())

    @property
    def num_elements(self) -> int:
        return sum(p.size for p in self._parameters.values())

    # endregion

    def _draw(self, shape: tuple, scheme: InitScheme) -> np.ndarray:
        if scheme is InitScheme.ZEROS or len(shape) < 2:
            return np.zeros(shape)
        bound = 1.0 / np.sqrt(shape[0])
        return self._rng.uniform(-bound, bound, size=shape)

    def register(
        self, name: str, shape: tuple, scheme: InitScheme = InitScheme.FAN_IN
    ) -> Tensor:
        """Create and initialize a parameter; names must be unique."""
        if name in self._parameters:
            error_string = f"Parameter '{name}' is already registered."
            self.logger.error(error_string)
            raise ContractError(error_string)
        shape = tuple(int(extent) for extent in shape)
        parameter = Tensor(self._draw(shape, scheme), requires_grad=True, name=name)
        self._parameters[name] = parameter
        self._schemes[name] = scheme
        self.logger.debug(f"Registered parameter {name} with shape {shape}.")
        return parameter

    def reinitialize(self) -> None:
        """Redraw every parameter from the seed, in registration order."""
        self._rng = np.random.default_rng(self.rng_seed)
        for name, parameter in self._parameters.items():
            parameter.data[...] = self._draw(parameter.shape, self._schemes[name])
            parameter.zero_grad()
        self.logger.info(f"Re-initialized {len(self)} parameters from seed {self.rng_seed}.")

    def zero_grad(self) -> None:
        for parameter in self._parameters.values():
            parameter.zero_grad()

    def gradients(self) -> Dict[str, np.ndarray]:
        """Gradients by name; unreached parameters get zeros."""
        return {
            name: (p.grad if p.grad is not None else np.zeros_like(p.data))
            for name, p in self._parameters.items()
        }

    def snapshot(self) -> Dict[str, np.ndarray]:
        """Copies of all parameter values, in store order."""
        return {name: p.data.copy() for name, p in self._parameters.items()}

    def load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        """Overwrite parameter values in place; names and shapes must match."""
        if list(arrays) != self.names():
            error_string = "Parameter names or order do not match the store."
            self.logger.error(error_string)
            raise ContractError(error_string)
        for name, values in arrays.items():
            parameter = self._parameters[name]
            if tuple(values.shape) != parameter.shape:
                error_string = (
                    f"Shape mismatch for {name}: {values.shape} vs {parameter.shape}."
                )
                self.logger.error(error_string)
                raise DimensionError(error_string)
            parameter.data[...] = values

    def copy(self) -> "ParameterStore":
        """Independent store with the same names, schemes, seed and values."""
        clone = ParameterStore(self.rng_seed)
        for name, parameter in self._parameters.items():
            clone._parameters[name] = Tensor(parameter.data, requires_grad=True, name=name)
            clone._schemes[name] = self._schemes[name]
        return clone


@dataclass
class LinearParams:
    """Weight (Din x Dout) and optional bias (Dout) of an affine layer."""

    weight: Tensor
    bias: Tensor | None = None

    @property
    def in_features(self) -> int:
        return self.weight.shape[0]

    @property
    def out_features(self) -> int:
        return self.weight.shape[1]


def register_linear(
    store: ParameterStore, prefix: str, in_features: int, out_features: int, bias: bool = True
) -> LinearParams:
    """Register a fan-in initialized weight and a zero bias under a prefix."""
    weight = store.register(f"{prefix}.weight", (in_features, out_features))
    bias_tensor = (
        store.register(f"{prefix}.bias", (out_features,), InitScheme.ZEROS) if bias else None
    )
    return LinearParams(weight, bias_tensor)
