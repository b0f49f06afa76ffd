# pymgcma/core/__init__.py

"""
Numerical core: tensors, reverse-mode differentiation, parameters.
"""

from .exceptions import (
    CheckpointError,
    ConfigError,
    ContractError,
    DatasetError,
    DegenerateInputError,
    DimensionError,
    EmptyInputError,
    ExitCode,
    FeatureCorruptionError,
    FeatureFormatError,
    MGCMAError,
    NonFiniteError,
    UnknownVariantError,
    to_exit_code,
)
from .grad_check import grad_check, relative_error
from .parameter_store import InitScheme, LinearParams, ParameterStore, register_linear
from .tensor import (
    Tensor,
    as_tensor,
    backward,
    concat,
    layer_norm,
    l2_normalize,
    linear,
    log_softmax_rows,
    matmul,
    mean_pool,
    no_grad,
    softmax_rows,
    stack,
)

__all__ = [
    "Tensor",
    "as_tensor",
    "backward",
    "concat",
    "stack",
    "matmul",
    "linear",
    "softmax_rows",
    "log_softmax_rows",
    "mean_pool",
    "l2_normalize",
    "layer_norm",
    "no_grad",
    "grad_check",
    "relative_error",
    "ParameterStore",
    "InitScheme",
    "LinearParams",
    "register_linear",
    "ExitCode",
    "to_exit_code",
    "MGCMAError",
    "DimensionError",
    "EmptyInputError",
    "DegenerateInputError",
    "ContractError",
    "NonFiniteError",
    "FeatureFormatError",
    "FeatureCorruptionError",
    "CheckpointError",
    "DatasetError",
    "ConfigError",
    "UnknownVariantError",
]
