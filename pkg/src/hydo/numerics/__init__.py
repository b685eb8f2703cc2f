"""Dense-array math, reverse-mode differentiation, MLPs, Adam, RNG."""

from .adam import AdamState, TrainingFault, adam_step
from .nets import MlpParams, init_mlp, mlp_forward
from .rng import RngStream, seeded_rng
from .serialize import ContainerError, read_container, write_container
from .tensor import (
    GraphError,
    NonFiniteError,
    Tensor,
    as_tensor,
    backward,
    concat,
    gaussian_log_prob,
    no_grad,
    set_strict_finite,
    softmax,
)

__all__ = [
    "AdamState",
    "ContainerError",
    "GraphError",
    "MlpParams",
    "NonFiniteError",
    "RngStream",
    "Tensor",
    "TrainingFault",
    "adam_step",
    "as_tensor",
    "backward",
    "concat",
    "gaussian_log_prob",
    "init_mlp",
    "mlp_forward",
    "no_grad",
    "read_container",
    "seeded_rng",
    "set_strict_finite",
    "softmax",
    "write_container",
]
