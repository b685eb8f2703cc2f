"""Feedforward networks as named parameter collections."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream
from .tensor import GraphError, Tensor

__all__ = ["MlpParams", "mlp_forward", "init_mlp"]

_ACTIVATIONS = ("tanh", "relu", "identity")


@dataclass
class MlpParams:
    """Weights, biases, and per-layer activation kinds of one MLP."""

    weights: list[Tensor]
    biases: list[Tensor]
    activations: list[str]
    name: str = "mlp"

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise GraphError("layer count mismatch")
        for act in self.activations:
            if act not in _ACTIVATIONS:
                raise GraphError(f"unknown activation {act!r}")
        for i in range(len(self.weights) - 1):
            if self.weights[i].shape[1] != self.weights[i + 1].shape[0]:
                raise GraphError(
                    f"{self.name}: layer {i} output width {self.weights[i].shape[1]} "
                    f"!= layer {i + 1} input width {self.weights[i + 1].shape[0]}"
                )

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[1]

    def named_params(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"{self.name}/w{i}"] = w
            out[f"{self.name}/b{i}"] = b
        return out

    def copy(self, name: str | None = None) -> MlpParams:
        return MlpParams(
            weights=[Tensor(w.data.copy(), requires_grad=True) for w in self.weights],
            biases=[Tensor(b.data.copy(), requires_grad=True) for b in self.biases],
            activations=list(self.activations),
            name=name if name is not None else self.name,
        )


def init_mlp(
    widths: list[int],
    rng: RngStream,
    hidden_activation: str = "tanh",
    output_activation: str = "identity",
    name: str = "mlp",
    zero_final: bool = False,
) -> MlpParams:
    """Glorot-uniform init; ``zero_final`` zeroes the output layer so a
    fresh network is the identity-free zero map (used by policy heads)."""
    weights, biases, acts = [], [], []
    last = len(widths) - 2
    for i in range(len(widths) - 1):
        fan_in, fan_out = widths[i], widths[i + 1]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        if zero_final and i == last:
            w = np.zeros((fan_in, fan_out))
        else:
            w = rng.uniform(-limit, limit, (fan_in, fan_out))
        weights.append(Tensor(w, requires_grad=True))
        biases.append(Tensor(np.zeros(fan_out), requires_grad=True))
        acts.append(output_activation if i == last else hidden_activation)
    return MlpParams(weights, biases, acts, name=name)


def mlp_forward(params: MlpParams, inputs: Tensor) -> Tensor:
    """Apply the network; the op graph is recorded on the returned tensor."""
    x = inputs if isinstance(inputs, Tensor) else Tensor(inputs)
    if x.data.ndim != 2:
        raise GraphError(f"{params.name}: expected 2-D input, got {x.shape}")
    if x.shape[1] != params.in_width:
        raise GraphError(
            f"{params.name}: input width {x.shape[1]} != expected {params.in_width}"
        )
    for w, b, act in zip(params.weights, params.biases, params.activations):
        x = x @ w + b
        if act == "tanh":
            x = x.tanh()
        elif act == "relu":
            x = x.relu()
    return x
