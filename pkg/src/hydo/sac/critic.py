"""Twin critics with target copies, soft Bellman targets, polyak updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import MlpParams, RngStream, Tensor, concat, init_mlp, mlp_forward, no_grad
from .temperature import TemperatureState

__all__ = ["CriticPair", "TransitionBatch", "critic_loss", "polyak_update", "soft_target"]


@dataclass
class TransitionBatch:
    """Uniform minibatch of stored transitions."""

    observations: object
    actions: np.ndarray        # executed motion parameters, rows x d
    contact_indices: np.ndarray
    rewards: np.ndarray
    next_observations: object
    terminals: np.ndarray

    def __post_init__(self):
        n = len(self.rewards)
        if not (len(self.actions) == len(self.contact_indices) == len(self.terminals) == n):
            raise ValueError("batch field lengths differ")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("non-finite rewards in batch")


@dataclass
class CriticPair:
    q1: MlpParams
    q2: MlpParams
    target_q1: MlpParams
    target_q2: MlpParams
    polyak: float = 0.005

    @classmethod
    def build(cls, feature_dim: int, action_dim: int, width: int, layers: int,
              rng: RngStream, polyak: float = 0.005) -> CriticPair:
        widths = [feature_dim + action_dim, *([width] * layers), 1]
        q1 = init_mlp(widths, rng, name="q1")
        q2 = init_mlp(widths, rng, name="q2")
        return cls(q1=q1, q2=q2, target_q1=q1.copy("target_q1"),
                   target_q2=q2.copy("target_q2"), polyak=polyak)

    def q_value(self, net: MlpParams, features: Tensor, actions: Tensor) -> Tensor:
        rows = features.shape[0]
        return mlp_forward(net, concat([features, actions], axis=1)).reshape(rows)

    def min_target_q(self, features: Tensor, actions: Tensor) -> np.ndarray:
        with no_grad():
            t1 = self.q_value(self.target_q1, features, actions).data
            t2 = self.q_value(self.target_q2, features, actions).data
        return np.minimum(t1, t2)

    def named_online(self) -> dict[str, Tensor]:
        return {**self.q1.named_params(), **self.q2.named_params()}

    def named_target(self) -> dict[str, Tensor]:
        return {**self.target_q1.named_params(), **self.target_q2.named_params()}


def soft_target(
    rewards: np.ndarray,
    terminals: np.ndarray,
    next_min_q: np.ndarray,
    next_chain_logp: np.ndarray,
    next_loc_logp: np.ndarray,
    temps: TemperatureState,
    gamma: float,
) -> np.ndarray:
    """Entropy-regularized bootstrap target; plain arrays, never in the graph."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    cont = 1.0 - np.asarray(terminals, dtype=np.float64)
    soft_v = (
        next_min_q
        - temps.alpha_location * next_loc_logp
        - temps.alpha_motion * next_chain_logp
    )
    return np.asarray(rewards, dtype=np.float64) + cont * gamma * soft_v


def critic_loss(
    critics: CriticPair,
    features: Tensor,
    actions: Tensor,
    targets: np.ndarray,
) -> Tensor:
    """0.5 * (MSE(Q1, y) + MSE(Q2, y)); a single-critic offset of d costs d^2/2."""
    if targets.shape[0] != features.shape[0]:
        raise ValueError("targets/features length mismatch")
    y = Tensor(targets)
    d1 = critics.q_value(critics.q1, features, actions) - y
    d2 = critics.q_value(critics.q2, features, actions) - y
    return ((d1 * d1).mean() + (d2 * d2).mean()) * 0.5


def _paired_params(online: MlpParams, target: MlpParams):
    yield from zip(online.weights + online.biases, target.weights + target.biases)


def polyak_update(pairs: list[tuple[MlpParams, MlpParams]], tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, per parameter, in place.

    ``pairs`` holds (online, target) networks of identical structure.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    for online, target in pairs:
        for src, dst in _paired_params(online, target):
            if src.shape != dst.shape:
                raise ValueError("online/target parameter shapes differ")
            dst.data *= 1.0 - tau
            dst.data += tau * src.data
