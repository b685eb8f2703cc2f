"""Policy heads mapping per-row features to bounded actions.

All heads return a sample object with ``action`` (rows x action dim,
clipped to [-1, 1]) and ``log_prob`` (one value per row); the stochastic
ones sample by reparameterization so losses differentiate through the
draw. The diffusion and consistency heads return the full chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..diffusion import (
    BetaSchedule,
    ConsistencyHead,
    DiffusionChain,
    consistency_sample,
    ddpm_sample_chain,
)
from ..numerics import MlpParams, RngStream, Tensor, init_mlp, mlp_forward

__all__ = [
    "ActionSample",
    "DdpmHead",
    "CmHead",
    "SquashedGaussianHead",
    "DeterministicHead",
    "build_head",
]

LOG_STD_MIN, LOG_STD_MAX = -5.0, 2.0
_TANH_EPS = 1e-9


@dataclass
class ActionSample:
    action: Tensor
    log_prob: Tensor


def _as_sample(chain: DiffusionChain) -> ActionSample:
    sample = ActionSample(action=chain.action, log_prob=chain.total_log_prob)
    sample.chain = chain
    return sample


@dataclass
class DdpmHead:
    denoiser: MlpParams
    schedule: BetaSchedule
    latent_skip: float = 1.0  # step mean = latent + residual net output

    @property
    def action_dim(self) -> int:
        return self.denoiser.out_width

    def named_params(self) -> dict[str, Tensor]:
        return self.denoiser.named_params()

    def sample(self, features: Tensor, rng: RngStream | None, **overrides) -> ActionSample:
        return _as_sample(
            ddpm_sample_chain(
                self.denoiser, features, self.schedule, rng,
                latent_skip=self.latent_skip, **overrides,
            )
        )


@dataclass
class CmHead:
    head: ConsistencyHead

    @property
    def action_dim(self) -> int:
        return self.head.net.out_width

    def named_params(self) -> dict[str, Tensor]:
        return self.head.net.named_params()

    def sample(self, features: Tensor, rng: RngStream | None, **overrides) -> ActionSample:
        return _as_sample(consistency_sample(self.head, features, rng, **overrides))


@dataclass
class SquashedGaussianHead:
    """Tanh-squashed Gaussian with state-dependent mean and scale."""

    net: MlpParams  # outputs [mean, raw log-std] per action dim

    @property
    def action_dim(self) -> int:
        return self.net.out_width // 2

    def named_params(self) -> dict[str, Tensor]:
        return self.net.named_params()

    def sample(self, features: Tensor, rng: RngStream | None, noise: np.ndarray | None = None) -> ActionSample:
        d = self.action_dim
        out = mlp_forward(self.net, features)
        mean = out[:, :d]
        log_std = out[:, d:].tanh() * 0.5 * (LOG_STD_MAX - LOG_STD_MIN) + 0.5 * (
            LOG_STD_MAX + LOG_STD_MIN
        )
        std = log_std.exp()
        eps = noise if noise is not None else rng.normal((features.shape[0], d))
        u = mean + std * Tensor(eps)
        action = u.tanh()
        # change of variables through tanh
        base = (
            Tensor(np.full(u.shape, -0.5 * math.log(2.0 * math.pi)))
            - log_std
            - ((u - mean) * (u - mean)) / (std * std * 2.0)
        )
        correction = (1.0 - action * action + _TANH_EPS).log()
        log_prob = (base - correction).sum(axis=1)
        return ActionSample(action=action, log_prob=log_prob)

    def log_density(self, features: Tensor, actions: np.ndarray) -> np.ndarray:
        """Density of given (pre-sampled) actions; diagnostic only."""
        from ..numerics import no_grad

        with no_grad():
            d = self.action_dim
            out = mlp_forward(self.net, features)
            mean = out.data[:, :d]
            log_std = np.tanh(out.data[:, d:]) * 0.5 * (LOG_STD_MAX - LOG_STD_MIN) + 0.5 * (
                LOG_STD_MAX + LOG_STD_MIN
            )
        std = np.exp(log_std)
        u = np.arctanh(np.clip(actions, -1 + 1e-12, 1 - 1e-12))
        base = -0.5 * math.log(2 * math.pi) - log_std - (u - mean) ** 2 / (2 * std**2)
        corr = np.log(1.0 - np.tanh(u) ** 2 + _TANH_EPS)
        return (base - corr).sum(axis=1)


@dataclass
class DeterministicHead:
    """Tanh policy; exploration noise is added only when acting."""

    net: MlpParams

    @property
    def action_dim(self) -> int:
        return self.net.out_width

    def named_params(self) -> dict[str, Tensor]:
        return self.net.named_params()

    def sample(
        self,
        features: Tensor,
        rng: RngStream | None = None,
        noise_scale: float = 0.0,
    ) -> ActionSample:
        action = mlp_forward(self.net, features).tanh()
        if noise_scale > 0.0:
            eps = rng.normal((features.shape[0], self.action_dim))
            action = (action + Tensor(noise_scale * eps)).clip_straight_through(-1.0, 1.0, band=0.0)
        rows = features.shape[0]
        return ActionSample(action=action, log_prob=Tensor(np.zeros(rows)))


def build_head(
    kind: str,
    feature_dim: int,
    action_dim: int,
    width: int,
    layers: int,
    rng: RngStream,
    schedule: BetaSchedule | None = None,
    cm_options: dict | None = None,
):
    """Construct a policy head; diffusion-style heads start at the zero map
    so their initial action distribution is symmetric about zero."""
    hidden = [width] * layers
    if kind == "ddpm":
        net = init_mlp([feature_dim + action_dim + 1, *hidden, action_dim], rng,
                       name="denoiser", zero_final=True)
        return DdpmHead(denoiser=net, schedule=schedule)
    if kind == "cm":
        net = init_mlp([feature_dim + action_dim + 1, *hidden, action_dim], rng,
                       name="denoiser", zero_final=True)
        return CmHead(head=ConsistencyHead(net=net, **(cm_options or {})))
    if kind == "gaussian":
        net = init_mlp([feature_dim, *hidden, 2 * action_dim], rng, name="pi")
        return SquashedGaussianHead(net=net)
    if kind == "deterministic":
        net = init_mlp([feature_dim, *hidden, action_dim], rng, name="pi")
        return DeterministicHead(net=net)
    raise ValueError(f"unknown head kind {kind!r}")
