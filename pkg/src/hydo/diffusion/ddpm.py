"""Reverse-chain sampling with per-step Gaussian log-densities.

The denoiser predicts the next-step mean directly from (features, current
latent, step index). Every latent is produced by a reparameterized draw,
so losses built on the chain differentiate through the whole sampled path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..numerics import MlpParams, RngStream, Tensor, concat, gaussian_log_prob, mlp_forward
from .schedule import BetaSchedule

__all__ = ["DiffusionChain", "SamplingFault", "ddpm_sample_chain", "chain_log_prob", "CLIP_BAND"]

CLIP_BAND = 0.1


class SamplingFault(RuntimeError):
    """Non-finite values appeared while sampling; message carries the step."""


@dataclass
class DiffusionChain:
    """Sampled latents a^K..a^0 with their step log-densities.

    ``latents[0]`` is the initial noise a^K and ``latents[-1]`` the pre-clip
    a^0; ``action`` is a^0 clipped to [-1, 1] with straight-through
    gradients. ``step_log_probs[j]`` is the density of ``latents[j+1]``
    given ``latents[j]``, one scalar per row.
    """

    latents: list[Tensor]
    means: list[Tensor]
    step_log_probs: list[Tensor]
    total_log_prob: Tensor | None
    action: Tensor | None

    @property
    def k_steps(self) -> int:
        return len(self.step_log_probs)

    @property
    def complete(self) -> bool:
        return self.total_log_prob is not None and self.action is not None


def _check_finite(arr: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(arr)):
        raise SamplingFault(f"non-finite latent at denoising step {step}")


def _denoiser_input(features: Tensor, latent: Tensor, step_frac: float) -> Tensor:
    rows = latent.shape[0]
    tag = Tensor(np.full((rows, 1), step_frac))
    return concat([features, latent, tag], axis=1)


def ddpm_sample_chain(
    denoiser: MlpParams,
    state_features: Tensor,
    schedule: BetaSchedule,
    rng: RngStream | None,
    prior: np.ndarray | None = None,
    noise: Sequence[np.ndarray] | None = None,
    latent_skip: float = 0.0,
) -> DiffusionChain:
    """Sample one chain per feature row.

    ``prior`` and ``noise`` override the random draws (tests freeze them);
    otherwise ``rng`` supplies a^K ~ N(0, I) and one epsilon per step.
    With ``latent_skip`` s, the step mean is s * a^k plus the network
    output, so a zero-initialized network starts as an identity chain that
    keeps the prior's spread (and with it, multimodal reach).
    """
    if not np.all(np.isfinite(state_features.data)):
        raise SamplingFault("non-finite state features")
    k_total = schedule.k_steps
    rows = state_features.shape[0]
    dim = denoiser.out_width

    if prior is None:
        prior = rng.normal((rows, dim))
    latent = Tensor(np.asarray(prior, dtype=np.float64))
    _check_finite(latent.data, k_total)

    latents = [latent]
    means: list[Tensor] = []
    logps: list[Tensor] = []
    for i, k in enumerate(range(k_total, 0, -1)):
        beta_k = schedule.beta(k)
        mean = mlp_forward(denoiser, _denoiser_input(state_features, latent, k / k_total))
        if latent_skip != 0.0:
            mean = mean + latent * latent_skip
        eps = noise[i] if noise is not None else rng.normal((rows, dim))
        latent = mean + Tensor(np.sqrt(beta_k) * eps)
        _check_finite(latent.data, k - 1)
        logps.append(gaussian_log_prob(latent, mean, beta_k, axis=1))
        means.append(mean)
        latents.append(latent)

    total = logps[0]
    for term in logps[1:]:
        total = total + term
    action = latent.clip_straight_through(-1.0, 1.0, band=CLIP_BAND)
    return DiffusionChain(
        latents=latents,
        means=means,
        step_log_probs=logps,
        total_log_prob=total,
        action=action,
    )


def chain_log_prob(chain: DiffusionChain) -> Tensor:
    """Total log-density of the sampled path; differentiable."""
    if not chain.complete:
        raise ValueError("chain is incomplete")
    return chain.total_log_prob
