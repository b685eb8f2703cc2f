"""Actor objective for stochastic policy heads via pathwise differentiation."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..diffusion import SamplingFault
from ..numerics import RngStream, Tensor

__all__ = ["actor_loss_diffusion"]


def actor_loss_diffusion(
    head,
    features: Tensor,
    q_fn: Callable[[Tensor, Tensor], Tensor],
    temps,
    rng: RngStream | None,
    **sample_overrides,
) -> tuple[Tensor, dict[str, float]]:
    """mean[-Q(s, a0) + alpha * log-prob of the sampled path].

    Fresh chains are drawn per call with reparameterized noise, so the
    gradient flows through both the Q term and the path densities.
    ``q_fn(features, actions)`` must return one value per row from the
    first online critic (or any differentiable stand-in).
    """
    sample = head.sample(features, rng, **sample_overrides)
    if not np.all(np.isfinite(sample.action.data)):
        bad = np.where(~np.isfinite(sample.action.data).all(axis=1))[0]
        raise SamplingFault(f"non-finite sampled action at batch index {bad[0]}")
    q_values = q_fn(features, sample.action)
    loss = (sample.log_prob * temps.alpha_motion - q_values).mean()
    info = {
        "actor_loss": float(loss.data),
        "mean_chain_logp": float(sample.log_prob.data.mean()),
        "mean_q": float(q_values.data.mean()),
    }
    return loss, info
