"""Consistency-model head: boundary-anchored denoiser with few-step inference.

The denoiser output is combined with its input through time-dependent skip
coefficients so that the map is exactly the identity at the boundary time.
Multistep inference alternates denoising with fresh-noise perturbations;
those perturbation densities (plus a final small-variance draw around the
last denoised mean) give the chain its log-probability terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import MlpParams, RngStream, Tensor, concat, gaussian_log_prob, mlp_forward
from .ddpm import CLIP_BAND, DiffusionChain, SamplingFault, _check_finite

__all__ = ["ConsistencyHead", "consistency_parameterize", "consistency_sample", "inference_times"]

_RHO = 7.0  # spacing exponent for inference times


def inference_times(n_steps: int, eps: float, max_time: float) -> np.ndarray:
    """n decreasing times from max_time toward (but above) eps."""
    if n_steps < 1:
        raise ValueError("need at least one inference step")
    i = np.arange(n_steps)
    lo, hi = eps ** (1.0 / _RHO), max_time ** (1.0 / _RHO)
    return (hi + (i / n_steps) * (lo - hi)) ** _RHO


@dataclass
class ConsistencyHead:
    net: MlpParams
    eps: float = 0.002          # boundary time; f(x, eps) = x exactly
    max_time: float = 2.0
    sigma_data: float = 0.5
    n_steps: int = 5
    final_variance: float = 1e-4

    @property
    def times(self) -> np.ndarray:
        return inference_times(self.n_steps, self.eps, self.max_time)

    def skip_coeffs(self, tau: float) -> tuple[float, float]:
        d2 = self.sigma_data**2
        c_skip = d2 / ((tau - self.eps) ** 2 + d2)
        c_out = self.sigma_data * (tau - self.eps) / np.sqrt(d2 + tau**2)
        return float(c_skip), float(c_out)


def consistency_parameterize(
    raw: Tensor, x_tau: Tensor, tau: float, head: ConsistencyHead
) -> Tensor:
    """Skip-connection combination enforcing the boundary identity."""
    if not (head.eps <= tau <= head.max_time):
        raise ValueError(f"tau {tau} outside [{head.eps}, {head.max_time}]")
    c_skip, c_out = head.skip_coeffs(tau)
    return x_tau * c_skip + raw * c_out


def _denoise(head: ConsistencyHead, features: Tensor, x_tau: Tensor, tau: float) -> Tensor:
    rows = x_tau.shape[0]
    tag = Tensor(np.full((rows, 1), tau / head.max_time))
    raw = mlp_forward(head.net, concat([features, x_tau, tag], axis=1))
    return consistency_parameterize(raw, x_tau, tau, head)


def consistency_sample(
    head: ConsistencyHead,
    state_features: Tensor,
    rng: RngStream | None,
    prior: np.ndarray | None = None,
    noise: list[np.ndarray] | None = None,
) -> DiffusionChain:
    """Multistep consistency inference packaged as a diffusion chain.

    Draw x ~ N(0, T^2 I) and denoise; for each later time re-noise with a
    fresh Gaussian and denoise again; finally perturb the last denoised
    mean with the configured small variance. The chain has ``n_steps``
    stochastic transitions, mirroring the reverse-chain layout.
    """
    if not np.all(np.isfinite(state_features.data)):
        raise SamplingFault("non-finite state features")
    times = head.times
    rows = state_features.shape[0]
    dim = head.net.out_width

    if prior is None:
        prior = head.max_time * rng.normal((rows, dim))
    x = Tensor(np.asarray(prior, dtype=np.float64))
    _check_finite(x.data, head.n_steps)

    latents = [x]
    means: list[Tensor] = []
    logps: list[Tensor] = []
    denoised = _denoise(head, state_features, x, float(times[0]))
    for i, tau in enumerate(times[1:], start=1):
        var = float(tau**2 - head.eps**2)
        eps_draw = noise[i - 1] if noise is not None else rng.normal((rows, dim))
        x = denoised + Tensor(np.sqrt(var) * eps_draw)
        _check_finite(x.data, head.n_steps - i)
        logps.append(gaussian_log_prob(x, denoised, var, axis=1))
        means.append(denoised)
        latents.append(x)
        denoised = _denoise(head, state_features, x, float(tau))

    final_eps = noise[-1] if noise is not None else rng.normal((rows, dim))
    pre_clip = denoised + Tensor(np.sqrt(head.final_variance) * final_eps)
    _check_finite(pre_clip.data, 0)
    logps.append(gaussian_log_prob(pre_clip, denoised, head.final_variance, axis=1))
    means.append(denoised)
    latents.append(pre_clip)

    total = logps[0]
    for term in logps[1:]:
        total = total + term
    return DiffusionChain(
        latents=latents,
        means=means,
        step_log_probs=logps,
        total_log_prob=total,
        action=pre_clip.clip_straight_through(-1.0, 1.0, band=CLIP_BAND),
    )
