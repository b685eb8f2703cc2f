"""Noise variance schedules for the denoising chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BetaSchedule", "make_beta_schedule", "ScheduleError"]


class ScheduleError(ValueError):
    """Invalid schedule configuration."""


@dataclass(frozen=True)
class BetaSchedule:
    """Per-step variances beta_1..beta_K and cumulative alpha-bar products."""

    betas: np.ndarray        # shape (K,), increasing, in (0, 1)
    alpha_bars: np.ndarray   # alpha_bar_k = prod_{j<=k} (1 - beta_j), strictly decreasing

    @property
    def k_steps(self) -> int:
        return len(self.betas)

    def beta(self, k: int) -> float:
        """Variance for denoising step k, 1-indexed as in the chain."""
        return float(self.betas[k - 1])


def make_beta_schedule(k_steps: int, beta_min: float, beta_max: float) -> BetaSchedule:
    if k_steps < 1:
        raise ScheduleError(f"need at least one step, got {k_steps}")
    if not (0.0 < beta_min <= beta_max < 1.0):
        raise ScheduleError(f"need 0 < beta_min <= beta_max < 1, got [{beta_min}, {beta_max}]")
    if k_steps == 1:
        betas = np.array([beta_min])
    else:
        betas = np.linspace(beta_min, beta_max, k_steps)
    alpha_bars = np.cumprod(1.0 - betas)
    return BetaSchedule(betas=betas, alpha_bars=alpha_bars)
