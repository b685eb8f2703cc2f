"""Entropy-temperature state and its dual update.

Temperatures live as log-values so they stay positive under any update
sequence; each has its own Adam state. Auto-tuning can be switched off per
temperature, in which case the value is simply held.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics import AdamState, Tensor, adam_step

__all__ = ["TemperatureState", "update_temperature"]


@dataclass
class TemperatureState:
    log_alpha_motion: Tensor
    log_alpha_location: Tensor
    target_motion_entropy: float
    target_location_entropy: float
    motion_auto: bool = True
    location_auto: bool = True
    opt_motion: AdamState = field(default_factory=lambda: AdamState(lr=3e-4))
    opt_location: AdamState = field(default_factory=lambda: AdamState(lr=3e-4))

    @classmethod
    def build(
        cls,
        alpha_motion: float,
        alpha_location: float,
        target_motion_entropy: float,
        target_location_entropy: float,
        motion_auto: bool = True,
        location_auto: bool = True,
        lr: float = 3e-4,
    ) -> TemperatureState:
        return cls(
            log_alpha_motion=Tensor(np.log(alpha_motion), requires_grad=True),
            log_alpha_location=Tensor(np.log(alpha_location), requires_grad=True),
            target_motion_entropy=target_motion_entropy,
            target_location_entropy=target_location_entropy,
            motion_auto=motion_auto,
            location_auto=location_auto,
            opt_motion=AdamState(lr=lr),
            opt_location=AdamState(lr=lr),
        )

    @property
    def alpha_motion(self) -> float:
        return float(np.exp(self.log_alpha_motion.data))

    @property
    def alpha_location(self) -> float:
        return float(np.exp(self.log_alpha_location.data))


def _dual_step(log_alpha: Tensor, opt: AdamState, mean_logp: float, target: float) -> float:
    # loss alpha * (entropy - target) with entropy = -mean_logp;
    # d/d(log alpha) = alpha * (entropy - target)
    alpha = float(np.exp(log_alpha.data))
    grad = alpha * (-mean_logp - target)
    adam_step({"log_alpha": log_alpha}, {"log_alpha": np.asarray(grad)}, opt)
    return alpha * (-mean_logp - target)


def update_temperature(
    mean_chain_logp: float,
    mean_loc_logp: float,
    temps: TemperatureState,
) -> dict[str, float]:
    """Dual gradient step per enabled temperature; returns the losses."""
    info = {"motion_temp_loss": 0.0, "location_temp_loss": 0.0}
    if temps.motion_auto:
        info["motion_temp_loss"] = _dual_step(
            temps.log_alpha_motion, temps.opt_motion, mean_chain_logp, temps.target_motion_entropy
        )
    if temps.location_auto:
        info["location_temp_loss"] = _dual_step(
            temps.log_alpha_location, temps.opt_location, mean_loc_logp,
            temps.target_location_entropy,
        )
    return info
