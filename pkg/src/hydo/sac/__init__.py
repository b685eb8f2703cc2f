"""Soft actor-critic machinery specialized to diffusion policy heads."""

from .actor import actor_loss_diffusion
from .critic import CriticPair, TransitionBatch, critic_loss, polyak_update, soft_target
from .heads import (
    ActionSample,
    CmHead,
    DdpmHead,
    DeterministicHead,
    SquashedGaussianHead,
    build_head,
)
from .temperature import TemperatureState, update_temperature

__all__ = [
    "ActionSample",
    "CmHead",
    "CriticPair",
    "DdpmHead",
    "DeterministicHead",
    "SquashedGaussianHead",
    "TemperatureState",
    "TransitionBatch",
    "actor_loss_diffusion",
    "build_head",
    "critic_loss",
    "polyak_update",
    "soft_target",
    "update_temperature",
]
