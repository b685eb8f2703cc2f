"""Denoising-chain and consistency-model policy heads."""

from .consistency import (
    ConsistencyHead,
    consistency_parameterize,
    consistency_sample,
    inference_times,
)
from .ddpm import CLIP_BAND, DiffusionChain, SamplingFault, chain_log_prob, ddpm_sample_chain
from .schedule import BetaSchedule, ScheduleError, make_beta_schedule

__all__ = [
    "BetaSchedule",
    "CLIP_BAND",
    "ConsistencyHead",
    "DiffusionChain",
    "SamplingFault",
    "ScheduleError",
    "chain_log_prob",
    "consistency_parameterize",
    "consistency_sample",
    "ddpm_sample_chain",
    "inference_times",
    "make_beta_schedule",
]
