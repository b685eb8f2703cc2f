"""Hybrid diffusion-policy reinforcement learning at desk scale."""

__version__ = "0.1.0"
