"""Reproducible Wiener increments.

Trajectory ``i`` of a run seeded with ``seed`` always draws from the stream
``SeedSequence(seed, spawn_key=(i,))``; draws are made in chunks whose size
depends only on settings, so results do not depend on how an ensemble is
split across workers.
"""
from __future__ import annotations

import math

import numpy as np
from django.conf import settings

DEFAULT_CHUNK = 256


def chunk_steps() -> int:
    return int(getattr(settings, "PURIFICATION_NOISE_CHUNK", DEFAULT_CHUNK))


def trajectory_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


class NoiseStream:
    """Gaussian increments ``N(0, dt)`` for one trajectory."""

    def __init__(self, seed: int, index: int, dt: float, components: int = 1) -> None:
        self.seed = int(seed)
        self.index = int(index)
        self.dt = float(dt)
        self.components = int(components)
        self._rng = trajectory_generator(seed, index)
        self._scale = math.sqrt(self.dt)

    def block(self, steps: int) -> np.ndarray:
        return self._rng.standard_normal((steps, self.components)) * self._scale


class EnsembleNoise:
    """Chunked increments for a contiguous batch of trajectories.

    ``next_block`` returns an array of shape ``(steps, batch, components)``.
    """

    def __init__(self, seed: int, indices, dt: float, components: int, chunk: int | None = None) -> None:
        self.streams = [NoiseStream(seed, index, dt, components) for index in indices]
        self.chunk = chunk or chunk_steps()
        self.components = components

    def next_block(self) -> np.ndarray:
        if not self.streams:
            return np.zeros((self.chunk, 0, self.components))
        return np.stack([stream.block(self.chunk) for stream in self.streams], axis=1)


def brownian_bridge_refine(increments: np.ndarray, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Split every increment over ``dt`` into two over ``dt / 2`` on the same path.

    The first half is drawn from the bridge law ``N(dW/2, dt/4)``; the second is the
    remainder, so pairwise sums give back the input path.
    """
    increments = np.asarray(increments, dtype=float)
    first = 0.5 * increments + 0.5 * math.sqrt(dt) * rng.standard_normal(increments.shape)
    second = increments - first
    refined = np.empty((2 * increments.shape[0], *increments.shape[1:]))
    refined[0::2] = first
    refined[1::2] = second
    return refined


def coarsen(increments: np.ndarray) -> np.ndarray:
    """Sum consecutive pairs of increments (the inverse of refinement)."""
    increments = np.asarray(increments, dtype=float)
    if increments.shape[0] % 2:
        raise ValueError("an even number of increments is required to coarsen")
    return increments[0::2] + increments[1::2]


__all__ = [
    "EnsembleNoise",
    "NoiseStream",
    "brownian_bridge_refine",
    "chunk_steps",
    "coarsen",
    "trajectory_generator",
]
