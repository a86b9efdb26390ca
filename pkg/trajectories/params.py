"""Detector parameters and the noise/record increments that drive the SDEs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from purification.exceptions import ConfigurationError


@dataclass(frozen=True)
class DetectorParams:
    """Measurement rate ``gamma0`` plus extra dephasing ``gamma`` (both inverse times)."""

    gamma0: float = 1.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        gamma0 = float(self.gamma0)
        gamma = float(self.gamma)
        if not (gamma0 > 0.0 and math.isfinite(gamma0)):
            raise ConfigurationError(f"gamma0 must be positive and finite, got {gamma0}")
        if not (gamma >= 0.0 and math.isfinite(gamma)):
            raise ConfigurationError(f"gamma must be non-negative and finite, got {gamma}")
        object.__setattr__(self, "gamma0", gamma0)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def from_efficiency(cls, eta: float, gamma0: float = 1.0) -> "DetectorParams":
        if not 0.0 < eta <= 1.0:
            raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
        return cls(gamma0=gamma0, gamma=gamma0 * (1.0 / eta - 1.0))

    @classmethod
    def from_inefficiency(cls, delta: float, gamma0: float = 1.0) -> "DetectorParams":
        if not 0.0 <= delta < 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1), got {delta}")
        return cls.from_efficiency(1.0 - delta, gamma0=gamma0)

    @property
    def Gamma(self) -> float:  # noqa: N802 - total dephasing rate
        return self.gamma0 + self.gamma

    @property
    def eta(self) -> float:
        return self.gamma0 / self.Gamma

    @property
    def delta(self) -> float:
        return 1.0 - self.eta

    @property
    def is_ideal(self) -> bool:
        return self.gamma == 0.0

    def to_dict(self) -> dict[str, float]:
        return {"gamma0": self.gamma0, "gamma": self.gamma, "eta": self.eta, "delta": self.delta}


@dataclass(frozen=True)
class NoiseIncrement:
    """Wiener increment(s) over one step of length ``dt``.

    ``dW`` is a scalar for a single detector or a 3-tuple ``(dW_x, dW_y, dW_z)``.
    """

    dW: float | tuple[float, float, float]
    dt: float

    def __post_init__(self) -> None:
        if not (float(self.dt) > 0.0):
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        object.__setattr__(self, "dt", float(self.dt))
        if np.ndim(self.dW) == 0:
            object.__setattr__(self, "dW", float(self.dW))
        else:
            components = tuple(float(c) for c in np.asarray(self.dW, dtype=float).reshape(-1))
            if len(components) != 3:
                raise ConfigurationError("vector noise increments need exactly three components")
            object.__setattr__(self, "dW", components)

    @classmethod
    def sample(cls, rng: np.random.Generator, dt: float, components: int = 1) -> "NoiseIncrement":
        draws = rng.standard_normal(components) * math.sqrt(dt)
        return cls(float(draws[0]) if components == 1 else tuple(draws), dt)

    @property
    def is_vector(self) -> bool:
        return isinstance(self.dW, tuple)

    def as_array(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.dW, dtype=float))


@dataclass(frozen=True)
class MeasurementRecord:
    """Record increments ``dR`` of one detector over a window of equal steps."""

    dR: tuple[float, ...]
    dt: float

    @classmethod
    def from_increments(cls, increments, dt: float) -> "MeasurementRecord":
        return cls(tuple(float(x) for x in np.asarray(increments, dtype=float).reshape(-1)), float(dt))

    @property
    def tau(self) -> float:
        return len(self.dR) * self.dt

    @property
    def mu(self) -> float:
        """Time-averaged record ``(1/tau) * sum(dR)``."""
        if not self.dR:
            raise ConfigurationError("an empty record has no time average")
        return math.fsum(self.dR) / self.tau


__all__ = ["DetectorParams", "MeasurementRecord", "NoiseIncrement"]
