"""Gaussian likelihoods of the time-averaged record of a z measurement."""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from purification.exceptions import ConfigurationError, InvalidStateError
from trajectories.params import MeasurementRecord

# z eigenvalues of the basis states |1> and |2>
EIGENVALUES = np.array([1.0, -1.0])


def diagonal(rho_diag) -> np.ndarray:
    """Validated ``(rho_11, rho_22)`` as an array."""
    weights = np.asarray(rho_diag, dtype=float).reshape(2)
    if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise InvalidStateError(f"populations must be finite and non-negative, got {tuple(weights)}")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise InvalidStateError(f"populations must sum to 1, got {weights.sum()!r}")
    return weights


@dataclass(frozen=True)
class PovmKernel:
    """Outcome law of ``mu``, the record averaged over a window ``tau``.

    Given the basis state ``i``, ``mu`` is Gaussian around ``x_i = +/-1`` with
    variance ``1 / (2 gamma0 tau)``.
    """

    gamma0: float
    tau: float

    def __post_init__(self) -> None:
        if not (self.gamma0 > 0.0 and math.isfinite(self.gamma0)):
            raise ConfigurationError(f"gamma0 must be positive and finite, got {self.gamma0}")
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ConfigurationError(f"the integration window must be positive, got {self.tau}")
        object.__setattr__(self, "gamma0", float(self.gamma0))
        object.__setattr__(self, "tau", float(self.tau))

    @classmethod
    def from_record(cls, record: MeasurementRecord, gamma0: float) -> "PovmKernel":
        return cls(gamma0=gamma0, tau=record.tau)

    @property
    def strength(self) -> float:
        return self.gamma0 * self.tau

    @property
    def variance(self) -> float:
        return 1.0 / (2.0 * self.strength)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def log_likelihood(self, mu) -> np.ndarray:
        """``ln P(mu | i)`` with a trailing axis over the two basis states."""
        mu = np.asarray(mu, dtype=float)[..., None]
        with np.errstate(over="ignore"):
            return 0.5 * math.log(self.strength / math.pi) - (mu - EIGENVALUES) ** 2 * self.strength

    def likelihood(self, mu) -> np.ndarray:
        return np.exp(self.log_likelihood(mu))

    def log_weights(self, rho_diag, mu) -> np.ndarray:
        """``ln(rho_ii P(mu | i))``; zero populations give ``-inf``."""
        with np.errstate(divide="ignore"):
            return np.log(diagonal(rho_diag)) + self.log_likelihood(mu)

    def log_outcome_density(self, rho_diag, mu) -> np.ndarray:
        return logsumexp(self.log_weights(rho_diag, mu), axis=-1)

    def sample(self, rho_diag, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw outcomes: pick a basis state by population, then its Gaussian."""
        states = rng.choice(2, size=size, p=diagonal(rho_diag))
        return EIGENVALUES[states] + self.sigma * rng.standard_normal(size)

    def quadrature_interval(self, width: float = 8.0) -> tuple[float, float]:
        """``[-1 - width*sigma, 1 + width*sigma]``, outside of which both Gaussians are negligible."""
        return -1.0 - width * self.sigma, 1.0 + width * self.sigma


def outcome_density(rho_diag, kernel: PovmKernel) -> Callable[[float], float]:
    """``mu -> P(mu)``, the population-weighted mixture of the two likelihoods."""
    weights = diagonal(rho_diag)

    def density(mu):
        value = np.exp(kernel.log_outcome_density(weights, mu))
        return float(value) if np.ndim(value) == 0 else value

    return density


__all__ = ["EIGENVALUES", "PovmKernel", "diagonal", "outcome_density"]
