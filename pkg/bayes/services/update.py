"""Quantum Bayes rule for a finite window and the exact parallel-protocol average.

Populations are reweighted by the likelihood of the observed mean record and
the coherence shrinks with the geometric mean of the population ratios, plus
``exp(-gamma tau)`` of extra dephasing for an inefficient detector.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from bayes.kernel import PovmKernel, diagonal
from blochstate.state import BlochVector
from purification.exceptions import ConfigurationError, InvalidStateError, NumericUnderflowError, QuadratureError
from trajectories.params import DetectorParams

logger = logging.getLogger(__name__)

QUADRATURE_ABS_TOL = 1e-8
QUADRATURE_LIMIT = 200


@dataclass(frozen=True)
class QubitState:
    """Density matrix entries ``rho_11``, ``rho_22`` and ``rho_12``."""

    rho11: float
    rho22: float
    rho12: complex = 0j

    def __post_init__(self) -> None:
        diagonal((self.rho11, self.rho22))
        if abs(self.rho12) ** 2 > self.rho11 * self.rho22 + 1e-12:
            raise InvalidStateError("|rho_12|^2 exceeds rho_11 * rho_22")
        object.__setattr__(self, "rho11", float(self.rho11))
        object.__setattr__(self, "rho22", float(self.rho22))
        object.__setattr__(self, "rho12", complex(self.rho12))

    @classmethod
    def from_bloch(cls, v: BlochVector) -> "QubitState":
        v = v.validated()
        return cls(0.5 * (1.0 + v.z), 0.5 * (1.0 - v.z), 0.5 * complex(v.x, v.y))

    def to_bloch(self) -> BlochVector:
        return BlochVector(2.0 * self.rho12.real, 2.0 * self.rho12.imag, self.rho11 - self.rho22)

    @property
    def purity(self) -> float:
        return self.rho11**2 + self.rho22**2 + 2.0 * abs(self.rho12) ** 2

    @property
    def linear_entropy(self) -> float:
        """``1 - purity`` written as ``2 (rho_11 rho_22 - |rho_12|^2)``."""
        return 2.0 * (self.rho11 * self.rho22 - abs(self.rho12) ** 2)


def _log_update(rho_diag: np.ndarray, mu, kernel: PovmKernel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log populations after the update, the log coherence factor and ``ln P(mu)``."""
    log_weights = kernel.log_weights(rho_diag, mu)
    log_norm = np.logaddexp(log_weights[..., 0], log_weights[..., 1])
    if np.any(~np.isfinite(log_norm)):
        raise NumericUnderflowError(f"outcome density P(mu) vanished for mu = {mu!r}")
    log_populations = log_weights - log_norm[..., None]
    log_likelihood = kernel.log_likelihood(mu)
    log_coherence = 0.5 * (log_likelihood[..., 0] + log_likelihood[..., 1]) - log_norm
    return log_populations, log_coherence, log_norm


def povm_update(
    state: QubitState,
    mu: float,
    kernel: PovmKernel,
    eta: float = 1.0,
) -> QubitState:
    """State after observing the mean record ``mu`` over ``kernel.tau``."""
    params = DetectorParams.from_efficiency(eta, kernel.gamma0)
    rho_diag = np.array([state.rho11, state.rho22])
    log_populations, log_coherence, _ = _log_update(rho_diag, mu, kernel)
    populations = np.exp(log_populations)
    populations /= populations.sum()
    coherence = state.rho12 * math.exp(float(log_coherence) - params.gamma * kernel.tau)
    return QubitState(float(populations[0]), float(populations[1]), coherence)


def _check_start(p0: float) -> float:
    p0 = float(p0)
    if not 0.5 <= p0 <= 1.0:
        raise ConfigurationError(f"initial purity must lie in [1/2, 1], got {p0}")
    return p0


def _integrate(func, kernel: PovmKernel, epsabs: float, epsrel: float) -> float:
    lower, upper = kernel.quadrature_interval()
    value, error, info, *rest = integrate.quad(
        func,
        lower,
        upper,
        points=(-1.0, 0.0, 1.0),
        epsabs=epsabs,
        epsrel=epsrel,
        limit=QUADRATURE_LIMIT,
        full_output=1,
    )
    if rest and error > max(epsabs, epsrel * abs(value)):
        logger.warning(
            "Outcome quadrature did not converge",
            extra={"tau": kernel.tau, "gamma0": kernel.gamma0, "error": error, "evaluations": info["neval"]},
        )
        raise QuadratureError(f"quadrature over mu stopped at estimated error {error:.3g}: {rest[0]}")
    return value


def mean_entropy_parallel_exact(
    p0: float,
    tau: float,
    gamma0: float = 1.0,
    *,
    epsabs: float = QUADRATURE_ABS_TOL,
    epsrel: float = 1e-10,
) -> float:
    """``<1 - p>`` after measuring a z-diagonal state of purity ``p0`` for ``tau``."""
    p0 = _check_start(p0)
    if tau < 0.0:
        raise ConfigurationError(f"tau must be non-negative, got {tau}")
    if tau == 0.0 or p0 == 1.0:
        return 1.0 - p0
    z0 = math.sqrt(2.0 * p0 - 1.0)
    rho_diag = np.array([0.5 * (1.0 + z0), 0.5 * (1.0 - z0)])
    kernel = PovmKernel(gamma0, tau)

    def integrand(mu: float) -> float:
        log_populations, _, log_norm = _log_update(rho_diag, mu, kernel)
        # P(mu) * 2 rho_11 rho_22 for a diagonal state
        return 2.0 * math.exp(float(log_norm + log_populations[0] + log_populations[1]))

    return _integrate(integrand, kernel, epsabs, epsrel)


def mean_purity_parallel_exact(p0: float, tau: float, gamma0: float = 1.0) -> float:
    """Exact average purity of the no-feedback protocol, by quadrature over ``mu``."""
    return 1.0 - mean_entropy_parallel_exact(p0, tau, gamma0)


def time_to_mean_purity_parallel(epsilon: float, p0: float = 0.5, gamma0: float = 1.0) -> float:
    """Time for the exact ``<p>`` to reach ``1 - epsilon``, found by root finding in ``ln <s>``."""
    p0 = _check_start(p0)
    if not 0.0 < epsilon < 0.5:
        raise ConfigurationError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if 1.0 - p0 <= epsilon:
        return 0.0
    target = math.log(epsilon)

    def gap(tau: float) -> float:
        return math.log(mean_entropy_parallel_exact(p0, tau, gamma0, epsabs=0.0, epsrel=1e-9)) - target

    upper = math.log(1.0 / epsilon) / gamma0
    while gap(upper) > 0.0:
        upper *= 2.0
    return optimize.brentq(gap, 0.0, upper, xtol=1e-10)


__all__ = [
    "QubitState",
    "mean_entropy_parallel_exact",
    "mean_purity_parallel_exact",
    "povm_update",
    "time_to_mean_purity_parallel",
]
