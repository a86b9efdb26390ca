"""Drift and diffusion of the three-detector purity SDE ``dp = A dt + sqrt(B) dW``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from purification.exceptions import ConfigurationError, InvalidStateError


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
    return eta


def _purities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0.5) or np.any(p > 1.0):
        raise InvalidStateError("purity must lie in [1/2, 1]")
    return p


def _scalar_or_array(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class FpeCoeffs:
    """``A(p) = 2 G0 [1 - (2p-1)/eta + 2(1-p)^2]`` and ``B(p) = 8 G0 (2p-1)(1-p)^2``."""

    eta: float = 1.0
    gamma0: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", _check_eta(self.eta))
        if not (self.gamma0 > 0.0 and math.isfinite(self.gamma0)):
            raise ConfigurationError(f"gamma0 must be positive and finite, got {self.gamma0}")
        object.__setattr__(self, "gamma0", float(self.gamma0))

    @property
    def delta(self) -> float:
        return 1.0 - self.eta

    def drift(self, p):
        p = _purities(p)
        s = 1.0 - p
        return _scalar_or_array(2.0 * self.gamma0 * (1.0 - (2.0 * p - 1.0) / self.eta + 2.0 * s**2))

    def diffusion(self, p):
        p = _purities(p)
        return _scalar_or_array(8.0 * self.gamma0 * (2.0 * p - 1.0) * (1.0 - p) ** 2)

    def diffusion_hp(self, p):
        """High-purity form ``8 G0 (1-p)^2``, i.e. ``2p - 1`` set to one."""
        p = _purities(p)
        return _scalar_or_array(8.0 * self.gamma0 * (1.0 - p) ** 2)

    def log_potential(self, p):
        """``ln psi`` with ``d ln psi / dp = 2A/B`` and ``psi`` normalised to ``(2p-1)^{3/2} / 2(1-p)``.

        ``ln psi = (3/2) ln(2p-1) - ln(2(1-p)) - delta / (2 eta (1-p))``; ``-inf`` at
        ``p = 1/2`` and undefined at ``p = 1``.
        """
        p = _purities(p)
        s = 1.0 - p
        with np.errstate(divide="ignore"):
            value = 1.5 * np.log(2.0 * p - 1.0) - np.log(2.0 * s) - self.delta / (2.0 * self.eta * s)
        return _scalar_or_array(value)

    def log_stationary(self, p):
        """Unnormalised ``ln P_st = ln(psi / B)``."""
        p = _purities(p)
        s = 1.0 - p
        with np.errstate(divide="ignore"):
            value = 0.5 * np.log(2.0 * p - 1.0) - 3.0 * np.log(s) - self.delta / (2.0 * self.eta * s)
        return _scalar_or_array(value)

    # the grid coordinate u = ln(2(1 - p))

    def diffusion_u(self, u):
        """Diffusion coefficient of ``u``: ``B / 2(1-p)^2 = 4 G0 (2p - 1)``."""
        return 4.0 * self.gamma0 * -np.expm1(np.asarray(u, dtype=float))

    def log_potential_u(self, u):
        """``ln psi`` as a function of ``u``; exact near ``p = 1`` where ``1 - p`` underflows."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.5 * np.log(-np.expm1(u)) - u - self.delta * np.exp(-u) / self.eta

    def log_stationary_u(self, u):
        """Unnormalised log density of ``u`` at stationarity, ``ln P_st + ln(1-p)``."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(-np.expm1(u)) - 2.0 * u - self.delta * np.exp(-u) / self.eta

    def to_dict(self) -> dict[str, float]:
        return {"eta": self.eta, "delta": self.delta, "gamma0": self.gamma0}


def fpe_coeffs(p, eta: float = 1.0, gamma0: float = 1.0):
    """``(A(p), B(p))`` for scalar or array ``p``."""
    coeffs = FpeCoeffs(eta=eta, gamma0=gamma0)
    return coeffs.drift(p), coeffs.diffusion(p)


def u_from_purity(p):
    p = _purities(p)
    with np.errstate(divide="ignore"):
        return _scalar_or_array(np.log(2.0 * (1.0 - p)))


def purity_from_u(u):
    return _scalar_or_array(1.0 - 0.5 * np.exp(np.asarray(u, dtype=float)))


__all__ = ["FpeCoeffs", "fpe_coeffs", "purity_from_u", "u_from_purity"]
