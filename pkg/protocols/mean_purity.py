"""Closed-form average purity curves.

The naive mean-purity equation replaces ``p`` by ``<p>`` in the drift of the
three-detector purity SDE. In ``s = 1 - <p>`` it is the Riccati equation
``ds/dt = -4 G0 (s - s_plus)(s - s_minus)``, solved here exactly.
"""
from __future__ import annotations

import math

import numpy as np

from purification.exceptions import ConfigurationError, UnattainablePurityError


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ConfigurationError(f"delta must lie in [0, 1), got {delta}")
    return delta


def _check_purity(p0: float) -> float:
    p0 = float(p0)
    if not 0.5 <= p0 <= 1.0:
        raise ConfigurationError(f"initial purity must lie in [1/2, 1], got {p0}")
    return p0


def riccati_roots(delta: float) -> tuple[float, float]:
    """Roots ``(s_plus, s_minus)`` of ``s^2 + s/eta - delta/(2 eta)``; ``s_plus >= 0``."""
    eta = 1.0 - _check_delta(delta)
    root = math.sqrt(1.0 / eta**2 + 2.0 * delta / eta)
    # s_plus = (root - 1/eta) / 2 without cancellation
    s_plus = (delta / eta) / (root + 1.0 / eta)
    s_minus = -0.5 * (root + 1.0 / eta)
    return s_plus, s_minus


def stationary_mean_purity(eta: float) -> float:
    """``1 + (1/eta - sqrt(1/eta^2 + 2/eta - 2)) / 2``, the fixed point of the naive equation."""
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
    return 1.0 - riccati_roots(1.0 - eta)[0]


def naive_mean_purity(delta: float, p0: float, t, gamma0: float = 1.0):
    """``<p>(t)`` from the naive mean-purity equation, for scalar or array ``t``."""
    s_plus, s_minus = riccati_roots(delta)
    s0 = 1.0 - _check_purity(p0)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise ConfigurationError("time must be non-negative")
    gap = s_plus - s_minus
    ratio = (s0 - s_plus) / (s0 - s_minus) * np.exp(-4.0 * gamma0 * gap * t_arr)
    purity = 1.0 - (s_plus + gap * ratio / (1.0 - ratio))
    if np.ndim(purity) == 0:
        return float(purity)
    return purity


def naive_mean_purity_time(delta: float, p0: float, epsilon: float, gamma0: float = 1.0) -> float:
    """Time for the naive ``<p>`` to reach ``1 - epsilon`` (zero if it starts there)."""
    s_plus, s_minus = riccati_roots(delta)
    s0 = 1.0 - _check_purity(p0)
    if s0 <= epsilon:
        return 0.0
    if epsilon <= s_plus:
        raise UnattainablePurityError(
            f"the naive mean purity saturates at 1 - {s_plus:.6g}; 1 - {epsilon:g} is never reached"
        )
    start = (s0 - s_plus) / (s0 - s_minus)
    target = (epsilon - s_plus) / (epsilon - s_minus)
    return math.log(start / target) / (4.0 * gamma0 * (s_plus - s_minus))


def jacobs_purity(eta: float, p0: float, t, gamma0: float = 1.0):
    """Deterministic Jacobs purity ``p_J + (p0 - p_J) exp(-2 G0 t / eta)`` with ``p_J = (1 + eta)/2``."""
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
    p0 = _check_purity(p0)
    ceiling = 0.5 * (1.0 + eta)
    purity = ceiling + (p0 - ceiling) * np.exp(-2.0 * gamma0 * np.asarray(t, dtype=float) / eta)
    if np.ndim(purity) == 0:
        return float(purity)
    return purity


__all__ = [
    "jacobs_purity",
    "naive_mean_purity",
    "naive_mean_purity_time",
    "riccati_roots",
    "stationary_mean_purity",
]
