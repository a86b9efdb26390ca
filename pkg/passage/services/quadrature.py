"""Mean first-passage time from ``p0`` to ``1 - epsilon`` with reflection at ``p = 1/2``.

``T = 2 int_{p0}^{1-eps} dy / psi(y) int_{1/2}^{y} dz psi(z) / B(z)`` with
``psi = exp int 2A/B``. Both integrals are taken in ``v = -ln(2(1 - p))`` on a
uniform mesh, the inner one as a cumulative log-sum-exp trapezoid, so
``psi(z) / psi(y)`` is only ever formed as a difference of logarithms. The
trapezoid values are Richardson-extrapolated while the mesh is doubled.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.cache import cache
from scipy.special import logsumexp

from fokkerplanck.coeffs import FpeCoeffs
from passage.params import DIFFUSION_FULL, MtfpConfig
from purification.exceptions import ConfigurationError, InvalidStateError, QuadratureError

logger = logging.getLogger(__name__)

# largest argument of exp that stays finite in double precision
LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def _exp_or_inf(log_value: float) -> float:
    return math.exp(log_value) if log_value < LOG_FLOAT_MAX else math.inf


def psi_hp(x, delta: float):
    """``ln psi_HP(x) = (x - 1/2)(1 - delta/((1-x)(1-delta))) - ln(2(1-x)) / (1-delta)``."""
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ConfigurationError(f"delta must lie in [0, 1), got {delta}")
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.5) or np.any(x >= 1.0):
        raise InvalidStateError("psi_HP is defined for x in [1/2, 1)")
    eta = 1.0 - delta
    s = 1.0 - x
    value = (x - 0.5) * (1.0 - delta / (s * eta)) - np.log(2.0 * s) / eta
    return float(value) if np.ndim(value) == 0 else value


def _log_psi_hp_v(v: np.ndarray, delta: float) -> np.ndarray:
    eta = 1.0 - delta
    s = 0.5 * np.exp(-v)
    return (0.5 - s) * (1.0 - delta / (s * eta)) + v / eta


@dataclass(frozen=True)
class QuadratureEstimate:
    log_value: float
    level: int
    change: float

    @property
    def value(self) -> float:
        return _exp_or_inf(self.log_value)

    @property
    def nodes(self) -> int:
        return 2**self.level + 1

    def to_dict(self) -> dict[str, float | int]:
        return {"log_value": self.log_value, "value": self.value, "level": self.level, "change": self.change}

    def to_dict_for_cache(self) -> dict[str, float | int]:
        return {"log_value": self.log_value, "level": self.level, "change": self.change}


class MtfpQuadrature:
    """Richardson-extrapolated log-space trapezoid rule for one ``MtfpConfig``.

    Level ``k`` uses ``2**k`` intervals; levels are added until two successive
    extrapolated values of ``ln T`` agree to ``config.rtol``.
    """

    min_level: int = 12
    max_level: int = 22
    cache_timeout: int | None = None

    def __init__(self, config: MtfpConfig) -> None:
        self.config = config
        self.v_end = -math.log(2.0 * config.epsilon)
        self.v_start = -math.log(2.0 * (1.0 - config.p0))
        self._coeffs = FpeCoeffs(eta=config.eta, gamma0=config.gamma0)
        # intervals below v_start at min_level; scaled with the level so meshes stay nested
        self._base_start_intervals = 0
        if self.v_start > 0.0:
            share = round(2**self.min_level * self.v_start / self.v_end)
            self._base_start_intervals = min(max(1, share), 2**self.min_level - 1)

    def mesh(self, level: int) -> tuple[np.ndarray, int]:
        """Nodes in ``v`` and the index of the node at ``p0``."""
        intervals = 2**level
        if self._base_start_intervals == 0:
            return np.linspace(0.0, self.v_end, intervals + 1), 0
        first = self._base_start_intervals * 2 ** (level - self.min_level)
        lower = np.linspace(0.0, self.v_start, first + 1)
        upper = np.linspace(self.v_start, self.v_end, intervals - first + 1)
        return np.concatenate([lower, upper[1:]]), first

    def log_integrands(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(ln psi, ln(psi/B * dp/dv))`` at the nodes."""
        log_four_gamma0 = math.log(4.0 * self.config.gamma0)
        if self.config.diffusion == DIFFUSION_FULL:
            log_psi = self._coeffs.log_potential_u(-v)
            return log_psi, self._coeffs.log_stationary_u(-v) - log_four_gamma0
        log_psi = _log_psi_hp_v(v, self.config.delta)
        return log_psi, log_psi - log_four_gamma0 + v

    def log_trapezoid(self, level: int) -> float:
        """``ln T`` from the plain trapezoid rule at ``level``."""
        v, start = self.mesh(level)
        log_psi, inner = self.log_integrands(v)
        log_half_widths = np.log(0.5 * np.diff(v))
        log_inner = np.empty_like(v)
        log_inner[0] = -math.inf
        log_inner[1:] = np.logaddexp.accumulate(log_half_widths + np.logaddexp(inner[:-1], inner[1:]))
        with np.errstate(invalid="ignore"):
            outer = log_inner - log_psi - v
        if v[0] == 0.0 and self.config.diffusion == DIFFUSION_FULL:
            # psi and the inner integral both vanish like (2p - 1)^{3/2}
            outer[0] = -math.log(6.0 * self.config.gamma0)
        segment = np.logaddexp(outer[start:-1], outer[start + 1 :]) + log_half_widths[start:]
        value = float(logsumexp(segment))
        if not math.isfinite(value):
            raise QuadratureError(f"trapezoid rule at level {level} is not finite for {self.config}")
        return value

    def estimate(self) -> QuadratureEstimate:
        rtol = self.config.rtol
        previous_trapezoid = None
        previous_extrapolated = None
        change = math.inf
        for level in range(self.min_level, self.max_level + 1):
            trapezoid = self.log_trapezoid(level)
            if previous_trapezoid is not None:
                # T_2n + (T_2n - T_n) / 3 in log space; meshes far from the asymptotic regime are not extrapolated
                correction = (1.0 - math.exp(min(previous_trapezoid - trapezoid, 50.0))) / 3.0
                extrapolated = trapezoid + math.log1p(correction) if correction > -0.5 else trapezoid
                if previous_extrapolated is not None:
                    change = abs(extrapolated - previous_extrapolated)
                    if change <= rtol:
                        logger.debug(
                            "MTFP quadrature converged",
                            extra={"epsilon": self.config.epsilon, "delta": self.config.delta, "nodes": 2**level + 1},
                        )
                        return QuadratureEstimate(extrapolated, level, change)
                previous_extrapolated = extrapolated
            previous_trapezoid = trapezoid
        logger.warning(
            "MTFP quadrature did not converge",
            extra={"epsilon": self.config.epsilon, "delta": self.config.delta, "change": change},
        )
        raise QuadratureError(
            f"MTFP quadrature for epsilon={self.config.epsilon:g}, delta={self.config.delta:g} changed by "
            f"{change:.2e} at 2**{self.max_level} intervals (rtol {rtol:g})"
        )


def mtfp_estimate(config: MtfpConfig) -> QuadratureEstimate:
    """Quadrature estimate, memoised in the default cache."""
    key = config.cache_key()
    cached = cache.get(key)
    if cached is not None:
        return QuadratureEstimate(**cached)
    estimate = MtfpQuadrature(config).estimate()
    cache.set(key, estimate.to_dict_for_cache(), timeout=MtfpQuadrature.cache_timeout)
    return estimate


def log_mtfp_quadrature(config: MtfpConfig) -> float:
    """Natural logarithm of ``T``, with ``T`` in units of ``1/G0``."""
    return mtfp_estimate(config).log_value


def mtfp_quadrature(config: MtfpConfig) -> float:
    """``T`` in units of ``1/G0``; ``inf`` when it exceeds the float range (use the log form then)."""
    return mtfp_estimate(config).value


__all__ = [
    "LOG_FLOAT_MAX",
    "MtfpQuadrature",
    "QuadratureEstimate",
    "log_mtfp_quadrature",
    "mtfp_estimate",
    "mtfp_quadrature",
    "psi_hp",
]
