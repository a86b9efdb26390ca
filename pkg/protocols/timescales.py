"""Analytic purification timescales.

Times are in units of ``1/gamma0``. Every result carries the regime it was
derived in; asymptotic and exact values are never mixed in one table column.
"""
from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

from protocols.mean_purity import naive_mean_purity_time
from protocols.spec import (
    PROTOCOL_ISOTROPIC,
    PROTOCOL_JACOBS,
    PROTOCOL_KINDS,
    PROTOCOL_PARALLEL,
    PROTOCOL_WISEMAN_RALPH,
    ProtocolSpec,
)
from purification.exceptions import (
    ConfigurationError,
    InvalidProtocolError,
    UnattainablePurityError,
    UnsupportedRegimeError,
)

REGIME_EXACT = "exact"
REGIME_ASYMPTOTIC = "high-purity asymptotic"
REGIME_FINITE_EFFICIENCY = "finite-efficiency asymptotic"
REGIME_CHOICES = (
    (REGIME_EXACT, "Exact for the stated model"),
    (REGIME_ASYMPTOTIC, "Leading order in ln(1/epsilon)"),
    (REGIME_FINITE_EFFICIENCY, "High-purity limit with a finite detector inefficiency"),
)

QUANTITY_MEAN_PURITY = "mean-purity"
QUANTITY_MTFP = "mean-first-passage"

ASYMPTOTIC_EPSILON_MAX = 0.1


@dataclass(frozen=True)
class TimescaleResult:
    value: float
    regime: str
    protocol: str
    epsilon: float
    delta: float = 0.0
    quantity: str = QUANTITY_MEAN_PURITY

    def __post_init__(self) -> None:
        if not self.value > 0.0:
            raise ConfigurationError(f"timescale must be positive, got {self.value}")
        if self.regime not in {value for value, _ in REGIME_CHOICES}:
            raise ConfigurationError(f"unknown regime {self.regime!r}")
        if self.regime != REGIME_EXACT and self.epsilon > ASYMPTOTIC_EPSILON_MAX:
            raise ConfigurationError(f"asymptotic timescales need epsilon <= {ASYMPTOTIC_EPSILON_MAX}")

    def to_dict(self) -> dict[str, object]:
        return {
            "value": self.value,
            "regime": self.regime,
            "protocol": self.protocol,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "quantity": self.quantity,
        }


def _kind(protocol: ProtocolSpec | str) -> str:
    kind = protocol.kind if isinstance(protocol, ProtocolSpec) else str(protocol)
    if kind not in PROTOCOL_KINDS:
        raise InvalidProtocolError(f"unknown protocol {kind!r}")
    return kind


def _check_epsilon(epsilon: float, upper: float = ASYMPTOTIC_EPSILON_MAX) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= upper:
        raise ConfigurationError(f"epsilon must lie in (0, {upper}], got {epsilon}")
    return epsilon


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ConfigurationError(f"delta must lie in [0, 1), got {delta}")
    return delta


def is_attainable(epsilon: float, delta: float) -> bool:
    """Whether the average purity can get within ``epsilon`` of one: ``epsilon > delta/2``."""
    return 2.0 * float(epsilon) - float(delta) > 0.0


def _require_ideal(kind: str, delta: float) -> None:
    if delta > 0.0:
        raise UnsupportedRegimeError(f"no closed-form {kind} timescale for delta > 0")


def analytic_time_mean_purity(
    protocol: ProtocolSpec | str,
    epsilon: float,
    delta: float = 0.0,
    *,
    regime: str | None = None,
    gamma0: float = 1.0,
) -> TimescaleResult:
    """Time for ``<p>`` to reach ``1 - epsilon`` from the maximally mixed state.

    ``regime`` defaults to the high-purity asymptotic form for ideal detectors and
    to the finite-efficiency form otherwise. ``REGIME_EXACT`` is available for
    Jacobs (deterministic purity) and isotropic (naive mean-purity equation).
    """
    kind = _kind(protocol)
    epsilon = _check_epsilon(epsilon)
    delta = _check_delta(delta)
    if regime is None:
        regime = REGIME_ASYMPTOTIC if delta == 0.0 else REGIME_FINITE_EFFICIENCY
    eta = 1.0 - delta

    if regime == REGIME_ASYMPTOTIC:
        _require_ideal(kind, delta)
        factor = {
            PROTOCOL_JACOBS: 0.5,
            PROTOCOL_PARALLEL: 1.0,
            PROTOCOL_WISEMAN_RALPH: 1.0,
            PROTOCOL_ISOTROPIC: 0.25,
        }[kind]
        value = factor * math.log(1.0 / epsilon) / gamma0
    elif regime == REGIME_FINITE_EFFICIENCY:
        if kind != PROTOCOL_ISOTROPIC:
            raise UnsupportedRegimeError("the finite-efficiency form is derived for the isotropic protocol only")
        if not is_attainable(epsilon, delta):
            raise UnattainablePurityError(
                f"purity 1 - {epsilon:g} is out of reach for delta = {delta:g} (needs epsilon > delta/2)"
            )
        # (1/4)[ln(1/2e) - ln(1 - d/2e)] collapses to -(1/4) ln(2e - d)
        value = -0.25 * math.log(2.0 * epsilon - delta) / gamma0
    elif regime == REGIME_EXACT:
        if kind == PROTOCOL_JACOBS:
            if not is_attainable(epsilon, delta):
                raise UnattainablePurityError(
                    f"Jacobs purity saturates at (1 + eta)/2 and never reaches 1 - {epsilon:g}"
                )
            value = 0.5 * eta * math.log(eta / (2.0 * epsilon - delta)) / gamma0
        elif kind == PROTOCOL_ISOTROPIC:
            value = naive_mean_purity_time(delta, 0.5, epsilon, gamma0)
        else:
            raise UnsupportedRegimeError(f"no exact mean-purity time for the {kind} protocol")
    else:
        raise ConfigurationError(f"unknown regime {regime!r}")
    return TimescaleResult(value=value, regime=regime, protocol=kind, epsilon=epsilon, delta=delta)


def wiseman_ralph_exact_mtfp(epsilon: float, gamma0: float = 1.0) -> float:
    """Exact mean first-passage time of the aligned protocol from the mixed state.

    ``z* artanh(z*) / (2 G0)`` with ``z* = sqrt(1 - 2 epsilon)``; the artanh is
    evaluated through ``ln(2 epsilon) = ln((1 - z*)(1 + z*))`` to keep precision
    at small ``epsilon``.
    """
    epsilon = _check_epsilon(epsilon, upper=0.5)
    z_star = math.sqrt(1.0 - 2.0 * epsilon)
    return z_star * (2.0 * math.log1p(z_star) - math.log(2.0 * epsilon)) / (4.0 * gamma0)


def analytic_mtfp_estimate(
    protocol: ProtocolSpec | str,
    epsilon: float,
    delta: float = 0.0,
    *,
    regime: str = REGIME_ASYMPTOTIC,
    gamma0: float = 1.0,
) -> TimescaleResult:
    """Mean first-passage time to purity ``1 - epsilon`` for ideal detectors.

    The log-entropy estimates are ``ln(1/epsilon) / 4`` for one aligned detector
    and ``ln(1/epsilon) / 8`` for three; Jacobs purification is deterministic so
    its passage time equals its mean-purity time. Inefficient detectors are the
    business of the quadrature in the passage app.
    """
    kind = _kind(protocol)
    delta = _check_delta(delta)
    _require_ideal(kind, delta)
    if regime == REGIME_EXACT:
        if kind not in (PROTOCOL_WISEMAN_RALPH, PROTOCOL_PARALLEL, PROTOCOL_JACOBS):
            raise UnsupportedRegimeError(f"no exact closed form for the {kind} passage time")
        epsilon = _check_epsilon(epsilon, upper=0.5)
        if kind == PROTOCOL_JACOBS:
            value = 0.5 * math.log(1.0 / (2.0 * epsilon)) / gamma0
        else:
            value = wiseman_ralph_exact_mtfp(epsilon, gamma0)
    elif regime == REGIME_ASYMPTOTIC:
        epsilon = _check_epsilon(epsilon)
        factor = {
            PROTOCOL_JACOBS: 0.5,
            PROTOCOL_PARALLEL: 0.25,
            PROTOCOL_WISEMAN_RALPH: 0.25,
            PROTOCOL_ISOTROPIC: 0.125,
        }[kind]
        value = factor * math.log(1.0 / epsilon) / gamma0
    else:
        raise UnsupportedRegimeError(f"regime {regime!r} does not apply to passage times")
    return TimescaleResult(
        value=value, regime=regime, protocol=kind, epsilon=epsilon, delta=delta, quantity=QUANTITY_MTFP
    )


def timescale_table(epsilons: Iterable[float], gamma0: float = 1.0) -> list[dict[str, float]]:
    """Asymptotic timescales of the ideal protocols with their speed-up ratios."""
    rows = []
    for epsilon in epsilons:
        tau_perp = analytic_time_mean_purity(PROTOCOL_JACOBS, epsilon, gamma0=gamma0).value
        tau_par = analytic_time_mean_purity(PROTOCOL_PARALLEL, epsilon, gamma0=gamma0).value
        tau_iso = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, gamma0=gamma0).value
        mtfp_par = analytic_mtfp_estimate(PROTOCOL_WISEMAN_RALPH, epsilon, gamma0=gamma0).value
        mtfp_iso = analytic_mtfp_estimate(PROTOCOL_ISOTROPIC, epsilon, gamma0=gamma0).value
        rows.append(
            {
                "epsilon": float(epsilon),
                "tau_perp": tau_perp,
                "tau_par": tau_par,
                "tau_iso": tau_iso,
                "mtfp_par": mtfp_par,
                "mtfp_iso": mtfp_iso,
                "mtfp_wr_exact": wiseman_ralph_exact_mtfp(epsilon, gamma0),
                "ratio_par_perp": tau_par / tau_perp,
                "ratio_par_iso": tau_par / tau_iso,
                "ratio_mtfp": mtfp_par / mtfp_iso,
            }
        )
    return rows


__all__ = [
    "ASYMPTOTIC_EPSILON_MAX",
    "QUANTITY_MEAN_PURITY",
    "QUANTITY_MTFP",
    "REGIME_ASYMPTOTIC",
    "REGIME_CHOICES",
    "REGIME_EXACT",
    "REGIME_FINITE_EFFICIENCY",
    "TimescaleResult",
    "analytic_mtfp_estimate",
    "analytic_time_mean_purity",
    "is_attainable",
    "timescale_table",
    "wiseman_ralph_exact_mtfp",
]
