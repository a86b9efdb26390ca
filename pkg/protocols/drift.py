"""Log-entropy drift and purity rates, split into good and bad measurements.

A measurement perpendicular to the Bloch vector purifies ("good"); one along the
vector mostly adds noise ("bad"). The decompositions hold for ``eta > 1/2``.
"""
from __future__ import annotations

import math

from django.conf import settings

from protocols.spec import PROTOCOL_ISOTROPIC, PROTOCOL_KINDS, ProtocolSpec
from purification.exceptions import (
    ConfigurationError,
    InvalidProtocolError,
    InvalidStateError,
    SingularTermError,
    UnsupportedRegimeError,
)

DECOMPOSITION_MIN_ETA = 0.5


def _kind(protocol: ProtocolSpec | str) -> str:
    kind = protocol.kind if isinstance(protocol, ProtocolSpec) else str(protocol)
    if kind not in PROTOCOL_KINDS:
        raise InvalidProtocolError(f"unknown protocol {kind!r}")
    return kind


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
    return eta


def _check_entropy(s: float) -> float:
    s = float(s)
    if not 0.0 <= s <= 0.5:
        raise InvalidStateError(f"linear entropy must lie in [0, 1/2], got {s}")
    return s


def _singular_part(s: float, eta: float, weight: float) -> float:
    """``(1 - 1/eta) * weight / s``, rejecting the divergence at ``s = 0``."""
    if eta == 1.0:
        return 0.0
    if s == 0.0:
        raise SingularTermError("the log-entropy drift diverges at s = 0 for an inefficient detector")
    return (1.0 - 1.0 / eta) * weight / s


def drift_log_entropy(
    protocol: ProtocolSpec | str,
    s: float,
    z2: float = 0.0,
    x2: float = 0.0,
    eta: float = 1.0,
    gamma0: float = 1.0,
) -> float:
    """Itô drift of ``ln s``.

    For a single detector along z, ``x2`` and ``z2`` are the squared Bloch
    components transverse to and along the axis; the isotropic drift depends on
    ``s`` only.
    """
    kind = _kind(protocol)
    s = _check_entropy(s)
    eta = _check_eta(eta)
    if kind == PROTOCOL_ISOTROPIC:
        return -2.0 * gamma0 * (2.0 - 2.0 * s + 2.0 / eta + _singular_part(s, eta, 1.0))

    tolerance = float(getattr(settings, "PURIFICATION_RADIAL_SLACK", 1e-9))
    if x2 < 0.0 or z2 < 0.0 or x2 + z2 > 1.0 - 2.0 * s + tolerance:
        raise InvalidStateError(f"x^2 = {x2}, z^2 = {z2} do not fit a state with s = {s}")
    return -2.0 * gamma0 * (2.0 * s + x2 + 2.0 * z2 + _singular_part(s, eta, 0.5 * x2))


def _check_decomposable(eta: float) -> float:
    eta = _check_eta(eta)
    if eta <= DECOMPOSITION_MIN_ETA:
        raise UnsupportedRegimeError(
            f"good/bad measurement decomposition needs eta > {DECOMPOSITION_MIN_ETA}, got {eta}"
        )
    return eta


def log_entropy_decomposition(s: float, eta: float = 1.0, gamma0: float = 1.0) -> dict[str, float]:
    """Log-entropy drift of one detector along the state and one perpendicular to it.

    The isotropic drift is ``parallel + 2 * perpendicular``.
    """
    eta = _check_decomposable(eta)
    s = _check_entropy(s)
    parallel = -2.0 * gamma0 * (2.0 - 2.0 * s)
    perpendicular = -2.0 * gamma0 * (1.0 / eta + _singular_part(s, eta, 0.5))
    return {
        "parallel": parallel,
        "perpendicular": perpendicular,
        "isotropic": parallel + 2.0 * perpendicular,
    }


def log_entropy_noise(protocol: ProtocolSpec | str, s: float, z2: float = 0.0, gamma0: float = 1.0) -> float:
    """Amplitude of the Wiener term of ``d ln s``."""
    kind = _kind(protocol)
    s = _check_entropy(s)
    if kind == PROTOCOL_ISOTROPIC:
        return 2.0 * math.sqrt(2.0 * gamma0) * math.sqrt(1.0 - 2.0 * s)
    if not 0.0 <= z2 <= 1.0 - 2.0 * s + 1e-12:
        raise InvalidStateError(f"z^2 = {z2} does not fit a state with s = {s}")
    return 2.0 * math.sqrt(2.0 * gamma0) * math.sqrt(z2)


def purity_rate_decomposition(p: float, eta: float = 1.0, gamma0: float = 1.0) -> dict[str, float]:
    """Average purity rate of the isotropic scheme per detector role.

    Two detectors perpendicular to the state contribute ``G0 [1 - (2p - 1)/eta]``
    each, the one along it ``4 G0 (1 - p)^2``.
    """
    eta = _check_decomposable(eta)
    if not 0.5 <= p <= 1.0:
        raise InvalidStateError(f"purity must lie in [1/2, 1], got {p}")
    perpendicular = gamma0 * (1.0 - (2.0 * p - 1.0) / eta)
    parallel = 4.0 * gamma0 * (1.0 - p) ** 2
    return {
        "perpendicular": perpendicular,
        "parallel": parallel,
        "total": 2.0 * perpendicular + parallel,
    }


def single_detector_purity_rate(p: float, z2: float, eta: float = 1.0, gamma0: float = 1.0) -> float:
    eta = _check_eta(eta)
    if not 0.5 <= p <= 1.0 or not 0.0 <= z2 <= 2.0 * p - 1.0 + 1e-12:
        raise InvalidStateError(f"z^2 = {z2} does not fit a state with purity {p}")
    return 2.0 * gamma0 * ((1.0 - p) * (1.0 - z2) + 0.5 * (1.0 - 1.0 / eta) * (2.0 * p - 1.0 - z2))


__all__ = [
    "DECOMPOSITION_MIN_ETA",
    "drift_log_entropy",
    "log_entropy_decomposition",
    "log_entropy_noise",
    "purity_rate_decomposition",
    "single_detector_purity_rate",
]
