"""Euler-Maruyama steps for the Bloch, radial and purity SDEs.

Every scalar operation is a thin wrapper around a batched kernel that acts on
``(N, 3)`` (Bloch) or ``(N,)`` (radius, purity) arrays; ensembles use the
kernels directly.

Bloch steps are norm-consistent: the Cartesian update fixes the direction and,
for states with ``|v| >= NORM_SWITCH_RADIUS``, the length is taken from the Ito
step of ``|v|^2`` driven by the same increments. For ideal detectors both the
drift and the noise of ``|v|^2`` vanish on the sphere, so pure states stay pure.
Inside the switch radius the plain Cartesian step is kept, except for states off
the origin with no noise acting on the radius: a state held perpendicular to
its detector purifies deterministically at every radius.
"""
from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from django.conf import settings

from blochstate.state import BlochVector, radial_slack
from purification.exceptions import (
    ConfigurationError,
    IntegratorOvershootError,
    NonFiniteStateError,
    UnsupportedRegimeError,
)
from trajectories.params import DetectorParams, NoiseIncrement

NORM_SWITCH_RADIUS = 0.5
QUIET_RADIAL_NOISE = 1e-12
# radial steps switch to the purity equation once 2 G0 dt / r exceeds this
RADIAL_DRIFT_FRACTION = 0.01
DEFAULT_RADIAL_MIN = 1e-6

NORM_CONSISTENT = "norm-consistent"
EULER = "euler"
SCHEMES = (NORM_CONSISTENT, EULER)

AXES = {"x": 0, "y": 1, "z": 2}


def radial_minimum() -> float:
    return float(getattr(settings, "PURIFICATION_RADIAL_MIN", DEFAULT_RADIAL_MIN))


def axis_index(axis: int | str) -> int:
    if isinstance(axis, str):
        try:
            return AXES[axis.lower()]
        except KeyError:
            raise ConfigurationError(f"unknown measurement axis {axis!r}") from None
    if axis not in (0, 1, 2):
        raise ConfigurationError(f"measurement axis index must be 0, 1 or 2, got {axis!r}")
    return int(axis)


# Coefficients -----------------------------------------------------------------


def detector_coefficients(
    states: np.ndarray, gamma0s: np.ndarray, totals: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Drift ``(N, 3)`` and diffusion ``(N, 3, 3)`` for detectors along x, y, z.

    Detector ``k`` has measurement rate ``gamma0s[k]`` and total rate
    ``totals[k]``; an absent detector has both equal to zero. Component ``i``
    decays at the summed total rate of the *other* detectors and detector ``k``
    kicks the state with ``sqrt(2 gamma0_k) (e_k - v v_k) dW_k``.
    """
    gamma0s = np.asarray(gamma0s, dtype=float)
    totals = np.asarray(totals, dtype=float)
    decay = totals.sum() - totals
    drift = -states * decay[None, :]
    strengths = np.sqrt(2.0 * gamma0s)
    projector = np.eye(3)[None, :, :] - states[:, :, None] * states[:, None, :]
    diffusion = projector * strengths[None, None, :]
    return drift, diffusion


def single_detector_coefficients(
    states: np.ndarray, params: DetectorParams, axis: int
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of one detector along ``axis``; diffusion has shape ``(N, 3, 1)``."""
    gamma0s = np.zeros(3)
    totals = np.zeros(3)
    gamma0s[axis] = params.gamma0
    totals[axis] = params.Gamma
    drift, diffusion = detector_coefficients(states, gamma0s, totals)
    return drift, diffusion[:, :, axis : axis + 1]


def three_detector_coefficients(
    states: np.ndarray, params_xyz: Sequence[DetectorParams]
) -> tuple[np.ndarray, np.ndarray]:
    if len(params_xyz) != 3:
        raise ConfigurationError("three-detector stepping needs parameters for x, y and z")
    gamma0s = np.array([p.gamma0 for p in params_xyz])
    totals = np.array([p.Gamma for p in params_xyz])
    return detector_coefficients(states, gamma0s, totals)


# Batched kernels --------------------------------------------------------------


def settle_states(states: np.ndarray, slack: float | None = None) -> np.ndarray:
    """Apply the radial slack policy to an ``(N, 3)`` array in place."""
    if not np.all(np.isfinite(states)):
        raise NonFiniteStateError("Bloch components became non-finite")
    slack = radial_slack() if slack is None else slack
    radius = np.sqrt(np.einsum("ij,ij->i", states, states))
    outside = radius > 1.0
    if np.any(outside):
        worst = float(radius.max())
        if worst > 1.0 + slack:
            raise IntegratorOvershootError(
                f"step left the Bloch ball (r = {worst:.12g}); reduce dt"
            )
        states[outside] /= radius[outside, None]
    return states


def advance_bloch(
    states: np.ndarray,
    drift: np.ndarray,
    diffusion: np.ndarray,
    increments: np.ndarray,
    dt: float,
    *,
    scheme: str = NORM_CONSISTENT,
    slack: float | None = None,
    quiet_origin: bool = False,
) -> np.ndarray:
    """One Euler-Maruyama step for a batch of Bloch vectors.

    ``scheme=EULER`` returns the plain Cartesian update, which leaves the sphere
    by ``O(dt)`` on pure states and is then rejected by the slack policy.
    ``quiet_origin`` also takes the Ito radius at the origin itself, so a
    perpendicular-feedback protocol starting from the mixed state has a
    noise-free first step.
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown integration scheme {scheme!r}")
    kicks = np.einsum("nim,nm->ni", diffusion, increments)
    cartesian = states + drift * dt + kicks
    if scheme == EULER:
        return settle_states(cartesian, slack)

    norm2 = np.einsum("ni,ni->n", states, states)
    norm2_drift = 2.0 * np.einsum("ni,ni->n", states, drift) + np.einsum("nim,nim->n", diffusion, diffusion)
    radial_kicks = np.einsum("ni,nim->nm", states, diffusion)
    norm2_ito = norm2 + norm2_drift * dt + 2.0 * np.einsum("nm,nm->n", radial_kicks, increments)

    radius = np.sqrt(np.einsum("ni,ni->n", cartesian, cartesian))
    quiet = np.abs(radial_kicks).sum(axis=1) <= QUIET_RADIAL_NOISE
    if not quiet_origin:
        quiet &= norm2 > 0.0
    corrected = ((radius >= NORM_SWITCH_RADIUS) | quiet) & (norm2_ito > 0.0) & (radius > 0.0)
    scale = np.ones_like(radius)
    scale[corrected] = np.sqrt(norm2_ito[corrected]) / radius[corrected]
    return settle_states(cartesian * scale[:, None], slack)


def advance_single(
    states: np.ndarray,
    params: DetectorParams,
    axis: int,
    increments: np.ndarray,
    dt: float,
    scheme: str = NORM_CONSISTENT,
    *,
    quiet_origin: bool = False,
) -> np.ndarray:
    drift, diffusion = single_detector_coefficients(states, params, axis)
    return advance_bloch(
        states, drift, diffusion, np.asarray(increments).reshape(-1, 1), dt, scheme=scheme, quiet_origin=quiet_origin
    )


def advance_three(
    states: np.ndarray,
    params_xyz: Sequence[DetectorParams],
    increments: np.ndarray,
    dt: float,
    scheme: str = NORM_CONSISTENT,
) -> np.ndarray:
    drift, diffusion = three_detector_coefficients(states, params_xyz)
    return advance_bloch(states, drift, diffusion, increments, dt, scheme=scheme)


def radial_coefficients(radius: np.ndarray, params: DetectorParams) -> tuple[np.ndarray, np.ndarray]:
    g0 = params.gamma0
    drift = 2.0 * g0 * (1.0 / radius - radius / params.eta)
    noise = math.sqrt(2.0 * g0) * (1.0 - radius * radius)
    return drift, noise


def advance_radial(radius: np.ndarray, params: DetectorParams, increments: np.ndarray, dt: float) -> np.ndarray:
    """Radial step for three identical detectors.

    Radii where the ``1/r`` drift would move the state by more than
    ``RADIAL_DRIFT_FRACTION`` of its length are stepped through the purity
    equation with the same increment and mapped back with ``r = sqrt(2p - 1)``.
    """
    radius = np.asarray(radius, dtype=float)
    increments = np.broadcast_to(np.asarray(increments, dtype=float), radius.shape)
    near = radius * RADIAL_DRIFT_FRACTION < 2.0 * params.gamma0 * dt
    stepped = np.empty_like(radius)
    far = ~near
    if np.any(far):
        drift, noise = radial_coefficients(radius[far], params)
        stepped[far] = np.abs(radius[far] + drift * dt + noise * increments[far])
    if np.any(near):
        purity = advance_purity_iso(0.5 * (1.0 + radius[near] ** 2), params, increments[near], dt)
        stepped[near] = np.sqrt(np.maximum(2.0 * purity - 1.0, 0.0))
    return _settle_upper(stepped, 1.0, "radius")


def purity_iso_coefficients(purity: np.ndarray, params: DetectorParams) -> tuple[np.ndarray, np.ndarray]:
    g0 = params.gamma0
    s = 1.0 - purity
    drift = 2.0 * g0 * (1.0 - (2.0 * purity - 1.0) / params.eta + 2.0 * s * s)
    noise = 2.0 * math.sqrt(2.0 * g0) * s * np.sqrt(np.clip(2.0 * purity - 1.0, 0.0, None))
    return drift, noise


def advance_purity_iso(purity: np.ndarray, params: DetectorParams, increments: np.ndarray, dt: float) -> np.ndarray:
    purity = np.asarray(purity, dtype=float)
    drift, noise = purity_iso_coefficients(purity, params)
    stepped = purity + drift * dt + noise * np.asarray(increments, dtype=float)
    stepped = np.where(stepped < 0.5, 1.0 - stepped, stepped)
    return _settle_upper(stepped, 1.0, "purity")


def _settle_upper(values: np.ndarray, ceiling: float, label: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NonFiniteStateError(f"{label} became non-finite")
    worst = float(np.max(values, initial=-math.inf))
    if worst > ceiling + radial_slack():
        raise IntegratorOvershootError(f"{label} overshot {ceiling} ({worst:.12g}); reduce dt")
    return np.minimum(values, ceiling)


# Single-state operations -----------------------------------------------------------


def _require_scalar(n: NoiseIncrement) -> float:
    if n.is_vector:
        raise ConfigurationError("a single detector is driven by a scalar increment")
    return float(n.dW)


def step_single_detector(
    v: BlochVector,
    params: DetectorParams,
    axis: int | str,
    n: NoiseIncrement,
    scheme: str = NORM_CONSISTENT,
) -> BlochVector:
    """One Ito step of a single detector measuring along ``axis``.

    Along z: ``dz = (1 - z^2) sqrt(2 G0) dW`` and
    ``dx = -(G0/eta) x dt - z x sqrt(2 G0) dW`` (``dy`` likewise).
    """
    states = v.validated().as_array()[None, :]
    stepped = advance_single(states, params, axis_index(axis), np.array([_require_scalar(n)]), n.dt, scheme)
    return BlochVector.from_array(stepped[0])


def step_three_detector(
    v: BlochVector,
    params_xyz: Sequence[DetectorParams],
    n: NoiseIncrement,
    scheme: str = NORM_CONSISTENT,
) -> BlochVector:
    if not n.is_vector:
        raise ConfigurationError("three detectors need a 3-component increment")
    states = v.validated().as_array()[None, :]
    stepped = advance_three(states, params_xyz, n.as_array()[None, :], n.dt, scheme)
    return BlochVector.from_array(stepped[0])


def step_radial(r: float, params: DetectorParams, n: NoiseIncrement) -> float:
    """``dr = 2 G0 (1/r - r/eta) dt + sqrt(2 G0) (1 - r^2) dW_r``."""
    if not 0.0 < r <= 1.0:
        raise ConfigurationError(f"radius must lie in (0, 1], got {r}")
    if r <= radial_minimum():
        raise UnsupportedRegimeError("radial stepping is singular near the origin; step the purity instead")
    return float(advance_radial(np.array([r]), params, np.array([_require_scalar(n)]), n.dt)[0])


def step_purity_iso(p: float, params: DetectorParams, n: NoiseIncrement) -> float:
    """Purity step for three identical detectors; regular at the mixed state ``p = 1/2``."""
    if not 0.5 <= p <= 1.0:
        raise ConfigurationError(f"purity must lie in [1/2, 1], got {p}")
    return float(advance_purity_iso(np.array([p]), params, np.array([_require_scalar(n)]), n.dt)[0])


def measurement_record(expectation: float, params: DetectorParams, n: NoiseIncrement) -> float:
    """Record increment ``dR = <X> dt + dW / sqrt(2 G0)`` sharing the state's ``dW``."""
    return float(expectation) * n.dt + _require_scalar(n) / math.sqrt(2.0 * params.gamma0)


def record_increments(
    expectations: np.ndarray, params: DetectorParams, increments: np.ndarray, dt: float
) -> np.ndarray:
    return np.asarray(expectations) * dt + np.asarray(increments) / math.sqrt(2.0 * params.gamma0)


__all__ = [
    "EULER",
    "NORM_CONSISTENT",
    "NORM_SWITCH_RADIUS",
    "RADIAL_DRIFT_FRACTION",
    "SCHEMES",
    "advance_bloch",
    "advance_purity_iso",
    "advance_radial",
    "advance_single",
    "advance_three",
    "axis_index",
    "detector_coefficients",
    "measurement_record",
    "purity_iso_coefficients",
    "radial_coefficients",
    "radial_minimum",
    "record_increments",
    "settle_states",
    "single_detector_coefficients",
    "step_purity_iso",
    "step_radial",
    "step_single_detector",
    "step_three_detector",
    "three_detector_coefficients",
]
