"""Finite-volume integration of the purity Fokker-Planck equation.

The flux between neighbouring cells uses the exponentially fitted
(Scharfetter-Gummel) weights built from the closed-form stationary density,
so the sampled stationary law is an exact discrete fixed point and the
implicit step keeps densities non-negative. Both ends carry zero flux.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import exprel

from fokkerplanck.coeffs import FpeCoeffs
from fokkerplanck.grid import NEGATIVE_TOLERANCE, DensityGrid, cell_centres, default_floor
from protocols.mean_purity import naive_mean_purity
from purification.exceptions import (
    ConfigurationError,
    DeltaLimitError,
    QuadratureError,
    SchemeError,
    StepSizeError,
    UnattainablePurityError,
)
from trajectories.services.simulation import first_passage_time, step_count

logger = logging.getLogger(__name__)

IMPLICIT = "implicit"
EXPLICIT = "explicit"
SCHEMES = (IMPLICIT, EXPLICIT)
SCHEME_CHOICES = ((IMPLICIT, "Backward Euler"), (EXPLICIT, "Forward Euler with a CFL guard"))

DEFAULT_FPE_DT = 1e-3


def _bernoulli(x: np.ndarray) -> np.ndarray:
    """``x / (e^x - 1)``, finite for every real ``x``."""
    return 1.0 / exprel(x)


@dataclass(frozen=True)
class FluxOperator:
    """Tridiagonal generator ``L`` of ``dq/dt = L q`` on a cell grid.

    ``lower[k] = L[k+1, k]`` and ``upper[k] = L[k, k+1]``; every column sums to zero.
    """

    lower: np.ndarray = field(repr=False)
    diagonal: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, centres: np.ndarray, width: float, coeffs: FpeCoeffs) -> "FluxOperator":
        interfaces = centres[:-1] + 0.5 * width
        diffusion = coeffs.diffusion_u(interfaces) / width**2
        log_weight = coeffs.log_stationary_u(centres)
        step = np.diff(log_weight)
        if not np.all(np.isfinite(step)):
            raise SchemeError("the stationary weights are not finite on the grid")
        rightward = diffusion * _bernoulli(-step)
        leftward = diffusion * _bernoulli(step)
        diagonal = np.zeros(centres.size)
        diagonal[:-1] -= rightward
        diagonal[1:] -= leftward
        return cls(lower=rightward, diagonal=diagonal, upper=leftward)

    @property
    def fastest_rate(self) -> float:
        return float(-self.diagonal.min())

    def apply(self, q: np.ndarray) -> np.ndarray:
        out = self.diagonal * q
        out[:-1] += self.upper * q[1:]
        out[1:] += self.lower * q[:-1]
        return out

    def implicit_bands(self, dt: float) -> np.ndarray:
        """``I - dt L`` in the layout of ``scipy.linalg.solve_banded((1, 1), ...)``."""
        bands = np.zeros((3, self.diagonal.size))
        bands[0, 1:] = -dt * self.upper
        bands[1] = 1.0 - dt * self.diagonal
        bands[2, :-1] = -dt * self.lower
        return bands


def operator_for(density: DensityGrid, eta: float, gamma0: float = 1.0) -> FluxOperator:
    return FluxOperator.build(density.centres, density.width, FpeCoeffs(eta=eta, gamma0=gamma0))


def stationary_distribution(
    eta: float, cells: int | None = None, floor: float | None = None, gamma0: float = 1.0
) -> DensityGrid:
    """Stationary purity density, sampled at the cell centres and normalised on the grid."""
    coeffs = FpeCoeffs(eta=eta, gamma0=gamma0)
    if coeffs.eta == 1.0:
        raise DeltaLimitError("with an ideal detector the stationary distribution is a delta function at p = 1")
    centres, width = cell_centres(cells, floor)
    log_weight = coeffs.log_stationary_u(centres)
    weights = np.exp(log_weight - log_weight.max())
    total = weights.sum() * width
    if not (total > 0.0 and math.isfinite(total)):
        raise QuadratureError(f"stationary density for eta={eta} cannot be normalised")
    return DensityGrid(centres, width, weights / total)


def _check_positive(q: np.ndarray, time: float) -> None:
    lowest = float(q.min())
    if lowest < -NEGATIVE_TOLERANCE:
        raise SchemeError(f"density fell to {lowest:.3e} at t={time:g}")


def _steps(
    initial: DensityGrid,
    operator: FluxOperator,
    t_end: float,
    dt: float,
    scheme: str,
) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, q)`` after each of the steps that land exactly on ``t_end``."""
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ConfigurationError(f"dt must be positive and finite, got {dt}")
    steps = step_count(t_end, dt)
    if steps == 0:
        return
    dt = t_end / steps
    if scheme == EXPLICIT and dt * operator.fastest_rate > 1.0:
        raise StepSizeError(f"explicit step dt={dt:g} exceeds the stability limit {1.0 / operator.fastest_rate:.3e}")
    bands = operator.implicit_bands(dt) if scheme == IMPLICIT else None
    q = initial.values.copy()
    for n in range(1, steps + 1):
        if bands is not None:
            q = solve_banded((1, 1), bands, q)
        else:
            q = q + dt * operator.apply(q)
        time = initial.time + n * dt
        _check_positive(q, time)
        yield time, q


def evolve_density(
    initial: DensityGrid,
    eta: float,
    t_end: float,
    dt: float = DEFAULT_FPE_DT,
    *,
    scheme: str = IMPLICIT,
    gamma0: float = 1.0,
) -> DensityGrid:
    """Density at ``initial.time + t_end``; ``t_end = 0`` returns ``initial``."""
    operator = operator_for(initial, eta, gamma0)
    final = initial
    count = 0
    for time, q in _steps(initial, operator, t_end, dt, scheme):
        final = initial.evolved(q, time)
        count += 1
    logger.debug(
        "Evolved purity density",
        extra={"eta": eta, "t_end": t_end, "fpe_steps": count, "scheme": scheme, "cells": initial.cells},
    )
    return final


@dataclass(frozen=True)
class MeanPurityHistory:
    """Mean purity of an evolving density, with the naive closed-form curve alongside."""

    times: np.ndarray = field(repr=False)
    mean_purity: np.ndarray = field(repr=False)
    naive_mean_purity: np.ndarray = field(repr=False)
    final: DensityGrid = field(repr=False)

    @property
    def max_gap(self) -> float:
        return float(np.abs(self.mean_purity - self.naive_mean_purity).max())

    def to_frame_columns(self) -> dict[str, np.ndarray]:
        return {"time": self.times, "mean_purity_fp": self.mean_purity, "mean_purity_naive": self.naive_mean_purity}


def mean_purity_history(
    eta: float,
    p0: float,
    t_end: float,
    dt: float = DEFAULT_FPE_DT,
    *,
    cells: int | None = None,
    floor: float | None = None,
    width: float = 2.0,
    scheme: str = IMPLICIT,
    gamma0: float = 1.0,
) -> MeanPurityHistory:
    """Evolve a bump at ``p0`` and record ``<p>(t)`` after every step."""
    initial = DensityGrid.delta_bump(p0, cells, floor, width)
    operator = operator_for(initial, eta, gamma0)
    times = [0.0]
    means = [initial.mean_purity()]
    final = initial
    for time, q in _steps(initial, operator, t_end, dt, scheme):
        final = initial.evolved(q, time)
        times.append(time)
        means.append(final.mean_purity())
    times_arr = np.array(times)
    naive = naive_mean_purity(1.0 - eta, means[0], times_arr, gamma0=gamma0)
    return MeanPurityHistory(times_arr, np.array(means), np.atleast_1d(naive), final)


def mean_crossing_time(
    eta: float,
    epsilon: float,
    p0: float = 0.5,
    dt: float = DEFAULT_FPE_DT,
    *,
    horizon: float | None = None,
    cells: int | None = None,
    floor: float | None = None,
    width: float = 2.0,
    gamma0: float = 1.0,
) -> float:
    """First time the density's mean purity reaches ``1 - epsilon``, interpolated between steps."""
    if not 0.0 < epsilon < 0.5:
        raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    threshold = 1.0 - epsilon
    initial = DensityGrid.delta_bump(p0, cells, floor, width)
    if epsilon <= 2.0 * (default_floor() if floor is None else floor):
        raise ConfigurationError(f"epsilon={epsilon:g} is not resolved above the grid floor")
    if eta < 1.0 and stationary_distribution(eta, cells, floor, gamma0).mean_purity() <= threshold:
        raise UnattainablePurityError(f"the stationary mean purity for eta={eta} stays below {threshold}")
    if horizon is None:
        horizon = 4.0 * math.log(1.0 / epsilon) / gamma0
    operator = operator_for(initial, eta, gamma0)
    previous = (initial.time, initial.mean_purity())
    if previous[1] >= threshold:
        return 0.0
    for time, q in _steps(initial, operator, horizon, dt, IMPLICIT):
        mean = initial.evolved(q, time).mean_purity()
        if mean >= threshold:
            passage = first_passage_time([previous[1], mean], [previous[0], time], threshold)
            logger.info("Mean purity crossed threshold", extra={"eta": eta, "epsilon": epsilon, "time": passage.time})
            return passage.time
        previous = (time, mean)
    raise UnattainablePurityError(f"mean purity did not reach {threshold} within t={horizon:g}")


__all__ = [
    "EXPLICIT",
    "FluxOperator",
    "IMPLICIT",
    "MeanPurityHistory",
    "SCHEMES",
    "SCHEME_CHOICES",
    "evolve_density",
    "mean_crossing_time",
    "mean_purity_history",
    "operator_for",
    "stationary_distribution",
]
