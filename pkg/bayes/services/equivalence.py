"""Cross-check of the stochastic integrator against the exact finite-time update.

For a single z detector without feedback, integrating the SDE while summing
the record ``dR = z dt + dW / sqrt(2 gamma0)`` must land on the state that the
Bayes rule produces from the time-averaged record ``mu = R / tau``. The two
differ only by the integrator's strong error, which shrinks like ``sqrt(dt)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from bayes.kernel import PovmKernel
from bayes.services.update import QubitState, povm_update
from purification.exceptions import ConfigurationError
from trajectories.params import DetectorParams
from trajectories.services.noise import EnsembleNoise
from trajectories.services.simulation import step_count
from trajectories.services.stepping import EULER, advance_single

logger = logging.getLogger(__name__)

# gap tolerance is EQUIVALENCE_CONSTANT * sqrt(dt * gamma0)
EQUIVALENCE_CONSTANT = 4.0


@dataclass
class EquivalenceReport:
    z0: float
    tau: float
    dt: float
    seed: int
    constant: float
    gaps: np.ndarray
    z_sde: np.ndarray = field(repr=False)
    z_povm: np.ndarray = field(repr=False)

    @property
    def tolerance(self) -> float:
        return self.constant * math.sqrt(self.dt)

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0

    @property
    def median_gap(self) -> float:
        return float(np.median(self.gaps)) if self.gaps.size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.tolerance

    def to_dict(self) -> dict[str, object]:
        return {
            "z0": self.z0,
            "tau": self.tau,
            "dt": self.dt,
            "seed": self.seed,
            "paths": int(self.gaps.size),
            "constant": self.constant,
            "tolerance": self.tolerance,
            "max_gap": self.max_gap,
            "median_gap": self.median_gap,
            "passed": self.passed,
        }


def sde_povm_equivalence_check(
    z0: float,
    tau: float,
    dt: float,
    seed_count: int,
    *,
    seed: int = 0,
    gamma0: float = 1.0,
    constant: float = EQUIVALENCE_CONSTANT,
    scheme: str = EULER,
) -> EquivalenceReport:
    """Integrate ``seed_count`` noise paths and compare terminal ``z`` with the Bayes update.

    Path ``i`` uses the noise stream ``(seed, i)``. ``tau`` is rounded up to a
    whole number of steps. Plain Euler stepping is the default; inside
    ``|z| < 1/2`` the norm-consistent scheme takes the same step.
    """
    if not -1.0 <= z0 <= 1.0:
        raise ConfigurationError(f"initial z must lie in [-1, 1], got {z0}")
    if seed_count < 1:
        raise ConfigurationError("at least one noise path is required")
    if not (tau > 0.0 and dt > 0.0):
        raise ConfigurationError("tau and dt must be positive")
    params = DetectorParams(gamma0=gamma0)
    steps = step_count(tau, dt)
    window = steps * dt

    states = np.zeros((seed_count, 3))
    states[:, 2] = z0
    records = np.zeros(seed_count)
    noise = EnsembleNoise(seed, range(seed_count), dt, 1)
    block = None
    for step in range(steps):
        row = step % noise.chunk
        if row == 0:
            block = noise.next_block()
        increments = block[row, :, 0]
        records += states[:, 2] * dt + increments / math.sqrt(2.0 * gamma0)
        states = advance_single(states, params, 2, increments, dt, scheme)

    kernel = PovmKernel(gamma0, window)
    start = QubitState(0.5 * (1.0 + z0), 0.5 * (1.0 - z0))
    z_povm = np.array([povm_update(start, mu, kernel).to_bloch().z for mu in records / window])
    z_sde = states[:, 2]
    report = EquivalenceReport(
        z0=float(z0),
        tau=window,
        dt=float(dt),
        seed=int(seed),
        constant=float(constant) * math.sqrt(gamma0),
        gaps=np.abs(z_sde - z_povm),
        z_sde=z_sde,
        z_povm=z_povm,
    )
    logger.info("SDE/POVM equivalence check", extra=report.to_dict())
    return report


def convergence_order(
    z0: float,
    tau: float,
    dts,
    seed_count: int,
    *,
    seed: int = 0,
    gamma0: float = 1.0,
) -> tuple[float, list[EquivalenceReport]]:
    """Slope of ``ln(median gap)`` against ``ln dt`` over a ladder of step sizes."""
    reports = [sde_povm_equivalence_check(z0, tau, dt, seed_count, seed=seed, gamma0=gamma0) for dt in dts]
    medians = np.array([report.median_gap for report in reports])
    if np.any(medians <= 0.0):
        raise ConfigurationError("the gaps vanish identically; no convergence order to estimate")
    slope, _ = np.polyfit(np.log([report.dt for report in reports]), np.log(medians), 1)
    return float(slope), reports


__all__ = ["EQUIVALENCE_CONSTANT", "EquivalenceReport", "convergence_order", "sde_povm_equivalence_check"]
