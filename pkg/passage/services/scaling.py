"""Excess passage time of an inefficient detector as a function of ``a = delta / epsilon``."""
from __future__ import annotations

import logging
import math
import multiprocessing
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from passage.params import DIFFUSION_HIGH_PURITY, MtfpConfig
from passage.services.quadrature import _exp_or_inf, log_mtfp_quadrature, mtfp_quadrature
from purification.exceptions import (
    ConfigurationError,
    InconsistencyError,
    PurificationError,
    UnsupportedRegimeError,
    WorkerFailure,
)
from trajectories.services.ensemble import available_workers

logger = logging.getLogger(__name__)

ASYMPTOTIC_EPSILON_MAX = 1e-3
IDEAL_EPSILONS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
IDEAL_FIT_RESIDUAL_MAX = 0.02
NEGATIVE_EXCESS_TOLERANCE = 1e-9
EXPONENT_MIN_RATIO = 10.0


def _check_asymptotic(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= ASYMPTOTIC_EPSILON_MAX:
        raise UnsupportedRegimeError(
            f"epsilon={epsilon:g} is outside the high-purity regime (epsilon <= {ASYMPTOTIC_EPSILON_MAX:g})"
        )
    return epsilon


@dataclass(frozen=True)
class ScalingPoint:
    """``delta_T`` may be ``inf`` for large ``a``; ``log_delta_T`` is always representable."""

    a: float
    epsilon: float
    delta_T: float  # noqa: N815
    log_delta_T: float  # noqa: N815
    local_exponent: float | None = None

    def __post_init__(self) -> None:
        if self.a < 0.0:
            raise ConfigurationError(f"a must be non-negative, got {self.a}")
        if self.delta_T < 0.0:
            raise InconsistencyError(f"excess passage time is negative ({self.delta_T:g})")

    @property
    def delta(self) -> float:
        return self.a * self.epsilon

    def to_dict(self) -> dict[str, float | None]:
        return {
            "a": self.a,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "delta_T": self.delta_T,
            "log_delta_T": self.log_delta_T,
            "scaled_delta_T": 8.0 * self.delta_T,
            "local_exponent": self.local_exponent,
        }


def _base_config(epsilon: float, p0: float, gamma0: float, diffusion: str, rtol: float | None) -> MtfpConfig:
    return MtfpConfig(epsilon=epsilon, p0=p0, gamma0=gamma0, diffusion=diffusion, rtol=rtol)


def delta_T(  # noqa: N802
    a: float,
    epsilon: float,
    *,
    p0: float = 0.5,
    gamma0: float = 1.0,
    diffusion: str = DIFFUSION_HIGH_PURITY,
    rtol: float | None = None,
) -> ScalingPoint:
    """``T(delta = a epsilon, epsilon) - T(0, epsilon)``, formed from the two logarithms."""
    a = float(a)
    if not (a >= 0.0 and math.isfinite(a)):
        raise ConfigurationError(f"a must be non-negative and finite, got {a}")
    epsilon = _check_asymptotic(epsilon)
    if a == 0.0:
        return ScalingPoint(a=0.0, epsilon=epsilon, delta_T=0.0, log_delta_T=-math.inf)
    base = _base_config(epsilon, p0, gamma0, diffusion, rtol)
    log_ideal = log_mtfp_quadrature(base)
    log_inefficient = log_mtfp_quadrature(base.with_ratio(a))
    gap = log_inefficient - log_ideal
    if gap < 0.0:
        shortfall = _exp_or_inf(log_ideal) * -math.expm1(gap)
        if shortfall > NEGATIVE_EXCESS_TOLERANCE:
            raise InconsistencyError(f"inefficiency shortened the passage time by {shortfall:.3e} at a={a:g}")
        gap = 0.0
    log_excess = log_inefficient + math.log(-math.expm1(-gap)) if gap > 0.0 else -math.inf
    return ScalingPoint(a=a, epsilon=epsilon, delta_T=_exp_or_inf(log_excess), log_delta_T=log_excess)


def local_exponent(
    a: float,
    epsilon: float,
    *,
    p0: float = 0.5,
    gamma0: float = 1.0,
    diffusion: str = DIFFUSION_HIGH_PURITY,
    rtol: float | None = None,
) -> float:
    """Centred difference of ``ln delta_T`` in ``a`` with step ``max(1, 0.05 a)``."""
    if a < EXPONENT_MIN_RATIO:
        raise ConfigurationError(f"the local exponent is defined for a >= {EXPONENT_MIN_RATIO:g}, got {a}")
    step = max(1.0, 0.05 * a)
    options = {"p0": p0, "gamma0": gamma0, "diffusion": diffusion, "rtol": rtol}
    lower = delta_T(a - step, epsilon, **options)
    upper = delta_T(a + step, epsilon, **options)
    if not (math.isfinite(lower.log_delta_T) and math.isfinite(upper.log_delta_T)):
        raise InconsistencyError(f"excess passage time vanishes on the stencil around a={a:g}")
    return (upper.log_delta_T - lower.log_delta_T) / (2.0 * step)


@dataclass(frozen=True)
class IdealConstantFit:
    """``8 G0 T(0, eps) = slope ln(1/eps) + intercept``, and the unit-slope constant."""

    constant: float
    slope: float
    intercept: float
    residual: float
    epsilons: tuple[float, ...]

    def to_dict(self) -> dict[str, object]:
        return {
            "constant": self.constant,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "epsilons": list(self.epsilons),
        }


def fit_ideal_constant(
    epsilons: Sequence[float] = IDEAL_EPSILONS, *, p0: float = 0.5, gamma0: float = 1.0
) -> IdealConstantFit:
    epsilons = tuple(float(e) for e in epsilons)
    if len(epsilons) < 2:
        raise ConfigurationError("at least two epsilons are needed for the fit")
    for epsilon in epsilons:
        _check_asymptotic(epsilon)
    logs = np.log(1.0 / np.array(epsilons))
    scaled = np.array([8.0 * gamma0 * mtfp_quadrature(MtfpConfig(epsilon=e, p0=p0, gamma0=gamma0)) for e in epsilons])
    slope, intercept = np.polyfit(logs, scaled, 1)
    offsets = scaled - logs
    constant = float(offsets.mean())
    residual = float(np.abs(offsets - constant).max())
    if residual > IDEAL_FIT_RESIDUAL_MAX:
        raise InconsistencyError(f"8 G0 T - ln(1/eps) varies by {residual:.3f} across {epsilons}")
    return IdealConstantFit(constant, float(slope), float(intercept), residual, epsilons)


def mtfp_ideal_constant(epsilons: Sequence[float] = IDEAL_EPSILONS) -> float:
    """Constant ``c`` in ``T(0, eps) = (ln(1/eps) + c) / (8 G0)``."""
    return fit_ideal_constant(epsilons).constant


@dataclass(frozen=True)
class ScalingTask:
    epsilon: float
    a: float
    p0: float
    gamma0: float
    diffusion: str
    rtol: float | None
    exponent_min: float


def _run_scaling_task(task: ScalingTask) -> ScalingPoint:
    options = {"p0": task.p0, "gamma0": task.gamma0, "diffusion": task.diffusion, "rtol": task.rtol}
    point = delta_T(task.a, task.epsilon, **options)
    if task.a < max(task.exponent_min, EXPONENT_MIN_RATIO):
        return point
    exponent = local_exponent(task.a, task.epsilon, **options)
    return ScalingPoint(point.a, point.epsilon, point.delta_T, point.log_delta_T, exponent)


@dataclass
class ScalingStudy:
    epsilons: tuple[float, ...]
    a_grid: tuple[float, ...]
    points: list[ScalingPoint] = field(default_factory=list)

    def curve(self, epsilon: float) -> list[ScalingPoint]:
        return [point for point in self.points if point.epsilon == epsilon]

    def collapse(self, a_min: float = 0.0, a_max: float = math.inf) -> list[dict[str, float]]:
        """Largest relative gap between the curves of consecutive epsilons over ``(a_min, a_max]``."""
        rows = []
        for first, second in zip(self.epsilons, self.epsilons[1:]):
            pairs = [
                (p, q)
                for p, q in zip(self.curve(first), self.curve(second))
                if a_min < p.a <= a_max and p.log_delta_T > -math.inf
            ]
            gaps = [abs(math.expm1(p.log_delta_T - q.log_delta_T)) for p, q in pairs]
            rows.append({"epsilon": first, "reference": second, "sup_relative_gap": max(gaps, default=0.0)})
        return rows

    def log_linear_fit(self, epsilon: float, a_min: float, a_max: float) -> tuple[float, float, float]:
        """``(slope, intercept, r2)`` of ``ln delta_T`` against ``a`` on ``[a_min, a_max]``."""
        chosen = [p for p in self.curve(epsilon) if a_min <= p.a <= a_max]
        if len(chosen) < 3:
            raise ConfigurationError("at least three points are needed for the fit")
        a = np.array([p.a for p in chosen])
        log_dt = np.array([p.log_delta_T for p in chosen])
        slope, intercept = np.polyfit(a, log_dt, 1)
        residual = log_dt - (slope * a + intercept)
        r2 = 1.0 - float(residual @ residual) / float(((log_dt - log_dt.mean()) ** 2).sum())
        return float(slope), float(intercept), r2

    def rows(self) -> list[dict[str, float | None]]:
        return [point.to_dict() for point in self.points]


def scaling_study(
    epsilons: Iterable[float],
    a_grid: Iterable[float],
    *,
    workers: int | None = None,
    exponent_min: float = EXPONENT_MIN_RATIO,
    p0: float = 0.5,
    gamma0: float = 1.0,
    diffusion: str = DIFFUSION_HIGH_PURITY,
    rtol: float | None = None,
    start_method: str | None = None,
) -> ScalingStudy:
    """``delta_T`` for every ``(epsilon, a)`` pair, plus the local exponent where ``a >= exponent_min``.

    Points are returned epsilon-major in the order given, whatever the worker count.
    """
    epsilons = tuple(_check_asymptotic(e) for e in epsilons)
    a_grid = tuple(float(a) for a in a_grid)
    workers = available_workers() if workers is None else int(workers)
    if workers < 1:
        raise ConfigurationError(f"workers must be at least 1, got {workers}")
    tasks = [
        ScalingTask(epsilon, a, p0, gamma0, diffusion, rtol, exponent_min) for epsilon in epsilons for a in a_grid
    ]
    logger.info("Running scaling study", extra={"points": len(tasks), "workers": workers})
    try:
        if workers == 1 or len(tasks) <= 1:
            points = [_run_scaling_task(task) for task in tasks]
        else:
            context = multiprocessing.get_context(start_method)
            with context.Pool(processes=min(workers, len(tasks))) as pool:
                points = pool.map(_run_scaling_task, tasks)
    except PurificationError:
        logger.exception("Scaling point failed", extra={"points": len(tasks)})
        raise
    except Exception as exc:
        logger.exception("Scaling worker crashed", extra={"points": len(tasks)})
        raise WorkerFailure(f"scaling worker failed: {exc}") from exc
    return ScalingStudy(epsilons=epsilons, a_grid=a_grid, points=points)


__all__ = [
    "IDEAL_EPSILONS",
    "IdealConstantFit",
    "ScalingPoint",
    "ScalingStudy",
    "delta_T",
    "fit_ideal_constant",
    "local_exponent",
    "mtfp_ideal_constant",
    "scaling_study",
]
