"""Single trajectories of a protocol and first-passage detection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from blochstate.rotations import PERPENDICULAR
from blochstate.state import BlochVector, purities
from protocols.control import apply_feedback
from protocols.spec import ProtocolSpec
from purification.exceptions import ConfigurationError
from trajectories.params import DetectorParams, MeasurementRecord
from trajectories.services.noise import NoiseStream, chunk_steps
from trajectories.services.stepping import NORM_CONSISTENT, advance_single, advance_three, record_increments

DEFAULT_DT = 1e-3
MAX_DT = 1e-2


def default_dt() -> float:
    return float(getattr(settings, "PURIFICATION_DEFAULT_DT", DEFAULT_DT))


def resolve_dt(dt: float | None, protocol: ProtocolSpec) -> float:
    """Validate ``dt`` against the hard cap ``dt * gamma0 <= PURIFICATION_MAX_DT``."""
    dt = default_dt() if dt is None else float(dt)
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ConfigurationError(f"dt must be positive and finite, got {dt}")
    cap = float(getattr(settings, "PURIFICATION_MAX_DT", MAX_DT))
    fastest = max(d.gamma0 for d in protocol.detectors)
    if dt * fastest > cap:
        raise ConfigurationError(f"dt * gamma0 = {dt * fastest:g} exceeds the cap {cap:g}")
    return dt


def step_count(horizon: float, dt: float) -> int:
    if not (horizon >= 0.0 and math.isfinite(horizon)):
        raise ConfigurationError(f"horizon must be non-negative and finite, got {horizon}")
    return int(math.ceil(horizon / dt - 1e-9))


def validate_threshold(stop: float | None) -> float | None:
    if stop is None:
        return None
    stop = float(stop)
    if not 0.5 < stop <= 1.0:
        raise ConfigurationError(f"purity threshold must lie in (1/2, 1], got {stop}")
    return stop


@dataclass(frozen=True)
class FirstPassage:
    """First time a purity series reaches a threshold.

    A censored passage never crossed; ``time`` is then the end of the horizon.
    """

    time: float
    censored: bool = False

    def to_dict(self) -> dict[str, object]:
        return {"time": self.time, "censored": self.censored}


def crossing_times(t_prev, p_prev, p_next, dt: float, threshold: float) -> np.ndarray:
    """Linear interpolation of the crossing inside ``[t_prev, t_prev + dt]``."""
    p_prev = np.asarray(p_prev, dtype=float)
    p_next = np.asarray(p_next, dtype=float)
    rise = p_next - p_prev
    fraction = np.divide(threshold - p_prev, rise, out=np.ones_like(rise), where=rise > 0.0)
    return np.asarray(t_prev) + np.clip(fraction, 0.0, 1.0) * dt


def first_passage_time(p_series, times, threshold: float) -> FirstPassage:
    p = np.asarray(p_series, dtype=float)
    t = np.asarray(times, dtype=float)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise ConfigurationError("purity series and times must be non-empty and of equal length")
    above = np.flatnonzero(p >= threshold)
    if above.size == 0:
        return FirstPassage(float(t[-1]), censored=True)
    k = int(above[0])
    if k == 0:
        return FirstPassage(float(t[0]))
    time = crossing_times(t[k - 1], p[k - 1], p[k], t[k] - t[k - 1], threshold)
    return FirstPassage(float(time))


def advance_protocol(
    protocol: ProtocolSpec, states: np.ndarray, increments: np.ndarray, dt: float, scheme: str = NORM_CONSISTENT
) -> np.ndarray:
    """Feedback rotation at the start of the interval, then one measurement step.

    ``increments`` has shape ``(N, protocol.noise_components)``.
    """
    return measure_step(protocol, apply_feedback(protocol, states), increments, dt, scheme)


def measure_step(
    protocol: ProtocolSpec, states: np.ndarray, increments: np.ndarray, dt: float, scheme: str = NORM_CONSISTENT
) -> np.ndarray:
    if protocol.is_isotropic:
        return advance_three(states, protocol.detectors, increments, dt, scheme)
    # perpendicular feedback keeps the purity noise-free from the mixed state on
    quiet_origin = protocol.feedback_mode == PERPENDICULAR
    return advance_single(
        states, protocol.detectors[0], protocol.axis, increments[:, 0], dt, scheme, quiet_origin=quiet_origin
    )


def record_signal(protocol: ProtocolSpec, states: np.ndarray) -> np.ndarray:
    """Expectation values seen by the detectors, shape ``(N, components)``."""
    if protocol.is_isotropic:
        return states
    return states[:, protocol.axis : protocol.axis + 1]


@dataclass
class TrajectoryRecord:
    protocol: str
    seed: int
    index: int
    dt: float
    times: np.ndarray
    states: np.ndarray
    records: np.ndarray | None = None
    passage: FirstPassage | None = None
    params: tuple[DetectorParams, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float).reshape(-1, 3)
        if self.times.shape[0] != self.states.shape[0]:
            raise ConfigurationError("one state per recorded time is required")
        if np.any(np.diff(self.times) <= 0.0):
            raise ConfigurationError("trajectory times must be strictly increasing")

    @property
    def purities(self) -> np.ndarray:
        return purities(self.states)

    @property
    def final_state(self) -> BlochVector:
        return BlochVector.from_array(self.states[-1])

    def state(self, i: int) -> BlochVector:
        return BlochVector.from_array(self.states[i])

    def measurement_record(self, component: int = 0) -> MeasurementRecord:
        if self.records is None:
            raise ConfigurationError("this trajectory was simulated without measurement records")
        return MeasurementRecord.from_increments(self.records[:, component], self.dt)

    def to_dict(self) -> dict[str, object]:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "index": self.index,
            "dt": self.dt,
            "steps": int(self.times.size - 1),
            "final_purity": float(self.purities[-1]),
            "passage": None if self.passage is None else self.passage.to_dict(),
        }


def simulate_trajectory(
    v0: BlochVector,
    protocol: ProtocolSpec,
    params: DetectorParams | None = None,
    *,
    dt: float | None = None,
    horizon: float = 1.0,
    stop: float | None = None,
    seed: int = 0,
    index: int = 0,
    scheme: str = NORM_CONSISTENT,
    keep_records: bool = True,
) -> TrajectoryRecord:
    """Step ``protocol`` from ``v0`` until ``horizon`` or the first passage of ``stop``.

    ``params`` replaces the protocol's detectors when given. The noise comes from
    the stream of trajectory ``index`` under ``seed``, the same stream the
    ensemble runner gives that trajectory.
    """
    if params is not None:
        protocol = protocol.with_detectors(params)
    dt = resolve_dt(dt, protocol)
    steps = step_count(horizon, dt)
    stop = validate_threshold(stop)
    components = protocol.noise_components

    state = v0.validated().as_array()[None, :]
    times = [0.0]
    history = [state[0].copy()]
    records: list[np.ndarray] = []
    passage = None
    p_prev = float(purities(state)[0])
    if stop is not None and p_prev >= stop:
        passage = FirstPassage(0.0)
        steps = 0

    noise = NoiseStream(seed, index, dt, components)
    chunk = chunk_steps()
    block = np.empty((0, components))
    for step in range(steps):
        row = step % chunk
        if row == 0:
            block = noise.block(chunk)
        increments = block[row][None, :]
        state = apply_feedback(protocol, state)
        if keep_records:
            signal = record_signal(protocol, state)
            records.append(_record_row(protocol, signal[0], increments[0], dt))
        state = measure_step(protocol, state, increments, dt, scheme)
        t = (step + 1) * dt
        times.append(t)
        history.append(state[0].copy())
        p_next = float(purities(state)[0])
        if stop is not None and p_next >= stop:
            passage = FirstPassage(float(crossing_times(t - dt, p_prev, p_next, dt, stop)))
            break
        p_prev = p_next

    if stop is not None and passage is None:
        passage = FirstPassage(times[-1], censored=True)
    return TrajectoryRecord(
        protocol=protocol.kind,
        seed=int(seed),
        index=int(index),
        dt=dt,
        times=np.array(times),
        states=np.array(history),
        records=np.array(records).reshape(-1, components) if keep_records else None,
        passage=passage,
        params=protocol.detectors,
    )


def _record_row(protocol: ProtocolSpec, signal: np.ndarray, increments: np.ndarray, dt: float) -> np.ndarray:
    return np.array(
        [
            record_increments(signal[k], detector, increments[k], dt)
            for k, detector in enumerate(protocol.detectors)
        ],
        dtype=float,
    )


__all__ = [
    "FirstPassage",
    "TrajectoryRecord",
    "advance_protocol",
    "crossing_times",
    "default_dt",
    "first_passage_time",
    "measure_step",
    "record_signal",
    "resolve_dt",
    "simulate_trajectory",
    "step_count",
    "validate_threshold",
]
