"""Seeded trajectory ensembles executed over a process pool.

Trajectory ``i`` always draws from the noise stream of ``(seed, i)`` and the
stepping kernels act row by row, so merged results do not depend on the worker
count or on how the ensemble is cut into batches.
"""
from __future__ import annotations

import logging
import math
import multiprocessing
import os
from dataclasses import dataclass, field

import numpy as np

from blochstate.state import BlochVector, purities
from protocols.spec import ProtocolSpec
from purification.exceptions import ConfigurationError, PurificationError, WorkerFailure
from trajectories.services.noise import EnsembleNoise, chunk_steps
from trajectories.services.simulation import (
    advance_protocol,
    crossing_times,
    resolve_dt,
    step_count,
    validate_threshold,
)
from trajectories.services.stepping import NORM_CONSISTENT, advance_purity_iso

logger = logging.getLogger(__name__)


def available_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - platforms without affinity masks
        return os.cpu_count() or 1


@dataclass(frozen=True)
class BatchTask:
    protocol: ProtocolSpec
    start: int
    stop: int
    seed: int
    v0: tuple[float, float, float]
    dt: float
    steps: int
    sample_steps: tuple[int, ...]
    threshold: float | None
    scheme: str
    reduced: bool
    chunk: int
    halt_on_passage: bool


@dataclass
class BatchResult:
    start: int
    passage: np.ndarray
    samples: np.ndarray


def _run_batch(task: BatchTask) -> BatchResult:
    count = task.stop - task.start
    components = 1 if task.reduced else task.protocol.noise_components
    noise = EnsembleNoise(task.seed, range(task.start, task.stop), task.dt, components, task.chunk)

    v0 = np.asarray(task.v0, dtype=float)
    if task.reduced:
        detector = task.protocol.detector
        state = np.full(count, float(purities(v0)))
        p = state
    else:
        state = np.tile(v0, (count, 1))
        p = purities(state)

    samples = np.empty((count, len(task.sample_steps)))
    columns = {step: column for column, step in enumerate(task.sample_steps)}
    samples[:, 0] = p
    passage = np.full(count, np.nan)
    crossed = np.zeros(count, dtype=bool)
    if task.threshold is not None:
        crossed = p >= task.threshold
        passage[crossed] = 0.0

    block = None
    for step in range(task.steps):
        row = step % task.chunk
        if row == 0:
            block = noise.next_block()
        increments = block[row]
        p_prev = p
        if task.reduced:
            state = advance_purity_iso(state, detector, increments[:, 0], task.dt)
            p = state
        else:
            state = advance_protocol(task.protocol, state, increments, task.dt, task.scheme)
            p = purities(state)

        if task.threshold is not None:
            newly = ~crossed & (p >= task.threshold)
            if newly.any():
                passage[newly] = crossing_times(step * task.dt, p_prev[newly], p[newly], task.dt, task.threshold)
                crossed |= newly
            if task.halt_on_passage and crossed.all():
                break
        column = columns.get(step + 1)
        if column is not None:
            samples[:, column] = p
    return BatchResult(start=task.start, passage=passage, samples=samples)


@dataclass(frozen=True)
class PassageSummary:
    count: int
    censored: int
    mean: float
    std: float
    stderr: float

    def to_dict(self) -> dict[str, float | int]:
        return {
            "count": self.count,
            "censored": self.censored,
            "mean": self.mean,
            "std": self.std,
            "stderr": self.stderr,
        }


def _moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    count = values.shape[0]
    if count == 0:
        empty = np.full(values.shape[1:], np.nan)
        return empty, empty.copy()
    mean = values.mean(axis=0)
    if count == 1:
        return mean, np.full_like(mean, np.nan)
    return mean, values.std(axis=0, ddof=1) / math.sqrt(count)


@dataclass
class EnsembleResult:
    """Merged output of an ensemble run.

    ``purity_samples`` has one row per trajectory and one column per output time;
    ``passage_times`` is NaN for trajectories that never reached the threshold.
    """

    protocol: str
    seed: int
    dt: float
    horizon: float
    threshold: float | None
    times: np.ndarray
    purity_samples: np.ndarray
    passage_times: np.ndarray
    params: dict[str, object] = field(default_factory=dict)

    @property
    def trajectories(self) -> int:
        return int(self.passage_times.shape[0])

    @property
    def censored(self) -> np.ndarray:
        return np.isnan(self.passage_times)

    @property
    def mean_purity(self) -> np.ndarray:
        return _moments(self.purity_samples)[0]

    @property
    def stderr_purity(self) -> np.ndarray:
        return _moments(self.purity_samples)[1]

    def _log_entropy(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.clip(1.0 - self.purity_samples, 0.0, None))

    @property
    def mean_log_entropy(self) -> np.ndarray:
        return _moments(self._log_entropy())[0]

    @property
    def stderr_log_entropy(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return _moments(self._log_entropy())[1]

    def passage_summary(self) -> PassageSummary:
        finished = self.passage_times[~self.censored]
        censored = self.trajectories - finished.size
        if finished.size == 0:
            return PassageSummary(self.trajectories, censored, math.nan, math.nan, math.nan)
        std = float(finished.std(ddof=1)) if finished.size > 1 else math.nan
        return PassageSummary(
            count=self.trajectories,
            censored=censored,
            mean=float(finished.mean()),
            std=std,
            stderr=std / math.sqrt(finished.size) if finished.size > 1 else math.nan,
        )

    def to_dict(self) -> dict[str, object]:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "dt": self.dt,
            "horizon": self.horizon,
            "threshold": self.threshold,
            "trajectories": self.trajectories,
            "passage": self.passage_summary().to_dict() if self.threshold is not None else None,
        }


class EnsembleRunner:
    """Run ``N`` seeded trajectories of one protocol and merge them in index order.

    ``reduced=True`` steps the scalar purity equation instead of the Bloch vector;
    it is available for the isotropic protocol with identical detectors only.
    ``halt_on_passage`` stops a batch once all of its trajectories have crossed
    the threshold, in which case only the passage times are meaningful.
    """

    batch_size: int = 500
    output_points: int = 201
    start_method: str | None = None

    def __init__(
        self,
        protocol: ProtocolSpec,
        *,
        seed: int | None,
        dt: float | None = None,
        horizon: float = 1.0,
        threshold: float | None = None,
        workers: int | None = None,
        scheme: str = NORM_CONSISTENT,
        reduced: bool = False,
        halt_on_passage: bool = False,
        output_points: int | None = None,
    ) -> None:
        if seed is None:
            raise ConfigurationError("a seed is required for ensemble runs")
        if isinstance(seed, bool) or int(seed) != seed or seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}")
        if reduced and not (protocol.is_isotropic and protocol.has_identical_detectors):
            raise ConfigurationError("the reduced purity equation needs three identical detectors")
        if halt_on_passage and threshold is None:
            raise ConfigurationError("halting on passage needs a purity threshold")
        self.protocol = protocol
        self.seed = int(seed)
        self.dt = resolve_dt(dt, protocol)
        self.horizon = float(horizon)
        self.steps = step_count(self.horizon, self.dt)
        self.threshold = validate_threshold(threshold)
        self.workers = available_workers() if workers is None else int(workers)
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        self.scheme = scheme
        self.reduced = reduced
        self.halt_on_passage = halt_on_passage
        if output_points is not None:
            self.output_points = int(output_points)
        if self.output_points < 2:
            raise ConfigurationError("at least two output points are required")

    def sample_steps(self) -> tuple[int, ...]:
        """Step indices of the uniform output grid.

        The stride is the smallest divisor of the step count that keeps the grid
        within ``output_points``, so the grid always ends on the last step.
        """
        if self.halt_on_passage:
            return (0,)
        minimum = max(1, math.ceil(self.steps / (self.output_points - 1)))
        stride = next((s for s in range(minimum, self.steps + 1) if self.steps % s == 0), 1)
        return tuple(range(0, self.steps + 1, stride))

    def tasks(self, trajectories: int, v0: BlochVector) -> list[BatchTask]:
        sample_steps = self.sample_steps()
        chunk = chunk_steps()
        start = v0.validated().as_array()
        return [
            BatchTask(
                protocol=self.protocol,
                start=first,
                stop=min(first + self.batch_size, trajectories),
                seed=self.seed,
                v0=(float(start[0]), float(start[1]), float(start[2])),
                dt=self.dt,
                steps=self.steps,
                sample_steps=sample_steps,
                threshold=self.threshold,
                scheme=self.scheme,
                reduced=self.reduced,
                chunk=chunk,
                halt_on_passage=self.halt_on_passage,
            )
            for first in range(0, trajectories, self.batch_size)
        ]

    def run(self, trajectories: int, v0: BlochVector | None = None) -> EnsembleResult:
        if trajectories < 0:
            raise ConfigurationError(f"trajectory count must be non-negative, got {trajectories}")
        v0 = BlochVector.origin() if v0 is None else v0
        tasks = self.tasks(trajectories, v0)
        logger.info(
            "Running trajectory ensemble",
            extra={
                "protocol": self.protocol.kind,
                "trajectories": trajectories,
                "seed": self.seed,
                "workers": self.workers,
                "batches": len(tasks),
                "steps": self.steps,
            },
        )
        batches = self._execute(tasks)
        batches.sort(key=lambda batch: batch.start)
        sample_steps = self.sample_steps()
        if batches:
            passage = np.concatenate([batch.passage for batch in batches])
            samples = np.concatenate([batch.samples for batch in batches])
        else:
            passage = np.empty(0)
            samples = np.empty((0, len(sample_steps)))
        return EnsembleResult(
            protocol=self.protocol.kind,
            seed=self.seed,
            dt=self.dt,
            horizon=self.horizon,
            threshold=self.threshold,
            times=np.asarray(sample_steps, dtype=float) * self.dt,
            purity_samples=samples,
            passage_times=passage,
            params=self.protocol.to_dict(),
        )

    def _execute(self, tasks: list[BatchTask]) -> list[BatchResult]:
        try:
            if self.workers == 1 or len(tasks) <= 1:
                return [_run_batch(task) for task in tasks]
            context = multiprocessing.get_context(self.start_method)
            with context.Pool(processes=min(self.workers, len(tasks))) as pool:
                return pool.map(_run_batch, tasks)
        except PurificationError:
            logger.exception("Ensemble batch failed", extra={"seed": self.seed, "protocol": self.protocol.kind})
            raise
        except Exception as exc:
            logger.exception("Ensemble worker crashed", extra={"seed": self.seed, "protocol": self.protocol.kind})
            raise WorkerFailure(f"ensemble worker failed: {exc}") from exc


__all__ = [
    "BatchResult",
    "BatchTask",
    "EnsembleResult",
    "EnsembleRunner",
    "PassageSummary",
    "available_workers",
]
