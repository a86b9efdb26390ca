from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from blochstate.state import BlochVector
from protocols.spec import (
    PROTOCOL_ISOTROPIC,
    PROTOCOL_JACOBS,
    PROTOCOL_KINDS,
    PROTOCOL_PARALLEL,
    PROTOCOL_WISEMAN_RALPH,
    ProtocolSpec,
)
from purification.exceptions import ConfigurationError, IntegratorOvershootError
from trajectories.params import DetectorParams
from trajectories.services.ensemble import EnsembleRunner
from trajectories.services.noise import trajectory_generator
from trajectories.services.simulation import simulate_trajectory
from trajectories.services.stepping import EULER, advance_radial

DT = 1e-3


def _runner(kind: str = PROTOCOL_PARALLEL, params: DetectorParams | None = None, **kwargs) -> EnsembleRunner:
    kwargs.setdefault("seed", 11)
    kwargs.setdefault("workers", 1)
    return EnsembleRunner(ProtocolSpec.build(kind, params), **kwargs)


class TestEnsembleRunner:
    def test_output_does_not_depend_on_workers_or_batching(self):
        single = _runner(PROTOCOL_WISEMAN_RALPH, horizon=0.3, threshold=0.7, output_points=11)
        single.batch_size = 64
        pooled = _runner(PROTOCOL_WISEMAN_RALPH, horizon=0.3, threshold=0.7, output_points=11, workers=3)
        pooled.batch_size = 7
        a = single.run(50, BlochVector(0.0, 0.0, 0.2))
        b = pooled.run(50, BlochVector(0.0, 0.0, 0.2))
        assert np.array_equal(a.purity_samples, b.purity_samples)
        assert np.array_equal(a.passage_times, b.passage_times, equal_nan=True)

    def test_trajectory_matches_the_single_run_with_its_index(self):
        result = _runner(PROTOCOL_PARALLEL, horizon=0.4, output_points=5).run(6, BlochVector(0.1, 0.0, 0.3))
        record = simulate_trajectory(
            BlochVector(0.1, 0.0, 0.3), ProtocolSpec.build(PROTOCOL_PARALLEL), horizon=0.4, seed=11, index=4
        )
        assert result.purity_samples[4, -1] == pytest.approx(record.purities[-1], abs=1e-12)

    def test_empty_ensemble(self):
        result = _runner(threshold=0.9).run(0)
        assert result.trajectories == 0
        assert result.purity_samples.shape == (0, result.times.size)
        assert np.isnan(result.mean_purity).all()
        assert result.passage_summary().count == 0

    def test_output_grid_is_uniform_and_spans_the_horizon(self):
        result = _runner(horizon=0.5, output_points=11).run(3)
        assert result.times[0] == 0.0
        assert result.times[-1] == pytest.approx(0.5)
        assert np.allclose(np.diff(result.times), 0.05)

    def test_output_stride_divides_the_step_count(self):
        runner = _runner(horizon=0.7, output_points=4)
        assert runner.sample_steps() == (0, 350, 700)
        result = runner.run(2)
        assert result.times[-1] == pytest.approx(0.7)
        assert np.allclose(np.diff(result.times), 0.35)

    def test_prime_step_count_keeps_only_the_ends(self):
        assert _runner(horizon=0.997, output_points=50).sample_steps() == (0, 997)

    def test_seed_is_mandatory(self):
        with pytest.raises(ConfigurationError):
            _runner(seed=None)

    def test_reduced_mode_needs_identical_isotropic_detectors(self):
        with pytest.raises(ConfigurationError):
            _runner(PROTOCOL_JACOBS, reduced=True)

    def test_numerical_failures_propagate(self):
        runner = _runner(PROTOCOL_PARALLEL, horizon=0.01, scheme=EULER, dt=1e-2)
        with pytest.raises(IntegratorOvershootError):
            runner.run(200, BlochVector(1.0, 0.0, 0.0))

    def test_jacobs_passage_times_are_deterministic(self):
        result = _runner(PROTOCOL_JACOBS, horizon=4.0, threshold=1.0 - 1e-3, halt_on_passage=True).run(100)
        summary = result.passage_summary()
        assert summary.censored == 0
        assert summary.std < 2.0 * DT
        assert summary.mean == pytest.approx(0.5 * math.log(500.0), abs=4.0 * DT)

    @pytest.mark.parametrize("kind", PROTOCOL_KINDS)
    def test_pure_states_stay_pure_for_every_protocol(self, kind):
        result = _runner(kind, horizon=1.0, output_points=21).run(40, BlochVector(0.6, 0.0, 0.8))
        assert np.abs(result.purity_samples - 1.0).max() < 1e-9

    def test_log_entropy_moments_follow_the_samples(self):
        result = _runner(PROTOCOL_ISOTROPIC, horizon=0.2, output_points=3).run(30)
        expected = np.log(1.0 - result.purity_samples).mean(axis=0)
        assert result.mean_log_entropy == pytest.approx(expected)
        assert result.stderr_purity.shape == result.times.shape


class TestReducedDynamics:
    def test_reduced_purity_matches_full_isotropic_dynamics(self):
        params = DetectorParams.from_efficiency(0.9)
        full = _runner(PROTOCOL_ISOTROPIC, params, horizon=0.5, output_points=2).run(3000)
        reduced = _runner(PROTOCOL_ISOTROPIC, params, horizon=0.5, output_points=2, reduced=True, seed=12).run(3000)
        assert stats.ks_2samp(full.purity_samples[:, -1], reduced.purity_samples[:, -1]).pvalue > 0.01

    def test_radial_stepping_matches_three_detector_radius(self):
        params = DetectorParams.from_efficiency(0.9)
        count, horizon = 3000, 2.0
        full = _runner(PROTOCOL_ISOTROPIC, params, horizon=horizon, output_points=2, seed=5).run(
            count, BlochVector(0.0, 0.0, 0.5)
        )
        radius_full = np.sqrt(2.0 * full.purity_samples[:, -1] - 1.0)
        rng = trajectory_generator(6, 0)
        radius = np.full(count, 0.5)
        for _ in range(int(round(horizon / DT))):
            radius = advance_radial(radius, params, rng.standard_normal(count) * math.sqrt(DT), DT)
        assert stats.ks_2samp(radius_full, radius).pvalue > 0.01
