from __future__ import annotations

import math

import numpy as np
import pytest

from blochstate.state import BlochVector
from protocols.spec import PROTOCOL_JACOBS, PROTOCOL_PARALLEL, PROTOCOL_WISEMAN_RALPH, ProtocolSpec
from purification.exceptions import ConfigurationError
from trajectories.params import DetectorParams, NoiseIncrement
from trajectories.services.simulation import (
    TrajectoryRecord,
    first_passage_time,
    simulate_trajectory,
)
from trajectories.services.stepping import step_single_detector

DT = 1e-3
PARALLEL = ProtocolSpec.build(PROTOCOL_PARALLEL)
JACOBS = ProtocolSpec.build(PROTOCOL_JACOBS)
WISEMAN_RALPH = ProtocolSpec.build(PROTOCOL_WISEMAN_RALPH)


class TestFirstPassageTime:
    def test_series_starting_above_threshold_passes_at_zero(self):
        result = first_passage_time([0.9, 0.9, 0.9], [0.0, 0.5, 1.0], 0.8)
        assert result.time == 0.0 and not result.censored

    def test_linear_series_is_interpolated_exactly(self):
        times = np.array([0.0, 1 / 3, 2 / 3, 1.0])
        result = first_passage_time(0.5 + 0.5 * times, times, 0.75)
        assert result.time == pytest.approx(0.5, abs=1e-14)

    def test_series_that_never_crosses_is_censored(self):
        result = first_passage_time([0.5, 0.6, 0.7], [0.0, 1.0, 2.0], 0.99)
        assert result.censored
        assert result.time == 2.0

    def test_sampled_jacobs_solution_matches_closed_form_inversion(self):
        p0, epsilon = 0.5, 1e-3
        times = np.arange(0, 5001) * DT
        series = 1.0 - (1.0 - p0) * np.exp(-2.0 * times)
        result = first_passage_time(series, times, 1.0 - epsilon)
        assert result.time == pytest.approx(0.5 * math.log((1.0 - p0) / epsilon), abs=DT)

    def test_mismatched_lengths_are_rejected(self):
        with pytest.raises(ConfigurationError):
            first_passage_time([0.5, 0.6], [0.0], 0.55)


class TestSimulateTrajectory:
    def test_zero_horizon_returns_the_initial_state(self):
        v0 = BlochVector(0.1, 0.2, 0.3)
        record = simulate_trajectory(v0, PARALLEL, horizon=0.0, seed=1)
        assert record.times.tolist() == [0.0]
        assert record.final_state == v0
        assert record.records.shape == (0, 1)

    def test_jacobs_purity_is_deterministic(self):
        record = simulate_trajectory(BlochVector.origin(), JACOBS, horizon=2.0, seed=4)
        steps = np.arange(record.times.size)
        assert record.purities == pytest.approx(1.0 - 0.5 * (1.0 - 2.0 * DT) ** steps, abs=1e-12)
        exact = 1.0 - 0.5 * np.exp(-2.0 * record.times)
        assert np.all(np.abs(record.purities - exact) <= DT * np.maximum(record.times, DT))

    def test_jacobs_from_any_seed_gives_the_same_purities(self):
        protocol = ProtocolSpec.build(PROTOCOL_JACOBS, DetectorParams.from_efficiency(0.8))
        a = simulate_trajectory(BlochVector(0.0, 0.3, 0.2), protocol, horizon=1.0, seed=1)
        b = simulate_trajectory(BlochVector(0.0, 0.3, 0.2), protocol, horizon=1.0, seed=2)
        assert a.purities == pytest.approx(b.purities, abs=1e-13)

    def test_records_share_the_state_noise(self):
        params = DetectorParams(gamma0=1.5)
        protocol = ProtocolSpec.build(PROTOCOL_PARALLEL, params)
        record = simulate_trajectory(BlochVector(0.0, 0.0, 0.2), protocol, horizon=0.2, seed=8)
        state = record.state(0)
        for step, dR in enumerate(record.records[:, 0]):
            dW = (dR - state.z * DT) * math.sqrt(2.0 * params.gamma0)
            state = step_single_detector(state, params, "z", NoiseIncrement(dW, DT))
            assert state.as_array() == pytest.approx(record.states[step + 1], abs=1e-12)

    def test_measurement_record_average(self):
        record = simulate_trajectory(BlochVector(0.0, 0.0, 1.0), PARALLEL, horizon=1.0, seed=3)
        mu = record.measurement_record().mu
        assert mu == pytest.approx(1.0, abs=4.0 / math.sqrt(2.0 * record.measurement_record().tau))

    def test_stops_at_first_passage(self):
        record = simulate_trajectory(
            BlochVector.origin(), JACOBS, horizon=10.0, stop=0.99, seed=2
        )
        assert not record.passage.censored
        assert record.purities[-1] >= 0.99 > record.purities[-2]
        assert record.times[-2] <= record.passage.time <= record.times[-1]

    def test_start_above_threshold_passes_immediately(self):
        record = simulate_trajectory(BlochVector(0.0, 0.0, 1.0), WISEMAN_RALPH, stop=0.9, seed=0)
        assert record.passage.time == 0.0
        assert record.times.size == 1

    def test_unreached_threshold_is_censored(self):
        record = simulate_trajectory(BlochVector.origin(), JACOBS, horizon=0.1, stop=0.999, seed=0)
        assert record.passage.censored
        assert record.passage.time == pytest.approx(0.1)

    def test_params_override_protocol_detectors(self):
        record = simulate_trajectory(
            BlochVector.origin(), PARALLEL, DetectorParams.from_efficiency(0.5), horizon=0.01, seed=0
        )
        assert record.params[0].eta == pytest.approx(0.5)

    def test_step_above_cap_is_rejected(self):
        with pytest.raises(ConfigurationError):
            simulate_trajectory(BlochVector.origin(), PARALLEL, dt=0.05, seed=0)

    def test_wiseman_ralph_keeps_the_state_on_the_axis(self):
        record = simulate_trajectory(BlochVector(0.3, 0.4, 0.0), WISEMAN_RALPH, horizon=0.5, seed=6)
        assert not record.states[1:, :2].any()

    def test_trajectory_times_must_increase(self):
        with pytest.raises(ConfigurationError):
            TrajectoryRecord(protocol="parallel", seed=0, index=0, dt=DT, times=[0.0, 0.0], states=np.zeros((2, 3)))
