from __future__ import annotations

import numpy as np
import pytest

from fokkerplanck.grid import DensityGrid, density_mean_purity
from fokkerplanck.services.evolution import (
    EXPLICIT,
    FluxOperator,
    _check_positive,
    evolve_density,
    mean_crossing_time,
    mean_purity_history,
    operator_for,
    stationary_distribution,
)
from protocols.mean_purity import stationary_mean_purity
from protocols.spec import PROTOCOL_ISOTROPIC
from protocols.timescales import REGIME_EXACT, analytic_time_mean_purity
from purification.exceptions import (
    ConfigurationError,
    DeltaLimitError,
    SchemeError,
    StepSizeError,
    UnattainablePurityError,
)


class TestFluxOperator:
    @pytest.mark.parametrize("eta", [1.0, 0.9])
    def test_columns_sum_to_zero(self, eta):
        operator = operator_for(DensityGrid.uniform(cells=120), eta)
        column_sums = operator.diagonal.copy()
        column_sums[:-1] += operator.lower
        column_sums[1:] += operator.upper
        assert np.max(np.abs(column_sums)) <= 1e-12 * operator.fastest_rate

    def test_off_diagonals_are_non_negative(self):
        operator = operator_for(DensityGrid.uniform(), 0.8)
        assert np.all(operator.lower >= 0.0)
        assert np.all(operator.upper >= 0.0)

    def test_stationary_density_is_in_the_kernel(self):
        stationary = stationary_distribution(0.9)
        residual = operator_for(stationary, 0.9).apply(stationary.values)
        assert np.abs(residual).sum() * stationary.width < 1e-8

    def test_apply_matches_the_bands(self):
        grid = DensityGrid.delta_bump(0.7, cells=40)
        operator = operator_for(grid, 1.0)
        dense = np.diag(operator.diagonal) + np.diag(operator.upper, 1) + np.diag(operator.lower, -1)
        assert operator.apply(grid.values) == pytest.approx(dense @ grid.values)
        assert isinstance(operator, FluxOperator)


class TestStationaryDistribution:
    @pytest.mark.parametrize("eta", [0.5, 0.8, 0.9, 0.999])
    def test_normalized(self, eta):
        assert stationary_distribution(eta).mass == pytest.approx(1.0, abs=1e-8)

    def test_mean_is_close_to_the_naive_fixed_point(self):
        assert density_mean_purity(stationary_distribution(0.9)) == pytest.approx(
            stationary_mean_purity(0.9), abs=0.01
        )

    def test_nearly_ideal_detector(self):
        assert stationary_distribution(0.99).mean_purity() == pytest.approx(0.995, abs=0.002)

    def test_concentrates_at_the_pure_state_as_eta_approaches_one(self):
        laws = [stationary_distribution(eta) for eta in (0.99, 0.999, 0.9999)]
        means = [law.mean_purity() for law in laws]
        variances = [law.purity_variance() for law in laws]
        assert means[0] < means[1] < means[2] < 1.0
        assert variances[0] > variances[1] > variances[2]

    def test_ideal_detector_has_no_stationary_law(self):
        with pytest.raises(DeltaLimitError):
            stationary_distribution(1.0)


class TestEvolveDensity:
    def test_zero_time_returns_the_initial_density(self):
        initial = DensityGrid.delta_bump(0.6)
        assert evolve_density(initial, 0.9, 0.0) is initial

    @pytest.mark.parametrize("eta", [1.0, 0.9])
    def test_conserves_mass(self, eta):
        final = evolve_density(DensityGrid.delta_bump(0.5), eta, 2.0, dt=1e-3)
        assert final.time == pytest.approx(2.0)
        assert abs(final.mass - 1.0) < 2e-8

    def test_stationary_law_is_a_fixed_point(self):
        stationary = stationary_distribution(0.9)
        after = evolve_density(stationary, 0.9, 10.0, dt=10.0)
        assert after.l1_distance(stationary) < 1e-3

    def test_relaxes_to_the_stationary_law(self):
        final = evolve_density(DensityGrid.delta_bump(0.5), 0.9, 20.0, dt=1e-2)
        assert final.l1_distance(stationary_distribution(0.9)) < 0.01

    def test_ideal_detector_purifies(self):
        final = evolve_density(DensityGrid.delta_bump(0.5), 1.0, 1.0, dt=1e-3)
        assert final.mean_purity() > 0.95

    def test_explicit_and_implicit_steps_agree(self):
        initial = DensityGrid.delta_bump(0.6)
        explicit = evolve_density(initial, 1.0, 0.2, dt=1e-4, scheme=EXPLICIT)
        implicit = evolve_density(initial, 1.0, 0.2, dt=1e-4)
        assert explicit.l1_distance(implicit) < 1e-2

    def test_explicit_step_beyond_stability_is_refused(self):
        with pytest.raises(StepSizeError):
            evolve_density(DensityGrid.delta_bump(0.6), 1.0, 0.1, dt=1e-3, scheme=EXPLICIT)

    def test_unknown_scheme(self):
        with pytest.raises(ConfigurationError):
            evolve_density(DensityGrid.delta_bump(0.6), 1.0, 0.1, scheme="leapfrog")

    def test_negative_density_is_a_scheme_error(self):
        _check_positive(np.array([0.0, -1e-13]), 0.1)
        with pytest.raises(SchemeError):
            _check_positive(np.array([0.3, -1e-9]), 0.1)


class TestMeanPurity:
    def test_history_tracks_the_naive_equation(self):
        history = mean_purity_history(0.95, 0.5, 3.0, dt=1e-3)
        assert history.times[0] == 0.0
        assert history.times[-1] == pytest.approx(3.0)
        assert history.max_gap < 0.02

    def test_ideal_history_is_increasing(self):
        history = mean_purity_history(1.0, 0.5, 1.0, dt=1e-3)
        assert np.all(np.diff(history.mean_purity) > 0.0)

    def test_history_columns(self):
        columns = mean_purity_history(0.9, 0.5, 0.1, dt=1e-2).to_frame_columns()
        assert set(columns) == {"time", "mean_purity_fp", "mean_purity_naive"}
        assert len(columns["time"]) == 11

    def test_crossing_time_is_close_to_the_naive_prediction(self):
        crossing = mean_crossing_time(1.0, 1e-4)
        naive = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, 1e-4, regime=REGIME_EXACT).value
        assert crossing == pytest.approx(naive, rel=0.15)
        assert crossing < naive

    def test_crossing_time_is_insensitive_to_the_bump_width(self):
        narrow = mean_crossing_time(1.0, 1e-3)
        wide = mean_crossing_time(1.0, 1e-3, width=4.0)
        assert wide == pytest.approx(narrow, rel=1e-2)

    def test_start_beyond_the_target(self):
        assert mean_crossing_time(1.0, 0.1, p0=0.95) == 0.0

    def test_unreachable_target(self):
        with pytest.raises(UnattainablePurityError):
            mean_crossing_time(0.9, 1e-3)

    def test_target_below_the_grid_floor(self):
        with pytest.raises(ConfigurationError):
            mean_crossing_time(1.0, 1e-8)
