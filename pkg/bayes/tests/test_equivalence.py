from __future__ import annotations

import math

import pytest

from bayes.services.equivalence import EQUIVALENCE_CONSTANT, convergence_order, sde_povm_equivalence_check
from purification.exceptions import ConfigurationError
from trajectories.services.stepping import NORM_CONSISTENT


class TestEquivalenceCheck:
    @pytest.mark.parametrize("z0", [1.0, -1.0])
    def test_eigenstates_agree_exactly(self, z0):
        report = sde_povm_equivalence_check(z0, 1.0, 1e-3, 20)
        assert report.max_gap == 0.0
        assert report.passed

    def test_mixed_start_agrees_within_the_strong_error(self):
        report = sde_povm_equivalence_check(0.0, 1.0, 1e-4, 100)
        assert report.max_gap < 0.05
        assert report.tolerance == pytest.approx(EQUIVALENCE_CONSTANT * math.sqrt(1e-4))
        assert report.passed

    def test_norm_consistent_scheme_agrees_off_the_origin(self):
        report = sde_povm_equivalence_check(0.3, 1.0, 1e-4, 50, scheme=NORM_CONSISTENT)
        assert report.passed

    def test_window_is_a_whole_number_of_steps(self):
        report = sde_povm_equivalence_check(0.2, 0.1005, 1e-3, 2)
        assert report.tau == pytest.approx(0.101)

    def test_report_serializes(self):
        data = sde_povm_equivalence_check(0.0, 0.2, 1e-3, 5, seed=3).to_dict()
        assert data["paths"] == 5
        assert data["seed"] == 3
        assert data["passed"] in (True, False)

    def test_halving_the_step_shrinks_the_gap_like_its_square_root(self):
        slope, reports = convergence_order(0.0, 1.0, (4e-3, 2e-3, 1e-3, 5e-4), 200)
        assert 0.3 <= slope <= 0.8
        assert reports[0].median_gap / reports[-1].median_gap == pytest.approx(math.sqrt(8.0), rel=0.5)

    def test_rejects_states_outside_the_ball(self):
        with pytest.raises(ConfigurationError):
            sde_povm_equivalence_check(1.5, 1.0, 1e-3, 3)

    def test_needs_a_noise_path(self):
        with pytest.raises(ConfigurationError):
            sde_povm_equivalence_check(0.0, 1.0, 1e-3, 0)
