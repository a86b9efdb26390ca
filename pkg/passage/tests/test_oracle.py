from __future__ import annotations

import math

import pytest

from passage.params import MtfpConfig
from passage.services.oracle import OracleComparison, monte_carlo_mtfp
from purification.exceptions import ConfigurationError
from trajectories.services.ensemble import PassageSummary


class TestMonteCarloOracle:
    @pytest.mark.parametrize("delta", [0.0, 1e-3])
    def test_simulated_passage_matches_the_quadrature(self, delta):
        comparison = monte_carlo_mtfp(MtfpConfig(epsilon=1e-3, delta=delta), 2000, seed=11, dt=1e-4, workers=1)
        assert comparison.summary.censored == 0
        assert comparison.agrees(k=3.0), comparison.to_dict()

    def test_needs_trajectories(self):
        with pytest.raises(ConfigurationError):
            monte_carlo_mtfp(MtfpConfig(epsilon=1e-3), 1, seed=1)

    def test_censored_runs_do_not_agree(self):
        summary = PassageSummary(count=10, censored=2, mean=1.0, std=0.1, stderr=0.03)
        comparison = OracleComparison(quadrature=1.0, summary=summary, dt=1e-3)
        assert comparison.z_score == 0.0
        assert not comparison.agrees()

    def test_z_score_without_spread(self):
        summary = PassageSummary(count=1, censored=0, mean=1.0, std=math.nan, stderr=math.nan)
        assert math.isnan(OracleComparison(quadrature=1.0, summary=summary, dt=1e-3).z_score)
