from __future__ import annotations

import math

import numpy as np
import pytest

from protocols.mean_purity import naive_mean_purity
from protocols.spec import (
    PROTOCOL_ISOTROPIC,
    PROTOCOL_JACOBS,
    PROTOCOL_PARALLEL,
    PROTOCOL_WISEMAN_RALPH,
    ProtocolSpec,
)
from protocols.timescales import (
    QUANTITY_MTFP,
    REGIME_ASYMPTOTIC,
    REGIME_EXACT,
    REGIME_FINITE_EFFICIENCY,
    TimescaleResult,
    analytic_mtfp_estimate,
    analytic_time_mean_purity,
    is_attainable,
    timescale_table,
    wiseman_ralph_exact_mtfp,
)
from purification.exceptions import ConfigurationError, UnattainablePurityError, UnsupportedRegimeError


class TestMeanPurityTime:
    def test_jacobs(self):
        result = analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-4)
        assert result.value == pytest.approx(4.6052, abs=1e-4)
        assert result.regime == REGIME_ASYMPTOTIC

    def test_parallel_is_twice_jacobs(self):
        parallel = analytic_time_mean_purity(PROTOCOL_PARALLEL, 1e-4).value
        assert parallel == pytest.approx(9.2103, abs=1e-4)
        assert parallel == pytest.approx(2.0 * analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-4).value, rel=1e-15)

    def test_finite_efficiency_form_at_zero_delta(self):
        result = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, 1e-4, regime=REGIME_FINITE_EFFICIENCY)
        assert result.value == pytest.approx(0.25 * math.log(5000.0), rel=1e-12)
        assert result.value == pytest.approx(2.1293, abs=1e-4)

    def test_ideal_isotropic_defaults_to_the_leading_order(self):
        result = analytic_time_mean_purity(ProtocolSpec.build(PROTOCOL_ISOTROPIC), 1e-4)
        assert result.value == pytest.approx(0.25 * math.log(1e4))
        assert result.regime == REGIME_ASYMPTOTIC

    @pytest.mark.parametrize("epsilon", [1e-2, 1e-4, 1e-7])
    def test_speed_up_ratios_are_exact(self, epsilon):
        perp = analytic_time_mean_purity(PROTOCOL_JACOBS, epsilon).value
        par = analytic_time_mean_purity(PROTOCOL_PARALLEL, epsilon).value
        iso = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon).value
        assert par / perp == pytest.approx(2.0, rel=1e-14)
        assert par / iso == pytest.approx(4.0, rel=1e-14)

    def test_inefficient_isotropic_grows_with_delta(self):
        epsilon = 1e-3
        values = [
            analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, delta, regime=REGIME_FINITE_EFFICIENCY).value
            for delta in (0.0, 5e-4, 1e-3, 1.9e-3)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_inefficient_isotropic_diverges_at_the_attainability_bound(self):
        delta = 1e-3
        values = [
            analytic_time_mean_purity(PROTOCOL_ISOTROPIC, 0.5 * delta * (1.0 + 10.0**-k), delta).value
            for k in (2, 4, 8, 15)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 10.0

    @pytest.mark.parametrize("epsilon", [5e-4, 4e-4])
    def test_purity_beyond_the_bound_is_unattainable(self, epsilon):
        with pytest.raises(UnattainablePurityError):
            analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, 1e-3)

    def test_exact_isotropic_inverts_the_naive_mean_purity(self):
        result = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, 1e-3, 1e-4, regime=REGIME_EXACT)
        assert naive_mean_purity(1e-4, 0.5, result.value) == pytest.approx(1.0 - 1e-3, abs=1e-12)

    def test_exact_isotropic_ideal_closed_form(self):
        epsilon = 1e-4
        result = analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, regime=REGIME_EXACT)
        assert result.value == pytest.approx(0.25 * math.log((1.0 + epsilon) / (3.0 * epsilon)), rel=1e-12)

    def test_exact_jacobs_with_an_inefficient_detector(self):
        eta = 0.99
        result = analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-2, 1.0 - eta, regime=REGIME_EXACT)
        p_ceiling = 0.5 * (1.0 + eta)
        p = p_ceiling + (0.5 - p_ceiling) * math.exp(-2.0 * result.value / eta)
        assert p == pytest.approx(0.99, abs=1e-12)

    def test_leading_order_refuses_inefficient_detectors(self):
        with pytest.raises(UnsupportedRegimeError):
            analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-3, 1e-3, regime=REGIME_ASYMPTOTIC)

    def test_finite_efficiency_form_is_isotropic_only(self):
        with pytest.raises(UnsupportedRegimeError):
            analytic_time_mean_purity(PROTOCOL_PARALLEL, 1e-3, 1e-4)

    @pytest.mark.parametrize("epsilon", [0.0, 0.2, -1e-3])
    def test_epsilon_range(self, epsilon):
        with pytest.raises(ConfigurationError):
            analytic_time_mean_purity(PROTOCOL_JACOBS, epsilon)

    def test_gamma0_scales_time(self):
        assert analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-4, gamma0=2.0).value == pytest.approx(4.6052 / 2, abs=1e-4)


class TestMtfpEstimate:
    @pytest.mark.parametrize("kind", [PROTOCOL_WISEMAN_RALPH, PROTOCOL_PARALLEL])
    def test_single_aligned_detector(self, kind):
        result = analytic_mtfp_estimate(kind, 1e-4)
        assert result.value == pytest.approx(2.3026, abs=1e-4)
        assert result.quantity == QUANTITY_MTFP

    def test_isotropic(self):
        assert analytic_mtfp_estimate(PROTOCOL_ISOTROPIC, 1e-4).value == pytest.approx(1.1513, abs=1e-4)

    @pytest.mark.parametrize("epsilon", [1e-2, 1e-5, 1e-9])
    def test_isotropic_halves_the_parallel_time(self, epsilon):
        isotropic = analytic_mtfp_estimate(PROTOCOL_ISOTROPIC, epsilon).value
        ratio = isotropic / analytic_mtfp_estimate(PROTOCOL_PARALLEL, epsilon).value
        assert ratio == pytest.approx(0.5, rel=1e-14)

    def test_inefficient_detectors_are_unsupported(self):
        with pytest.raises(UnsupportedRegimeError):
            analytic_mtfp_estimate(PROTOCOL_ISOTROPIC, 1e-3, delta=1e-3)

    def test_jacobs_passage_is_its_deterministic_time(self):
        result = analytic_mtfp_estimate(PROTOCOL_JACOBS, 1e-3, regime=REGIME_EXACT)
        assert result.value == pytest.approx(0.5 * math.log(500.0))

    def test_isotropic_has_no_exact_closed_form(self):
        with pytest.raises(UnsupportedRegimeError):
            analytic_mtfp_estimate(PROTOCOL_ISOTROPIC, 1e-3, regime=REGIME_EXACT)


class TestWisemanRalphExact:
    @pytest.mark.parametrize("epsilon", [0.3, 1e-2, 1e-3])
    def test_matches_the_artanh_form(self, epsilon):
        z_star = math.sqrt(1.0 - 2.0 * epsilon)
        assert wiseman_ralph_exact_mtfp(epsilon) == pytest.approx(0.5 * z_star * math.atanh(z_star), rel=1e-12)

    def test_matches_the_entropy_form(self):
        epsilon = 1e-3
        z = math.sqrt(1.0 - 2.0 * epsilon)
        expected = 0.25 * (math.log(1.0 / (2.0 * epsilon)) + (1 + z) * math.log(1 + z) + (1 - z) * math.log(1 - z))
        assert wiseman_ralph_exact_mtfp(epsilon) == pytest.approx(expected, rel=1e-10)

    def test_approaches_the_log_entropy_estimate(self):
        epsilon = 1e-10
        exact = wiseman_ralph_exact_mtfp(epsilon)
        assert exact - analytic_mtfp_estimate(PROTOCOL_WISEMAN_RALPH, epsilon).value == pytest.approx(
            0.25 * math.log(2.0), abs=1e-8
        )

    def test_mean_passage_time_equation(self):
        # G0 (1 - z^2)^2 T'' = -1 on a grid, with T(z*) = 0 and T'(0) = 0
        epsilon = 0.05
        z_star = math.sqrt(1.0 - 2.0 * epsilon)
        z = np.linspace(0.0, z_star, 20001)
        curvature = -1.0 / (1.0 - z**2) ** 2
        slope = np.concatenate([[0.0], np.cumsum(0.5 * (curvature[1:] + curvature[:-1]) * np.diff(z))])
        drop = np.sum(0.5 * (slope[1:] + slope[:-1]) * np.diff(z))
        assert wiseman_ralph_exact_mtfp(epsilon) == pytest.approx(-drop, rel=1e-6)


class TestTimescaleResult:
    def test_value_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            TimescaleResult(value=0.0, regime=REGIME_EXACT, protocol=PROTOCOL_JACOBS, epsilon=0.2)

    def test_asymptotic_values_need_small_epsilon(self):
        with pytest.raises(ConfigurationError):
            TimescaleResult(value=1.0, regime=REGIME_ASYMPTOTIC, protocol=PROTOCOL_JACOBS, epsilon=0.2)

    def test_to_dict(self):
        data = analytic_time_mean_purity(PROTOCOL_JACOBS, 1e-3).to_dict()
        assert data["protocol"] == PROTOCOL_JACOBS
        assert data["regime"] == REGIME_ASYMPTOTIC


def test_attainability_predicate():
    assert is_attainable(5.1e-4, 1e-3)
    assert not is_attainable(5e-4, 1e-3)
    assert not is_attainable(4.9e-4, 1e-3)
    assert is_attainable(1e-9, 0.0)


@pytest.mark.parametrize("epsilon", [4.9e-4, 5e-4, 5e-4 * (1.0 + 1e-12), 6e-4])
def test_attainability_agrees_with_the_timescale(epsilon):
    delta = 1e-3
    if is_attainable(epsilon, delta):
        assert analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, delta).value > 0.0
    else:
        with pytest.raises(UnattainablePurityError):
            analytic_time_mean_purity(PROTOCOL_ISOTROPIC, epsilon, delta)


def test_timescale_table_rows():
    rows = timescale_table([1e-2, 1e-4])
    assert [row["epsilon"] for row in rows] == [1e-2, 1e-4]
    for row in rows:
        assert row["ratio_par_perp"] == pytest.approx(2.0)
        assert row["ratio_par_iso"] == pytest.approx(4.0)
        assert row["ratio_mtfp"] == pytest.approx(2.0)
        assert row["mtfp_wr_exact"] > row["mtfp_par"]
