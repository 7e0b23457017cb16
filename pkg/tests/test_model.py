"""Tests for the problem instance and the posterior mean."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from utils.errors import InvalidInstanceError
from utils.model import (
    Belief,
    Parameters,
    center_two_drift_problem,
    initial_belief,
    posterior_mean,
    posterior_mean_array,
)


def make(mu=1.0 / 3.0, p=0.5, c0=2.0 / 3.0, c1=1.0, c2=1.5) -> Parameters:
    return Parameters(mu=mu, p=p, c0=c0, c1=c1, c2=c2)


class TestParameters:
    @pytest.mark.parametrize("field", ["mu", "c0", "c1", "c2"])
    @pytest.mark.parametrize("value", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_non_positive_costs(self, field, value):
        with pytest.raises(InvalidInstanceError, match=field):
            make(**{field: value})

    @pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
    def test_rejects_prior_outside_unit_interval(self, p):
        with pytest.raises(InvalidInstanceError):
            make(p=p)

    def test_validation_error_is_a_value_error(self):
        with pytest.raises(ValueError):
            make(c2=0.0)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_point_mass_priors_are_accepted(self, p):
        assert make(p=p).degenerate

    def test_with_prior_moves_the_starting_belief(self):
        params = make().with_prior(0.5)
        assert params.p == pytest.approx(0.75)
        assert initial_belief(params).m == pytest.approx(0.5)
        assert params.c2 == 1.5

    def test_with_prior_rejects_beliefs_outside_range(self):
        with pytest.raises(InvalidInstanceError):
            make().with_prior(1.5)


class TestInitialBelief:
    @pytest.mark.parametrize("p, expected", [(0.5, 0.0), (1.0, 1.0), (0.75, 0.5), (0.0, -1.0)])
    def test_values(self, p, expected):
        assert initial_belief(make(p=p)).m == expected

    @pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 0.9, 1.0])
    def test_equals_posterior_at_zero(self, p):
        params = make(p=p)
        assert initial_belief(params).m == posterior_mean(params, 0.0).m

    def test_belief_range_is_checked(self):
        with pytest.raises(InvalidInstanceError):
            Belief(1.0000001)


class TestPosteriorMean:
    def test_symmetric_prior_at_zero(self):
        assert posterior_mean(make(mu=2.0), 0.0).m == 0.0

    def test_symmetric_prior_is_tanh(self):
        params = make(mu=0.7)
        x = np.linspace(-50.0, 50.0, 2001)
        np.testing.assert_allclose(posterior_mean_array(params, x), np.tanh(0.7 * x), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("x", [-1e6, -3.0, 0.0, 2.0, 1e6])
    def test_certain_prior_is_never_updated(self, x):
        assert posterior_mean(make(p=1.0), x).m == 1.0
        assert posterior_mean(make(p=0.0), x).m == -1.0

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_saturates_without_overflow(self, p):
        mu = 1.0 / 3.0
        params = make(mu=mu, p=p)
        far = posterior_mean_array(params, np.array([-1e6 / mu, 1e6 / mu]))
        assert abs(far[0] + 1.0) <= 1e-12
        assert abs(far[1] - 1.0) <= 1e-12

    @pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.95])
    def test_strictly_increasing(self, p):
        x = np.linspace(-20.0, 20.0, 4001)
        m = posterior_mean_array(make(p=p), x)
        assert np.all(np.diff(m) > 0)

    def test_matches_the_direct_formula(self):
        params = make(mu=0.4, p=0.3)
        x = np.linspace(-5.0, 5.0, 101)
        direct = 1.0 - 2.0 * (1.0 - 0.3) / (0.3 * np.exp(0.8 * x) + 1.0 - 0.3)
        np.testing.assert_allclose(posterior_mean_array(params, x), direct, rtol=0, atol=1e-14)

    @settings(max_examples=50)
    @given(p=st.floats(0.01, 0.99), x=st.floats(-200.0, 200.0))
    def test_stays_in_range(self, p, x):
        m = posterior_mean(make(p=p), x).m
        assert -1.0 <= m <= 1.0

    def test_array_keeps_shape(self):
        out = posterior_mean_array(make(p=0.6), np.zeros((3, 4)))
        assert out.shape == (3, 4)
        np.testing.assert_allclose(out, 0.2)


class TestCenterTwoDriftProblem:
    def test_already_centered(self):
        assert center_two_drift_problem(1.0, -1.0, 2.5, 4.0) == (1.0, 2.5)

    def test_shifted_drifts(self):
        mu, centered = center_two_drift_problem(2.0, 0.0, 3.0, 1.0)
        assert mu == 1.0
        assert centered == 2.0

    def test_arrays(self):
        t = np.array([0.0, 1.0, 2.0])
        mu, centered = center_two_drift_problem(3.0, 1.0, np.array([0.0, 2.0, 4.0]), t)
        assert mu == 1.0
        np.testing.assert_allclose(centered, [0.0, 0.0, 0.0])

    def test_equal_drifts_are_rejected(self):
        with pytest.raises(InvalidInstanceError, match="indistinguishable"):
            center_two_drift_problem(0.5, 0.5, 1.0, 1.0)
