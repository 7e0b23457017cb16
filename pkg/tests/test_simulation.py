"""Tests for path simulation and the Euler cross-check of the belief SDE."""

import math
from dataclasses import replace

import numpy as np
import pytest

from utils.errors import DomainError, InvalidInstanceError
from utils.model import Parameters, posterior_mean_array
from utils.simulation import (
    SimConfig,
    compare_schemes,
    euler_belief,
    path_generator,
    path_table,
    scheme_convergence,
    simulate_path,
)


def short_cfg(dt: float = 0.01, horizon: float = 1.0, **kwargs) -> SimConfig:
    return SimConfig(dt=dt, t_max=horizon, **kwargs)


class TestSimConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(dt=0.0, t_max=10.0),
        dict(dt=0.2, t_max=100.0),
        dict(dt=0.01, t_max=0.5),
        dict(dt=0.01, t_max=10.0, m_stop=0.5),
        dict(dt=0.01, t_max=10.0, m_stop=1.0),
        dict(dt=0.01, t_max=10.0, scheme="milstein"),
        dict(dt=0.01, t_max=10.0, seed=-1),
    ])
    def test_rejects_invalid_settings(self, kwargs):
        with pytest.raises(InvalidInstanceError):
            SimConfig(**kwargs)

    def test_default_horizon_scales_with_the_drift(self, example_params):
        cfg = SimConfig.for_instance(example_params, dt=1e-3)
        assert cfg.t_max == pytest.approx(10_000 * 1e-3 * 9)
        assert cfg.max_steps == 90_000

    def test_explicit_horizon(self, example_params):
        assert SimConfig.for_instance(example_params, dt=0.01, t_max=5.0).max_steps == 500


class TestSimulatePath:
    def test_starting_point(self, example_params):
        path = simulate_path(example_params.with_prior(0.4), short_cfg(), 0, stop_at_m=False)
        assert path.x[0] == 0.0
        assert path.m[0] == pytest.approx(0.4)
        assert path.n_points == 101
        assert path.times[-1] == pytest.approx(1.0)

    def test_exact_scheme_is_the_posterior_of_x(self, example_params):
        path = simulate_path(example_params, short_cfg(horizon=5.0), 3, stop_at_m=False)
        np.testing.assert_array_equal(path.m, posterior_mean_array(example_params, path.x))
        assert np.all(np.abs(path.m) <= 1.0)

    def test_increments_are_consistent(self, example_params):
        path = simulate_path(example_params, short_cfg(horizon=5.0), 4, stop_at_m=False)
        np.testing.assert_allclose(np.diff(path.x), path.dx, atol=1e-12)

    def test_certain_prior_without_noise(self):
        params = Parameters(mu=0.5, p=1.0, c0=1.0, c1=1.0, c2=1.0)
        path = simulate_path(params, short_cfg(), 0, zero_noise=True, stop_at_m=False)
        assert path.theta == 1
        np.testing.assert_allclose(path.x, 0.5 * path.times, atol=1e-12)
        assert np.all(path.m == 1.0)

    def test_certain_prior_stops_at_once(self):
        params = Parameters(mu=0.5, p=1.0, c0=1.0, c1=1.0, c2=1.0)
        path = simulate_path(params, short_cfg(), 0)
        assert path.n_points == 1
        assert path.reached_stop

    def test_same_substream_same_path(self, example_params, fast_cfg):
        first = simulate_path(example_params, fast_cfg, 17)
        second = simulate_path(example_params, fast_cfg, 17)
        assert first.theta == second.theta
        np.testing.assert_array_equal(first.x, second.x)
        np.testing.assert_array_equal(first.m, second.m)

    def test_different_substreams_differ(self, example_params, fast_cfg):
        first = simulate_path(example_params, fast_cfg, 0)
        second = simulate_path(example_params, fast_cfg, 1)
        assert not np.array_equal(first.x[:50], second.x[:50])

    def test_stops_once_the_belief_is_extreme(self, example_params, fast_cfg):
        path = simulate_path(example_params, fast_cfg, 5)
        assert path.reached_stop
        assert abs(path.m[-1]) >= fast_cfg.m_stop
        assert np.all(np.abs(path.m[:-1]) < fast_cfg.m_stop)

    def test_long_path_crosses_chunks(self, example_params):
        cfg = SimConfig(dt=1e-3, t_max=20.0)
        path = simulate_path(example_params, cfg, 2, stop_at_m=False)
        assert path.n_points == 20_001
        np.testing.assert_array_equal(path.m, posterior_mean_array(example_params, path.x))

    def test_euler_scheme_stays_in_range(self, example_params):
        cfg = SimConfig(dt=0.01, t_max=50.0, scheme="euler_sde")
        path = simulate_path(example_params, cfg, 8, stop_at_m=False)
        assert np.all(np.abs(path.m) <= 1.0)

    def test_observation_mean_at_time_one(self, example_params):
        cfg = short_cfg()
        ends = np.array([simulate_path(example_params, cfg, i, stop_at_m=False).x[-1] for i in range(10_000)])
        stderr = ends.std(ddof=1) / math.sqrt(ends.size)
        assert abs(ends.mean()) < 4 * stderr

    def test_belief_is_a_martingale(self, example_params):
        params = example_params.with_prior(0.4)
        cfg = short_cfg(horizon=4.0)
        ends = np.array([simulate_path(params, cfg, i, stop_at_m=False).m[-1] for i in range(4000)])
        stderr = ends.std(ddof=1) / math.sqrt(ends.size)
        assert abs(ends.mean() - 0.4) < 4 * stderr

    def test_belief_settles_on_the_true_sign(self, example_params):
        fractions = []
        for m_stop in (0.99, 0.999, 0.9999):
            cfg = SimConfig.for_instance(example_params, dt=0.01, m_stop=m_stop, seed=99)
            paths = [simulate_path(example_params, cfg, i) for i in range(300)]
            fractions.append(np.mean([np.sign(p.m[-1]) == p.theta for p in paths]))
        assert fractions[-1] >= 0.99
        assert fractions[-1] >= fractions[0] - 0.01


class TestPathGenerator:
    def test_negative_index(self):
        with pytest.raises(DomainError):
            path_generator(1, -1)

    def test_substreams_are_reproducible(self):
        first = path_generator(42, 3).standard_normal(5)
        np.testing.assert_array_equal(first, path_generator(42, 3).standard_normal(5))
        assert not np.array_equal(first, path_generator(42, 4).standard_normal(5))


class TestSchemes:
    def test_euler_keeps_a_certain_belief(self, example_params):
        out = euler_belief(example_params, 1.0, np.array([0.1, -0.3, 0.2]), 0.01)
        np.testing.assert_array_equal(out, [1.0, 1.0, 1.0])

    def test_certain_prior_has_no_discrepancy(self):
        params = Parameters(mu=1.0 / 3.0, p=1.0, c0=1.0, c1=1.0, c2=1.0)
        assert compare_schemes(params, short_cfg(), n_paths=5, horizon=1.0) == 0.0

    def test_discrepancy_is_small_on_a_fine_grid(self, example_params):
        cfg = SimConfig(dt=1e-3, t_max=20.0)
        assert compare_schemes(example_params, cfg, n_paths=10, horizon=20.0) < 0.05

    def test_discrepancy_shrinks_with_the_step(self, example_params):
        cfg = SimConfig(dt=0.01, t_max=20.0)
        coarse, fine = scheme_convergence(example_params, cfg, n_paths=100, factor=4, horizon=20.0)
        assert fine < coarse

    def test_factor_must_refine(self, example_params):
        with pytest.raises(DomainError):
            scheme_convergence(example_params, short_cfg(), n_paths=1, factor=1)


class TestPathTable:
    def test_columns(self, example_params, fast_cfg):
        path = simulate_path(example_params, fast_cfg, 0)
        table = path_table(path)
        assert list(table.columns) == ["t", "x", "m", "d"]
        assert len(table) == path.n_points
        assert (table["d"] == 0).all()

    def test_decisions_are_copied(self, example_params):
        path = simulate_path(example_params, replace(short_cfg(), m_stop=0.99), 0, stop_at_m=False)
        decisions = np.ones(path.n_points, dtype=np.int64)
        assert (path_table(path, decisions)["d"] == 1).all()
