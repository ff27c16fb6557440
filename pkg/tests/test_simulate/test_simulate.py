import pytest
import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import kstest

import covphase.simulate as simulate
import covphase.finite_opt as finite_opt
import covphase.core as core
from covphase.utils import wrap_angle


@pytest.fixture
def window_state():
    return finite_opt.sine_window_state(core.IndexSet(0, 9))


def test_outcome_cdf(window_state):
    offsets, cdf = simulate.outcome_cdf(window_state, grid=1024)
    assert offsets.shape == (1025,)
    assert cdf[0] == 0.0
    assert cdf[-1] == 1.0
    assert np.all(np.diff(cdf) >= 0)
    pytest.raises(ValueError, simulate.outcome_cdf, window_state, 16)


def test_cdf_error_bound(window_state):
    for grid in (64, simulate.CDF_GRID):
        offsets, cdf = simulate.outcome_cdf(window_state, grid)
        exact = np.array([simulate.interval_probability(window_state, 0.0, x) for x in offsets[::4]])
        bound = simulate.cdf_error_bound(window_state, grid)
        assert np.max(np.abs(cdf[::4] - exact)) <= bound + 1e-12
    assert simulate.cdf_error_bound(window_state) < 1e-4
    assert simulate.cdf_error_bound(window_state, 64) > simulate.cdf_error_bound(window_state, 128)


def test_sample_estimates(window_state):
    run = simulate.sample_estimates(window_state, 1.0, 1000, seed=4)
    assert run.n_samples == 1000
    assert run.samples.shape == (1000,)
    assert np.all((run.samples >= 0) & (run.samples < 2 * np.pi))
    repeat = simulate.sample_estimates(window_state, 1.0, 1000, seed=4)
    assert np.array_equal(run.samples, repeat.samples)
    other = simulate.sample_estimates(window_state, 1.0, 1000, seed=5)
    assert not np.array_equal(run.samples, other.samples)
    pytest.raises(ValueError, simulate.sample_estimates, window_state, 0.0, 0, 1)


def test_single_index_state_is_uniform():
    state = core.PhaseState(core.IndexSet(0, 0), [1.0])
    n = 20_000
    run = simulate.sample_estimates(state, 0.0, n, seed=1)
    statistic = kstest(run.samples, "uniform", args=(0, 2 * np.pi)).statistic
    assert statistic < 1.95 / np.sqrt(n)


def test_empirical_risk(window_state):
    err = core.ErrorFunction.sin_loss()
    run = simulate.sample_estimates(window_state, 2.5, 50_000, seed=7)
    mean, stderr = simulate.empirical_risk(run, err)
    analytic = core.risk(window_state, err)
    assert stderr > 0
    assert abs(mean - analytic) <= simulate.Z_THRESHOLD * stderr

    single = simulate.sample_estimates(window_state, 0.0, 1, seed=7)
    mean, stderr = simulate.empirical_risk(single, err)
    assert np.isnan(stderr)
    assert np.isfinite(mean)


def test_shifting_theta_true(window_state):
    base = simulate.sample_estimates(window_state, 0.0, 500, seed=9)
    shifted = simulate.sample_estimates(window_state, 0.5, 500, seed=9)
    assert np.allclose(wrap_angle(shifted.samples - base.samples - 0.5), 0.0, atol=1e-12)


def test_empirical_risk_single_index():
    state = core.PhaseState(core.IndexSet(0, 0), [1.0])
    run = simulate.sample_estimates(state, 0.0, 20_000, seed=2)
    mean, stderr = simulate.empirical_risk(run, core.ErrorFunction.sin_loss())
    assert abs(mean - 1.0) <= simulate.Z_THRESHOLD * stderr


def test_empirical_risk_interval_fraction(window_state):
    run = simulate.sample_estimates(window_state, 1.3, 5000, seed=8)
    err = core.ErrorFunction.interval_loss(1.0, 4)
    mean, _ = simulate.empirical_risk(run, err)
    outside = np.abs(wrap_angle(run.samples - 1.3)) >= 0.25
    assert np.isclose(mean, outside.mean(), rtol=0, atol=1e-10)


def test_stderr_scaling(window_state):
    err = core.ErrorFunction.sin_loss()
    runs = [simulate.sample_estimates(window_state, 0.0, n, seed=6) for n in (10**3, 10**4, 10**5)]
    stderrs = [simulate.empirical_risk(run, err)[1] for run in runs]
    assert np.isclose(stderrs[0] / stderrs[1], np.sqrt(10), rtol=0.2)
    assert np.isclose(stderrs[1] / stderrs[2], np.sqrt(10), rtol=0.2)


def test_interval_probability(window_state):
    assert np.isclose(simulate.interval_probability(window_state, 0.0, 2 * np.pi), 1.0)
    assert np.isclose(simulate.interval_probability(window_state, 1.0, 1.0), 0.0)
    err = core.ErrorFunction.interval_loss(1.5, 5)
    inside = simulate.interval_probability(window_state, -0.3, 0.3)
    assert np.isclose(inside, 1 - core.risk(window_state, err))
    # Against direct integration of the outcome density
    theta = np.linspace(0.2, 1.1, 20_001)
    direct = trapezoid(core.outcome_density(window_state, 0.0, theta), theta)
    assert np.isclose(simulate.interval_probability(window_state, 0.2, 1.1), direct, atol=1e-6)
    pytest.raises(ValueError, simulate.interval_probability, window_state, 1.0, 0.0)
    pytest.raises(ValueError, simulate.interval_probability, window_state, 0.0, 7.0)


def test_monte_carlo_table(window_state):
    states = {"window": window_state, "flat": core.PhaseState.from_amplitudes(0, np.ones(5))}
    losses = {"sin": core.ErrorFunction.sin_loss(), "interval": core.ErrorFunction.interval_loss(1.0, 4)}
    table = simulate.monte_carlo_table(states, losses, seeds=[1, 2], n=5000)
    assert type(table) == pd.DataFrame
    assert list(table.columns) == ["state", "loss", "seed", "empirical", "stderr", "analytic", "z", "passed"]
    assert table.shape[0] == 8
    assert np.allclose(table["z"], np.abs(table["empirical"] - table["analytic"]) / table["stderr"])
    assert table["passed"].sum() >= 6
