import pytest
import numpy as np
import pandas as pd

import covphase.prolate as prolate
import covphase.finite_opt as finite_opt
import covphase.core as core


@pytest.fixture
def spectrum():
    return prolate.prolate_spectrum(4.0, k=3)


def test_prolate_spectrum(spectrum):
    assert spectrum.eigenvalues.shape == (3,)
    assert np.all(np.diff(spectrum.eigenvalues) < 0)
    assert np.all((spectrum.eigenvalues > 0) & (spectrum.eigenvalues < 1))
    assert np.isclose(spectrum.top_eigenvalue, 0.995885, rtol=0, atol=5e-6)
    assert spectrum.refinement_error < 1e-10
    # Unit norm under the quadrature weights
    assert np.isclose(np.sum(spectrum.weights * spectrum.eigenfunction_samples**2), 1.0)


def test_prolate_eigenfunction(spectrum):
    assert np.allclose(spectrum.eigenfunction(spectrum.nodes), spectrum.eigenfunction_samples, atol=1e-10)
    x = np.linspace(0, 1, 9)
    assert np.allclose(spectrum.eigenfunction(x), spectrum.eigenfunction(-x), atol=1e-10)
    assert spectrum.eigenfunction(0.0) > 0
    assert spectrum.eigenfunction(np.zeros((2, 2))).shape == (2, 2)


def test_prolate_spectrum_arguments():
    pytest.raises(ValueError, prolate.prolate_spectrum, 0.0)
    pytest.raises(ValueError, prolate.prolate_spectrum, 2.0, 20)
    pytest.raises(ValueError, prolate.prolate_spectrum, 2.0, 40, 0)
    assert np.isnan(prolate.prolate_spectrum(2.0, refine=False).refinement_error)


def test_sinc_kernel():
    assert np.isclose(prolate.sinc_kernel(3.0, 0.2, 0.2), 3.0 / np.pi)
    assert np.isclose(prolate.sinc_kernel(3.0, 0.5, 0.0), np.sin(1.5) / (0.5 * np.pi))


def test_lambda_asymptotic():
    T_values = [4.0, 5.0, 6.0, 8.0]
    exact = np.array([prolate.prolate_spectrum(T, refine=False).top_eigenvalue for T in T_values])
    asymptotic = np.array([prolate.lambda_asymptotic(T) for T in T_values])
    relative = np.abs((1 - asymptotic) - (1 - exact)) / (1 - exact)
    # The two-term expansion improves steadily with T
    assert np.all(np.diff(relative) < 0)
    assert relative[-1] < 0.05
    pytest.raises(ValueError, prolate.lambda_asymptotic, 0.05)
    with pytest.warns(UserWarning):
        prolate.lambda_asymptotic(1.0)


def test_prolate_curve():
    curve = prolate.prolate_curve([2.0, 3.0])
    assert type(curve) == pd.DataFrame
    assert list(curve.columns) == ["T", "lambda_nystrom", "lambda_asymptotic", "gap"]
    assert np.allclose(curve["gap"], curve["lambda_asymptotic"] - curve["lambda_nystrom"])
    assert curve.loc[1, "lambda_nystrom"] > curve.loc[0, "lambda_nystrom"]


def test_concentration_matrix():
    matrix = prolate.concentration_matrix(3, 1.5)
    assert matrix.shape == (7, 7)
    assert np.allclose(np.diag(matrix), 0.5 / np.pi)
    assert np.isclose(matrix[0, 2], np.sin(1.0) / (2 * np.pi))
    pytest.raises(ValueError, prolate.concentration_matrix, 1, 4.0)


def test_dpss_state():
    N, T = 10, 2.0
    state = prolate.dpss_state(N, T)
    assert state.index_set == core.IndexSet(-10, 10)
    assert np.allclose(state.coeffs, state.coeffs[::-1], atol=1e-10)  # Even sequence
    window, ratio = prolate.dpss_reference(N, T)
    assert np.allclose(state.coeffs.real, window, atol=1e-6)
    success = prolate.interval_success_prob(state, T, N)
    assert np.isclose(success, ratio, rtol=1e-6)
    # Same optimum as the generic Toeplitz minimization of the interval loss
    optimum = finite_opt.min_risk_state(core.IndexSet.symmetric(N), core.ErrorFunction.interval_loss(T, N))
    assert np.isclose(success, 1 - optimum.risk, atol=1e-10)


def test_success_probability_approaches_lambda():
    N, T = 20, 2.0
    lambda_T = prolate.prolate_spectrum(T, refine=False).top_eigenvalue
    best = prolate.interval_success_prob(prolate.dpss_state(N, T), T, N)
    sampled = prolate.interval_success_prob(prolate.prolate_sampled_state(T, N), T, N)
    assert sampled <= best + 1e-12
    assert np.isclose(best, lambda_T, rtol=0.02)
    assert np.isclose(sampled, lambda_T, rtol=0.02)


def test_dpss_beats_sine_window():
    for N, T in ((5, 1.0), (10, 2.0), (30, 4.0)):
        window = finite_opt.sine_window_state(core.IndexSet.symmetric(N))
        best = prolate.interval_success_prob(prolate.dpss_state(N, T), T, N)
        assert best >= prolate.interval_success_prob(window, T, N) - 1e-12


def test_dpss_converges_to_lambda():
    T = 4.0
    lambda_T = prolate.prolate_spectrum(T).top_eigenvalue
    deviations = [
        abs(prolate.interval_success_prob(prolate.dpss_state(N, T), T, N) - lambda_T) for N in (25, 50, 100, 200)
    ]
    assert np.all(np.diff(deviations) < 0)
    assert deviations[-1] < 1e-3
