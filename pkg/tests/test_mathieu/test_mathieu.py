import pytest
import numpy as np
import pandas as pd
from scipy.special import mathieu_a

import covphase.mathieu as mathieu


def test_a0_matches_scipy():
    for q in (0.5, 1.0, 5.0, 10.0):
        assert np.isclose(mathieu.a0(q), mathieu_a(0, q), rtol=0, atol=1e-8)
    assert np.isclose(mathieu.a0(1.0), -0.455138604107, atol=1e-10)


def test_a0_small_q():
    assert mathieu.a0(0.0) == 0.0
    for q in (1e-2, 1e-3):
        assert np.isclose(mathieu.a0(q), -q**2 / 2 + 7 * q**4 / 128, rtol=1e-9)
    # Stays strictly negative where bisection alone cannot resolve the sign
    for q in (1e-5, 1e-9, -1e-12):
        assert mathieu.a0(q) < 0
        assert np.isclose(mathieu.a0(q) / (-(q**2) / 2), 1.0, rtol=1e-9)
    assert mathieu.mathieu_ground(1e-9).a0 < 0
    # The series and the eigensolver agree where they meet
    below = mathieu.a0(mathieu.SMALL_Q * (1 - 1e-12))
    above = mathieu.a0(mathieu.SMALL_Q * (1 + 1e-12))
    assert np.isclose(below, above, rtol=1e-10, atol=0)


def test_a0_nonincreasing_in_abs_q():
    q_values = np.concatenate([[0.0], np.geomspace(1e-3, 60, 40)])
    values = np.array([mathieu.a0(q) for q in q_values])
    assert np.all(np.diff(values) < 0)
    assert np.allclose([mathieu.a0(-q) for q in q_values], values, rtol=0, atol=1e-10)


def test_rayleigh_quotient_bound():
    rng = np.random.default_rng(11)
    for q in (0.5, 1.0, 5.0, 20.0):
        M = mathieu.default_truncation(q)
        matrix = mathieu.recurrence_matrix(q, M)
        value = mathieu.a0(q)
        ground = mathieu.mathieu_ground(q).basis_coeffs
        decay = np.exp(-0.3 * np.arange(M + 1))
        for _ in range(50):
            trial = rng.normal(size=M + 1) * decay
            assert trial @ matrix @ trial / (trial @ trial) >= value - 1e-9
            # Close to the ground state the quotient approaches a0 from above
            trial = ground + 1e-4 * rng.normal(size=M + 1)
            assert trial @ matrix @ trial / (trial @ trial) >= value - 1e-9


def test_ce0_has_no_zeros():
    theta = np.linspace(-np.pi, np.pi, 2001)
    for q in (0.5, 1.0, 5.0, -5.0):
        assert np.all(mathieu.ce0_eval(q, theta) > 0)


def test_ce0_coefficient_decay():
    for q in (1.0, 5.0, 20.0):
        coeffs = np.abs(mathieu.ce0_coeffs(q))
        start = int(np.ceil(q)) + 1
        significant = coeffs[start:] > 1e-12 * coeffs.max()
        ratios = coeffs[start + 1 :] / coeffs[start:-1]
        assert np.all(ratios[significant[:-1] & significant[1:]] < 1)


def test_ce0_at_zero_q():
    coeffs = mathieu.ce0_coeffs(0.0)
    assert np.isclose(coeffs[0], 1 / np.sqrt(np.pi))
    assert np.all(coeffs[1:] == 0)


def test_a0_is_even_and_non_positive():
    for q in (0.3, 2.0, 40.0):
        assert mathieu.a0(-q) == mathieu.a0(q)
        assert mathieu.a0(q) < 0


def test_a0_large_q():
    # Leading behaviour -2q + 2 sqrt(q) - 1/4
    q = 400.0
    assert np.isclose(mathieu.a0(q), -2 * q + 2 * np.sqrt(q) - 0.25, rtol=0, atol=0.01)


def test_truncation_checks():
    assert mathieu.default_truncation(3.2) == 24
    assert mathieu.default_truncation(-3.2) == 24
    pytest.raises(ValueError, mathieu.a0, 3.0, 10)
    pytest.raises(ValueError, mathieu.a0, np.inf)
    pytest.raises(ValueError, mathieu.a0, 2 * mathieu.MAX_Q)
    # Raising the truncation changes nothing once converged
    assert np.isclose(mathieu.a0(5.0, 60), mathieu.a0(5.0), rtol=0, atol=1e-12)


def test_recurrence_bands():
    diagonal, off_diagonal = mathieu.recurrence_bands(2.0, 3)
    assert np.allclose(diagonal, [0, 4, 16, 36])
    assert np.allclose(off_diagonal, [2 * np.sqrt(2), 2, 2])
    matrix = mathieu.recurrence_matrix(2.0, 3)
    assert np.allclose(matrix, matrix.T)
    assert np.isclose(np.linalg.eigvalsh(mathieu.recurrence_matrix(2.0, 30))[0], mathieu.a0(2.0))


def test_mathieu_ground():
    ground = mathieu.mathieu_ground(3.0, check_truncation=True)
    assert ground.truncation == 23
    assert ground.residual < mathieu.RESIDUAL_TOLERANCE
    assert ground.truncation_error < 1e-12
    assert ground.cos_coeffs[0] > 0
    assert np.isclose(np.sum(ground.basis_coeffs**2), 1.0)
    # Unit L^2 norm over one period
    theta = np.pi * np.arange(512) / 512
    assert np.isclose(np.pi * np.mean(ground(theta) ** 2), 1.0)
    assert np.isnan(mathieu.mathieu_ground(3.0).truncation_error)


def test_ce0_solves_mathieu_equation():
    for q in (-4.0, 0.7, 6.0):
        ground = mathieu.mathieu_ground(q)
        theta = np.linspace(-np.pi / 2, np.pi / 2, 31)
        y = mathieu.ce0_series(ground.cos_coeffs, theta)
        y2 = mathieu.ce0_series(ground.cos_coeffs, theta, derivative=2)
        assert np.allclose(y2 + (ground.a0 - 2 * q * np.cos(2 * theta)) * y, 0.0, atol=1e-8)


def test_ce0_negative_q():
    positive = mathieu.ce0_coeffs(2.5)
    negative = mathieu.ce0_coeffs(-2.5)
    assert np.allclose(negative, positive * (-1.0) ** np.arange(positive.size))
    theta = np.linspace(0, np.pi, 9)
    assert np.allclose(mathieu.ce0_eval(-2.5, theta), mathieu.ce0_eval(2.5, theta + np.pi / 2))


def test_ce0_series():
    coeffs = np.array([0.5, 0.25])
    assert np.isclose(mathieu.ce0_series(coeffs, 0.0), 0.75)
    assert isinstance(mathieu.ce0_series(coeffs, 0.3), float)
    assert np.isclose(mathieu.ce0_series(coeffs, np.pi / 4, derivative=1), -0.5)
    pytest.raises(ValueError, mathieu.ce0_series, coeffs, 0.0, 3)


def test_a0_grid():
    for q in (-3.0, 0.0, 5.0):
        assert np.isclose(mathieu.a0_grid(q, 256), mathieu.a0(q), rtol=0, atol=1e-8)
    pytest.raises(ValueError, mathieu.a0_grid, 1.0, 7)


def test_a0_table():
    table = mathieu.a0_table([0.0, -1.0, 1.0])
    assert type(table) == pd.DataFrame
    assert list(table.columns) == ["q", "a0"]
    assert table.loc[0, "a0"] == 0.0
    assert table.loc[1, "a0"] == table.loc[2, "a0"]
