import pytest
import numpy as np
import pandas as pd

import covphase.uncertainty as uncertainty
import covphase.energy as energy
import covphase.core as core


def test_position_moments():
    alpha = 0.6
    state = core.PhaseState.from_amplitudes(0, [1.0, np.exp(1j * alpha)])
    mean_cos, mean_sin = uncertainty.position_moments(state)
    assert np.isclose(mean_cos, np.cos(alpha) / 2)
    # The outcome density of this state peaks at theta = -alpha
    assert np.isclose(mean_sin, -np.sin(alpha) / 2)
    assert np.isclose(uncertainty.delta2_position(state), 0.75)


def test_single_index_state():
    state = core.PhaseState(core.IndexSet(4, 4), [1.0])
    assert uncertainty.delta2_position(state) == 1.0
    assert uncertainty.delta2_momentum(state) == 0.0
    report = uncertainty.uncertainty_report(state)
    assert report.bound_at_E == 1.0
    assert report.satisfied


def test_delta2_invariances():
    rng = np.random.default_rng(5)
    state = core.PhaseState.from_amplitudes(-1, rng.normal(size=4) + 1j * rng.normal(size=4))
    assert np.isclose(uncertainty.delta2_position(state.rotated(2.1)), uncertainty.delta2_position(state))
    assert uncertainty.delta2_momentum(state.shifted(1000)) == uncertainty.delta2_momentum(state)
    assert np.isclose(uncertainty.delta2_momentum(state.rotated(0.4)), uncertainty.delta2_momentum(state))


def test_tradeoff_bound():
    E = 1.0
    point = energy.kappa(E)
    assert np.isclose(uncertainty.tradeoff_bound(E), 1 - (1 - point.kappa) ** 2)
    assert np.isclose(uncertainty.tradeoff_bound(100.0), uncertainty.tradeoff_asymptotic(100.0), rtol=0.02)
    pytest.raises(ValueError, uncertainty.tradeoff_bound, -1.0)


def test_optimal_state_attains_bound():
    E = 2.0
    point = energy.kappa(E)
    state = energy.optimal_energy_state(E, point=point)
    report = uncertainty.uncertainty_report(state)
    assert np.isclose(report.delta2_mom, E, rtol=1e-6)
    assert np.isclose(report.delta2_pos, 1 - (1 - point.kappa) ** 2, rtol=0, atol=1e-8)
    assert report.satisfied


def test_random_states_satisfy_bound():
    rng = np.random.default_rng(2024)
    for size in (2, 3, 4):
        for _ in range(5):
            state = core.PhaseState.from_amplitudes(0, rng.normal(size=size) + 1j * rng.normal(size=size))
            report = uncertainty.uncertainty_report(state)
            assert report.satisfied


def test_tradeoff_curve():
    curve = uncertainty.tradeoff_curve([1.0, 10.0, 100.0])
    assert type(curve) == pd.DataFrame
    assert list(curve.columns) == ["E", "bound", "asymptote", "s_star"]
    assert np.all(np.diff(curve["bound"]) < 0)
    assert np.all((curve["bound"] > 0) & (curve["bound"] < 1))
    pytest.raises(ValueError, uncertainty.tradeoff_curve, [1.0, 0.0])


def test_perturbed_optimal_states_respect_bound():
    E = 1.0
    bound = uncertainty.tradeoff_bound(E)
    optimal = energy.optimal_energy_state(E)
    envelope = np.abs(optimal.coeffs)
    rng = np.random.default_rng(8)
    margins = []
    for scale in (1e-1, 1e-2, 1e-3):
        for _ in range(100):
            noise = (rng.normal(size=envelope.size) + 1j * rng.normal(size=envelope.size)) * envelope
            state = core.PhaseState.from_amplitudes(optimal.index_set.lo, optimal.coeffs + scale * noise)
            if uncertainty.delta2_momentum(state) <= E:
                margins.append(uncertainty.delta2_position(state) - bound)
    assert len(margins) > 50
    assert min(margins) >= -1e-8
    assert min(margins) < 1e-3


def test_symmetric_states_lose_nothing():
    E = 2.0
    bound = uncertainty.tradeoff_bound(E)
    optimal = energy.optimal_energy_state(E)
    # The optimum has <sin Q> = 0 and <P> = 0
    assert abs(uncertainty.position_moments(optimal)[1]) < 1e-12
    assert abs(np.sum(optimal.indices * np.abs(optimal.coeffs) ** 2)) < 1e-12
    assert np.isclose(uncertainty.delta2_position(optimal), bound, rtol=0, atol=1e-8)
    # Unconstrained random search over complex states on random supports finds nothing better
    rng = np.random.default_rng(13)
    best, feasible = np.inf, 0
    for _ in range(2000):
        size = int(rng.integers(2, 9))
        k = np.arange(size)
        envelope = np.exp(-np.abs(k - rng.uniform(0, size - 1)) * rng.uniform(0.3, 2.0))
        amplitudes = (rng.normal(size=size) + 1j * rng.normal(size=size)) * envelope
        state = core.PhaseState.from_amplitudes(int(rng.integers(-5, 6)), amplitudes)
        if uncertainty.delta2_momentum(state) <= E:
            feasible += 1
            best = min(best, uncertainty.delta2_position(state))
    assert feasible > 200
    assert best >= bound - 1e-8
