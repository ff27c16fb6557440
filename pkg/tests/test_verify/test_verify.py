import pytest
import numpy as np

import covphase.verify as verify


def test_criteria_registry():
    assert len(verify.CRITERIA) == 12
    for name, criterion in verify.CRITERIA.items():
        assert criterion.name == name
        assert criterion.tolerance > 0
    assert verify.CRITERIA["monte_carlo"].tolerance == 8 / 9


def test_parse_tolerances():
    assert verify.parse_tolerances(None) == {}
    assert verify.parse_tolerances(["heisenberg=0.01", " mathieu =1e-9"]) == {"heisenberg": 0.01, "mathieu": 1e-9}
    pytest.raises(ValueError, verify.parse_tolerances, ["heisenberg"])
    pytest.raises(ValueError, verify.parse_tolerances, ["nonexistent=0.1"])
    pytest.raises(ValueError, verify.parse_tolerances, ["heisenberg=small"])


def test_run_checks_pass():
    names = ["finite_closed_form", "heisenberg", "mathieu", "gamma_small", "prolate_small"]
    results = verify.run_checks(verify.FAST, names=names)
    assert [result.name for result in results] == names
    for result in results:
        assert result.status == "PASS", result.message
        assert result.seconds >= 0
    row = results[0].as_row()
    assert list(row) == ["name", "status", "tolerance", "seconds", "message"]
    assert row["tolerance"] == 1e-10


def test_run_checks_tolerance_override():
    results = verify.run_checks(verify.FAST, {"heisenberg": 1e-6}, names=["heisenberg"])
    assert results[0].status == "FAIL"
    assert results[0].tolerance == 1e-6


def test_run_checks_catches_errors(monkeypatch):
    def broken(level, tol):
        raise RuntimeError("solver diverged")

    monkeypatch.setitem(verify.CRITERIA, "broken", verify.Criterion("broken", "always raises", 1.0, broken))
    results = verify.run_checks(verify.FAST, names=["broken"])
    assert results[0].status == "FAIL"
    assert "solver diverged" in results[0].message
    pytest.raises(ValueError, verify.run_checks, "medium")


def test_prolate_asymptotic_check():
    ok, message = verify.check_prolate_asymptotic(verify.FAST, verify.CRITERIA["prolate_asymptotic"].tolerance)
    assert ok, message
    assert "T=8" in message


def test_primal_dual_check():
    ok, message = verify.check_primal_dual(verify.FAST, verify.CRITERIA["primal_dual"].tolerance)
    assert ok, message


def test_random_feasible_states():
    states = verify._random_feasible_states(1.0, 20, np.random.default_rng(0))
    assert len(states) == 20
    assert all(1 <= len(state) <= 4 for state in states)


def test_uncertainty_check_samples_near_bound():
    ok, message = verify.check_uncertainty(verify.FAST, verify.CRITERIA["uncertainty"].tolerance)
    assert ok, message
    assert "over 200 states" in message
    states = verify._perturbed_optimal_states(1.0, 20, np.random.default_rng(1))
    assert len(states) == 20
    assert all(verify.delta2_momentum(state) <= 1.0 for state in states)
