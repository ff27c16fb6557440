import os

import pytest
import numpy as np

import covphase.io as io
import covphase.core as core
import covphase.simulate as simulate


@pytest.fixture
def sample_state():
    return io.load_state("tests/test_io/sample_state.json")


def test_load_state(sample_state):
    assert sample_state.index_set == core.IndexSet(-1, 1)
    assert np.allclose(sample_state.coeffs, [0.5, 1j / np.sqrt(2), -0.5])
    pytest.raises(ValueError, io.load_state, "tests/test_io/bad_state.json")  # Not normalized
    pytest.raises(FileNotFoundError, io.load_state, "tests/test_io/missing_state.json")
    pytest.raises(ValueError, io.load_state, "tests/test_io/test_io.py")  # Not a JSON file


def test_state_from_dict():
    pytest.raises(ValueError, io.state_from_dict, {"coeffs": [[1.0, 0.0]]})
    pytest.raises(ValueError, io.state_from_dict, {"lo": 0, "coeffs": []})
    pytest.raises(ValueError, io.state_from_dict, {"lo": 0, "coeffs": [[1.0, 0.0, 0.0]]})
    pytest.raises(TypeError, io.state_from_dict, {"lo": 0.5, "coeffs": [[1.0, 0.0]]})


def test_save_state(sample_state, tmp_path):
    path = os.path.join(tmp_path, "state.json")
    io.save_state(path, sample_state)
    reloaded = io.load_state(path)
    assert reloaded.index_set == sample_state.index_set
    assert np.array_equal(reloaded.coeffs, sample_state.coeffs)


def test_load_error(tmp_path):
    err = io.load_error("tests/test_io/sample_error.json")
    assert err.kind == "interval"
    assert err.T == 1.5
    assert err.N == 3

    path = os.path.join(tmp_path, "custom.json")
    io.save_error(path, core.ErrorFunction.custom([0.9, -0.3, 0.05]))
    assert np.allclose(io.load_error(path).coeffs, [0.9, -0.3, 0.05])
    assert io.error_from_dict({"kind": "sin"}).kind == "sin"
    pytest.raises(ValueError, io.error_from_dict, {"kind": "interval", "T": 1.0})
    pytest.raises(ValueError, io.error_from_dict, {"kind": "parabolic"})


def test_save_samples(tmp_path):
    samples = np.array([0.0, 1.25, 2 * np.pi - 1e-9, 3.0])
    for extension in ("bin", "csv"):
        path = os.path.join(tmp_path, f"samples.{extension}")
        io.save_samples(path, samples)
        assert np.array_equal(io.load_samples(path), samples)
    # Raw binary is little-endian float64
    assert os.path.getsize(os.path.join(tmp_path, "samples.bin")) == 8 * samples.size
    pytest.raises(ValueError, io.save_samples, os.path.join(tmp_path, "samples.txt"), samples)


def test_save_sample_run(sample_state, tmp_path):
    run = simulate.sample_estimates(sample_state, 0.3, 50, seed=11)
    path = os.path.join(tmp_path, "run.json")
    record = io.save_sample_run(path, run)
    assert record.samples_path == "run_samples.bin"
    assert os.path.exists(os.path.join(tmp_path, "run_samples.bin"))
    reloaded = io.load_sample_run(path)
    assert reloaded.seed == 11
    assert reloaded.theta_true == 0.3
    assert reloaded.n_samples == 50
    assert np.array_equal(reloaded.samples, run.samples)

    csv_record = io.save_sample_run(os.path.join(tmp_path, "run_csv.json"), run, samples_format="csv")
    assert csv_record.samples_path == "run_csv_samples.csv"
    pytest.raises(ValueError, io.save_sample_run, os.path.join(tmp_path, "run.txt"), run)
    pytest.raises(ValueError, io.save_sample_run, path, run, "npy")
