import json
import os
from dataclasses import dataclass
from logging import getLogger

import numpy as np
import pandas as pd

from covphase.core import CUSTOM_LOSS, INTERVAL_LOSS, SIN_LOSS, ErrorFunction, IndexSet, PhaseState

logger = getLogger(__name__)

SAMPLE_DTYPE = "<f8"  # Little-endian float64, the on-disk sample format.
SAMPLE_EXTENSIONS = (".bin", ".csv")


def _check_path(path: str, extensions: tuple[str, ...]) -> None:
    if not os.path.exists(path):
        raise FileNotFoundError(f"The given path does not exist: {path}")
    if not path.endswith(extensions):
        raise ValueError(f"The given path must end with one of {extensions}: {path}")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def _read_json(path: str) -> dict:
    _check_path(path, (".json",))
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def state_to_dict(state: PhaseState) -> dict:
    """
    JSON-ready form of a state: {"lo": int, "coeffs": [[re, im], ...]}, coefficients in ascending index order.
    """
    return {
        "lo": state.index_set.lo,
        "coeffs": [[float(c.real), float(c.imag)] for c in state.coeffs],
    }


def state_from_dict(payload: dict) -> PhaseState:
    """
    Inverse of state_to_dict. The coefficients must already be normalized.

    Parameters
    ----------
    payload : dict
        Mapping with keys "lo" and "coeffs".

    Returns
    -------
    state : PhaseState
    """
    if "lo" not in payload or "coeffs" not in payload:
        raise ValueError("A state requires the keys 'lo' and 'coeffs'.")
    pairs = np.asarray(payload["coeffs"], dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise ValueError("State coefficients must be a non-empty list of [re, im] pairs.")
    lo = payload["lo"]
    if int(lo) != lo:
        raise TypeError(f"State 'lo' must be an integer, got {lo!r}.")
    return PhaseState(IndexSet.from_size(pairs.shape[0], int(lo)), pairs[:, 0] + 1j * pairs[:, 1])


def save_state(path: str, state: PhaseState) -> None:
    _write_json(path, state_to_dict(state))


def load_state(path: str) -> PhaseState:
    """
    Load a state saved by save_state.

    Parameters
    ----------
    path : str
        Path to the state. Must be a JSON file.

    Returns
    -------
    state : PhaseState
    """
    return state_from_dict(_read_json(path))


def error_to_dict(err: ErrorFunction) -> dict:
    """JSON-ready form: {"kind", "coeffs"} plus "T" and "N" for the interval kind."""
    payload = {"kind": err.kind, "coeffs": [float(c) for c in err.coeffs]}
    if err.kind == INTERVAL_LOSS:
        payload["T"] = float(err.T)
        payload["N"] = int(err.N)
    return payload


def error_from_dict(payload: dict) -> ErrorFunction:
    kind = payload.get("kind")
    if kind == SIN_LOSS:
        return ErrorFunction.sin_loss()
    if kind == INTERVAL_LOSS:
        if "T" not in payload or "N" not in payload:
            raise ValueError("An interval error function requires the keys 'T' and 'N'.")
        return ErrorFunction.interval_loss(payload["T"], payload["N"])
    if kind == CUSTOM_LOSS:
        return ErrorFunction.custom(payload.get("coeffs", []))
    raise ValueError(f"Unknown error function kind {kind!r}.")


def save_error(path: str, err: ErrorFunction) -> None:
    _write_json(path, error_to_dict(err))


def load_error(path: str) -> ErrorFunction:
    return error_from_dict(_read_json(path))


def save_samples(path: str, samples: np.ndarray) -> None:
    """
    Write outcome samples either as raw little-endian float64 (.bin) or as a single-column CSV (.csv).

    Parameters
    ----------
    path : str
        Destination. The extension selects the format.
    samples : np.ndarray
        1D array of samples.
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    if path.endswith(".bin"):
        samples.astype(SAMPLE_DTYPE).tofile(path)
    elif path.endswith(".csv"):
        pd.DataFrame({"theta_hat": samples}).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    else:
        raise ValueError(f"Samples path must end with one of {SAMPLE_EXTENSIONS}: {path}")


def load_samples(path: str) -> np.ndarray:
    _check_path(path, SAMPLE_EXTENSIONS)
    if path.endswith(".bin"):
        return np.fromfile(path, dtype=SAMPLE_DTYPE).astype(float)
    return pd.read_csv(path)["theta_hat"].to_numpy(dtype=float)


@dataclass(frozen=True)
class SampleRunRecord:
    """
    On-disk description of a Monte Carlo run. Samples live in a separate file next to the record.

    Attributes
    ----------
    seed : int
        Seed of the PCG64 generator.
    theta_true : float
        True phase.
    n : int
        Number of samples.
    samples_path : str
        Path of the sample file, relative to the record's directory.
    """

    seed: int
    theta_true: float
    n: int
    samples_path: str


def save_sample_run(path: str, run, samples_format: str = "bin") -> SampleRunRecord:
    """
    Persist a SampleRun as a JSON record {seed, theta_true, n, samples_path} plus a sample file.

    Parameters
    ----------
    path : str
        Path of the JSON record.
    run : simulate.SampleRun
        The run to save.
    samples_format : str, optional
        "bin" (little-endian float64) or "csv".
        Default "bin"

    Returns
    -------
    record : SampleRunRecord
    """
    if not path.endswith(".json"):
        raise ValueError("The sample run record must be a JSON file.")
    if samples_format not in ("bin", "csv"):
        raise ValueError(f"samples_format must be 'bin' or 'csv', got {samples_format!r}.")
    base, _ = os.path.splitext(path)
    samples_file = f"{base}_samples.{samples_format}"
    save_samples(samples_file, run.samples)
    record = SampleRunRecord(int(run.seed), float(run.theta_true), int(run.n_samples), os.path.basename(samples_file))
    _write_json(
        path,
        {"seed": record.seed, "theta_true": record.theta_true, "n": record.n, "samples_path": record.samples_path},
    )
    logger.debug("Saved %d samples to %s", record.n, samples_file)
    return record


def load_sample_run(path: str):
    """
    Load a run saved by save_sample_run.

    Returns
    -------
    run : simulate.SampleRun
    """
    from covphase.simulate import SampleRun

    payload = _read_json(path)
    missing = {"seed", "theta_true", "n", "samples_path"} - set(payload)
    if missing:
        raise ValueError(f"Sample run record is missing keys: {sorted(missing)}")
    samples_path = os.path.join(os.path.dirname(path), payload["samples_path"])
    samples = load_samples(samples_path)
    if samples.size != payload["n"]:
        raise ValueError(f"Sample file holds {samples.size} samples, record says {payload['n']}.")
    return SampleRun(int(payload["seed"]), float(payload["theta_true"]), int(payload["n"]), samples)
