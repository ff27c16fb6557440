# Monte Carlo draws from the covariant measurement, used to validate the analytic risks.
# Samples come from one PCG64 stream per run (numpy.random.Generator(PCG64(seed)).random), pushed
# through the tabulated inverse CDF of the outcome offset theta_hat - theta_true in [0, 2pi).
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import cumulative_trapezoid

from covphase.core import ErrorFunction, PhaseState, error_profile, fourier_eval, risk
from covphase.utils import NumericalError, wrap_angle

logger = getLogger(__name__)

CDF_GRID = 2**14
CDF_TOLERANCE = 1e-9
Z_THRESHOLD = 4.0  # Standard errors allowed between empirical and analytic risk.


@dataclass(frozen=True, eq=False)
class SampleRun:
    """
    Outcomes of repeated covariant measurements at a fixed true phase.

    Attributes
    ----------
    seed : int
        PCG64 seed.
    theta_true : float
        True phase.
    n_samples : int
        Number of outcomes.
    samples : np.ndarray
        Outcomes in [0, 2pi).
    """

    seed: int
    theta_true: float
    n_samples: int
    samples: np.ndarray = field(repr=False)


def outcome_cdf(state: PhaseState, grid: int = CDF_GRID) -> tuple[np.ndarray, np.ndarray]:
    """
    Tabulated CDF of the outcome offset delta = theta_hat - theta_true on [0, 2pi].

    Parameters
    ----------
    state : PhaseState
        The input state.
    grid : int, optional
        Number of intervals; must exceed 4 |S|.
        Default CDF_GRID

    Returns
    -------
    offsets : np.ndarray
        grid + 1 uniformly spaced offsets from 0 to 2pi.
    cdf : np.ndarray
        Nondecreasing CDF values, ending exactly at 1.
    """
    if grid < 4 * len(state):
        raise ValueError(f"CDF grid {grid} too coarse for a state on {len(state)} indices.")
    offsets = np.linspace(0, 2 * np.pi, grid + 1)
    density = np.abs(fourier_eval(state, offsets)) ** 2 / (2 * np.pi)
    cdf = cumulative_trapezoid(density, offsets, initial=0)
    if abs(cdf[-1] - 1) > CDF_TOLERANCE:
        raise NumericalError(f"Tabulated CDF ends at {cdf[-1]!r}, expected 1 within {CDF_TOLERANCE:.0e}.")
    return offsets, cdf / cdf[-1]


def cdf_error_bound(state: PhaseState, grid: int = CDF_GRID) -> float:
    """
    Bound on |tabulated CDF - exact CDF| at the grid offsets.

    The trapezoid rule on [0, x] errs by at most x h^2 / 12 max|f''| for the density f, and
    |f''| <= (1/2pi) sum_m m^2 |a_m| with a_m the autocorrelation of the coefficients.

    Parameters
    ----------
    state : PhaseState
        The input state.
    grid : int, optional
        Number of intervals.
        Default CDF_GRID

    Returns
    -------
    bound : float
    """
    phi = state.coeffs
    lags = np.arange(-(len(phi) - 1), len(phi))
    curvature = np.sum(lags**2.0 * np.abs(np.correlate(phi, phi, mode="full")))
    step = 2 * np.pi / grid
    return float(step**2 / 12 * curvature)


def sample_estimates(state: PhaseState, theta_true: float, n: int, seed: int, grid: int = CDF_GRID) -> SampleRun:
    """
    Draw n outcomes of the covariant measurement by inverse-CDF sampling.

    Parameters
    ----------
    state : PhaseState
        The input state.
    theta_true : float
        True phase.
    n : int
        Number of samples, n >= 1.
    seed : int
        Seed of the PCG64 generator.
    grid : int, optional
        CDF tabulation grid.
        Default CDF_GRID

    Returns
    -------
    run : SampleRun
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}.")
    offsets, cdf = outcome_cdf(state, grid)
    rng = np.random.Generator(np.random.PCG64(seed))
    delta = np.interp(rng.random(n), cdf, offsets)
    samples = np.mod(theta_true + delta, 2 * np.pi)
    logger.debug("Drew %d samples with seed %d", n, seed)
    return SampleRun(int(seed), float(theta_true), int(n), samples)


def empirical_risk(run: SampleRun, err: ErrorFunction) -> tuple[float, float]:
    """
    Sample mean and standard error of R(theta_true, theta_hat_i).

    Parameters
    ----------
    run : SampleRun
        A non-empty run.
    err : ErrorFunction
        The error function.

    Returns
    -------
    mean : float
    stderr : float
        std (ddof=1) / sqrt(n), nan for a single sample.
    """
    if run.n_samples < 1:
        raise ValueError("Empirical risk needs at least one sample.")
    errors = error_profile(err, wrap_angle(run.samples - run.theta_true))
    mean = float(np.mean(errors))
    if run.n_samples == 1:
        return mean, np.nan
    return mean, float(np.std(errors, ddof=1) / np.sqrt(run.n_samples))


def interval_probability(state: PhaseState, a: float, b: float) -> float:
    """
    Exact probability that theta_hat - theta_true falls in [a, b], b - a <= 2pi,
    integrating |F[phi]|^2 / 2pi term by term.

    Parameters
    ----------
    state : PhaseState
        The input state.
    a : float
        Lower end.
    b : float
        Upper end.

    Returns
    -------
    probability : float
    """
    if b < a or b - a > 2 * np.pi:
        raise ValueError(f"Need a <= b <= a + 2pi, got a={a}, b={b}.")
    phi = state.coeffs
    autocorrelation = np.correlate(phi, phi, mode="full")
    lags = np.arange(-(len(phi) - 1), len(phi))
    nonzero = lags != 0
    terms = (np.exp(1j * lags[nonzero] * b) - np.exp(1j * lags[nonzero] * a)) / (1j * lags[nonzero])
    total = autocorrelation[~nonzero][0] * (b - a) + np.sum(autocorrelation[nonzero] * terms)
    return float(np.real(total) / (2 * np.pi))


def monte_carlo_table(
    states: dict[str, PhaseState],
    losses: dict[str, ErrorFunction],
    seeds,
    n: int,
    theta_true: float = 0.0,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Empirical against analytic risk for every state, loss and seed.

    Parameters
    ----------
    states : dict[str, PhaseState]
        Named states.
    losses : dict[str, ErrorFunction]
        Named error functions.
    seeds : list[int]
        Generator seeds; each seed gives one run per state shared by all losses.
    n : int
        Samples per run.
    theta_true : float, optional
        True phase.
        Default 0.0
    n_jobs : int, optional
        joblib workers.
        Default 1

    Returns
    -------
    table : pd.DataFrame
        Columns state, loss, seed, empirical, stderr, analytic, z, passed.
    """
    jobs = [(name, seed) for name in states for seed in seeds]
    runs = Parallel(n_jobs=n_jobs)(delayed(sample_estimates)(states[name], theta_true, n, seed) for name, seed in jobs)
    rows = []
    for (name, seed), run in zip(jobs, runs):
        for loss_name, err in losses.items():
            mean, stderr = empirical_risk(run, err)
            analytic = risk(states[name], err)
            if stderr > 0:
                z = abs(mean - analytic) / stderr
            else:
                z = 0.0 if np.isclose(mean, analytic, rtol=0, atol=1e-12) else np.inf
            rows.append(
                {
                    "state": name,
                    "loss": loss_name,
                    "seed": seed,
                    "empirical": mean,
                    "stderr": stderr,
                    "analytic": analytic,
                    "z": z,
                    "passed": bool(z <= Z_THRESHOLD),
                }
            )
    return pd.DataFrame(rows)
