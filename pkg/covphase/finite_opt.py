import warnings
from dataclasses import dataclass
from logging import getLogger
from typing import Callable

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import eigh, eigh_tridiagonal, matmul_toeplitz

from covphase.core import (
    ErrorFunction,
    IndexSet,
    PhaseState,
    ToeplitzForm,
    error_fourier_coeffs,
    risk_toeplitz,
)
from covphase.utils import NumericalError, fix_phase

logger = getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-12
MIN_CONTINUUM_N = 8


@dataclass(frozen=True)
class FiniteOptimum:
    """
    Minimum-risk state on a finite index set.

    Attributes
    ----------
    index_set : IndexSet
        The index set optimized over.
    risk : float
        Minimum risk, the smallest eigenvalue of the Toeplitz matrix.
    state : PhaseState
        A minimizing state, phase fixed so its largest entry is real positive.
    eigen_residual : float
        ||T phi - risk phi||.
    gap : float
        Distance to the next eigenvalue, inf for a single index.
    """

    index_set: IndexSet
    risk: float
    state: PhaseState
    eigen_residual: float
    gap: float


def _is_tridiagonal(coeffs: np.ndarray) -> bool:
    return coeffs.size <= 2 or not np.any(coeffs[2:])


def min_risk_state(index_set: IndexSet, err: ErrorFunction) -> FiniteOptimum:
    """
    Minimize the risk over normalized states on an index set.

    The risk is the quadratic form phi^dagger T phi with T_jk = r_|j-k|, so the optimum is the
    smallest eigenpair of T. Forms with no lags beyond 1 (the sin loss) go through LAPACK
    bisection plus inverse iteration on the tridiagonal matrix, all others through the dense
    symmetric solver.

    Parameters
    ----------
    index_set : IndexSet
        Index set S.
    err : ErrorFunction
        The error function.

    Returns
    -------
    optimum : FiniteOptimum
    """
    dim = len(index_set)
    coeffs = error_fourier_coeffs(err, dim - 1)
    if dim == 1:
        state = PhaseState(index_set, np.ones(1))
        return FiniteOptimum(index_set, float(coeffs[0]), state, 0.0, np.inf)

    if _is_tridiagonal(coeffs):
        logger.debug("Tridiagonal bisection for |S| = %d", dim)
        eigvals, eigvecs = eigh_tridiagonal(
            np.full(dim, coeffs[0]),
            np.full(dim - 1, coeffs[1]),
            select="i",
            select_range=(0, 1),
            lapack_driver="stebz",
        )
    else:
        logger.debug("Dense symmetric eigensolver for |S| = %d", dim)
        eigvals, eigvecs = eigh(ToeplitzForm(coeffs, dim).matrix(), subset_by_index=[0, 1])

    risk_value = float(eigvals[0])
    vector = fix_phase(eigvecs[:, 0] / np.linalg.norm(eigvecs[:, 0]))
    residual = float(np.linalg.norm(matmul_toeplitz(coeffs, vector) - risk_value * vector))
    gap = float(eigvals[1] - eigvals[0])
    if residual > RESIDUAL_TOLERANCE:
        raise NumericalError(f"Eigenvector residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} for |S| = {dim}.")
    if gap < DEGENERACY_TOLERANCE:
        warnings.warn(f"Minimum eigenvalue is degenerate (gap {gap:.3e}); returning one of several optimal states.")
    return FiniteOptimum(index_set, risk_value, PhaseState(index_set, vector), residual, gap)


def sine_window_state(index_set: IndexSet) -> PhaseState:
    """
    State with coefficients proportional to sin((j + 1) pi / (m + 1)), j = 0, ..., m - 1, where m = |S|.
    It is the exact minimizer for the sin loss.
    """
    m = len(index_set)
    return PhaseState.from_amplitudes(index_set.lo, np.sin(np.arange(1, m + 1) * np.pi / (m + 1)))


def tridiagonal_min_risk(n: int) -> float:
    "Closed-form minimum sin-loss risk on S = {0, ..., n}: 1 - cos(pi / (n + 2))."
    return float(1 - np.cos(np.pi / (n + 2)))


def quoted_min_risk(n: int) -> float:
    """
    The alternative closed form 2 sin^2(pi / (2(n + 1))) that circulates for the same problem.
    It is the value on n indices, not n + 1, and is kept for comparison in reports.
    """
    return float(2 * np.sin(np.pi / (2 * (n + 1))) ** 2)


def heisenberg_table(n_values, n_jobs: int = 1) -> pd.DataFrame:
    """
    Minimum sin-loss risk on S = {0, ..., n} for each n, with the Heisenberg-scaled product n^2 * risk.

    Parameters
    ----------
    n_values : list[int]
        Values of n, each >= 1.
    n_jobs : int, optional
        joblib workers.
        Default 1

    Returns
    -------
    table : pd.DataFrame
        Columns n, risk, n2_risk.
    """
    n_values = [int(n) for n in n_values]
    if any(n < 1 for n in n_values):
        raise ValueError("Every n must be at least 1.")
    sin_loss = ErrorFunction.sin_loss()
    optima = Parallel(n_jobs=n_jobs)(delayed(min_risk_state)(IndexSet(0, n), sin_loss) for n in n_values)
    risks = np.array([optimum.risk for optimum in optima])
    n_array = np.array(n_values)
    return pd.DataFrame({"n": n_array, "risk": risks, "n2_risk": n_array**2 * risks})


def sampled_state(profile: Callable[[np.ndarray], np.ndarray], N: int) -> PhaseState:
    """
    Normalized samples (psi(j / N))_{j = -N..N} of a profile on [-1, 1].

    Parameters
    ----------
    profile : Callable
        Vectorized real or complex function on [-1, 1].
    N : int
        Sampling density, N >= 1.

    Returns
    -------
    state : PhaseState
        State on {-N, ..., N}.
    """
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}.")
    samples = np.asarray(profile(np.arange(-N, N + 1) / N))
    return PhaseState.from_amplitudes(-N, samples)


def half_cosine(x: np.ndarray) -> np.ndarray:
    "Dirichlet ground state of -d^2/dx^2 on [-1, 1]."
    return np.cos(np.pi * x / 2)


def continuum_limit_check(N: int, window: bool = True) -> float:
    """
    N^2 times the sin-loss risk of a sampled continuous profile on {-N, ..., N}.

    With window=True the profile is the half-period cosine cos(pi x / 2), whose value tends to
    pi^2 / 8, half the smallest Dirichlet eigenvalue of -d^2/dx^2 on [-1, 1]. With window=False
    the flat profile is used, whose scaled risk grows like N / 2.

    Parameters
    ----------
    N : int
        Sampling density, N >= 8.
    window : bool, optional
        Use the half-period cosine window.
        Default True

    Returns
    -------
    scaled_risk : float
    """
    if N < MIN_CONTINUUM_N:
        raise ValueError(f"N must be at least {MIN_CONTINUUM_N}, got {N}.")
    profile = half_cosine if window else np.ones_like
    state = sampled_state(profile, N)
    return N**2 * risk_toeplitz(state, ToeplitzForm.from_error(ErrorFunction.sin_loss(), len(state)))
