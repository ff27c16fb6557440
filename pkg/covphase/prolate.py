# Bandlimited-timelimited concentration problem: the sinc integral operator on [-1, 1] and its
# finite analogue on {-N, ..., N}, which gives the best probability of landing within T/N of the truth.
import warnings
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import eigh, toeplitz
from scipy.signal.windows import dpss
from scipy.special import roots_legendre

from covphase.core import ErrorFunction, IndexSet, PhaseState, check_interval, risk
from covphase.finite_opt import sampled_state
from covphase.utils import fix_phase

logger = getLogger(__name__)

DEFAULT_QUAD_ORDER = 80
MIN_QUAD_ORDER = 40
ASYMPTOTIC_MIN_T = 3 / 32  # Correction factor 1 - 3/(32T) must stay positive.
ASYMPTOTIC_REGIME_T = 2.0  # Below this the two-term expansion is not meaningful.


@dataclass(frozen=True, eq=False)
class ProlateSpectrum:
    """
    Leading spectrum of the sinc-kernel operator at bandwidth T, discretized by Nyström's method.

    Attributes
    ----------
    T : float
        Bandwidth.
    quad_order : int
        Number of Gauss-Legendre nodes.
    eigenvalues : np.ndarray
        Leading eigenvalues, descending. eigenvalues[0] is lambda(T).
    eigenfunction_samples : np.ndarray
        Top eigenfunction at the nodes, unit norm under the quadrature weights and positive at
        the node nearest 0.
    nodes : np.ndarray
        Gauss-Legendre nodes on [-1, 1].
    weights : np.ndarray
        Gauss-Legendre weights.
    refinement_error : float
        |lambda_0 at 2 * quad_order - lambda_0 at quad_order|, nan if not computed.
    """

    T: float
    quad_order: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenfunction_samples: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    refinement_error: float = np.nan

    @property
    def top_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def eigenfunction(self, x) -> np.ndarray:
        """
        Nyström interpolation of the top eigenfunction,
        psi(x) = (1 / lambda) sum_j w_j K(x, x_j) psi(x_j).

        Parameters
        ----------
        x : float or np.ndarray
            Points in [-1, 1].

        Returns
        -------
        values : np.ndarray
            psi(x), same shape as x.
        """
        x = np.asarray(x, dtype=float)
        kernel = sinc_kernel(self.T, x[..., None], self.nodes)
        return kernel @ (self.weights * self.eigenfunction_samples) / self.top_eigenvalue


def sinc_kernel(T: float, x, y):
    "K(x, y) = sin(T(x - y)) / (pi (x - y)), with the limit T/pi on the diagonal."
    return T / np.pi * np.sinc(T * (np.asarray(x) - np.asarray(y)) / np.pi)


def _nystrom(T: float, quad_order: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(quad_order)
    root_w = np.sqrt(weights)
    matrix = root_w[:, None] * sinc_kernel(T, nodes[:, None], nodes[None, :]) * root_w[None, :]
    eigvals, eigvecs = eigh(matrix, subset_by_index=[quad_order - k, quad_order - 1])
    return eigvals[::-1], eigvecs[:, ::-1], nodes, weights


def prolate_spectrum(T: float, quad_order: int = DEFAULT_QUAD_ORDER, k: int = 1, refine: bool = True) -> ProlateSpectrum:
    """
    Top-k eigenpairs of int_{-1}^{1} K(x, y) psi(y) dy = lambda psi(x).

    Gauss-Legendre Nyström discretization, symmetrized as W^1/2 K W^1/2 so that a symmetric
    eigensolver applies.

    Parameters
    ----------
    T : float
        Bandwidth, T > 0.
    quad_order : int, optional
        Number of quadrature nodes, >= 40.
        Default DEFAULT_QUAD_ORDER
    k : int, optional
        Number of eigenvalues, 1 <= k <= quad_order.
        Default 1
    refine : bool, optional
        Repeat at doubled order to estimate the discretization error of lambda_0.
        Default True

    Returns
    -------
    spectrum : ProlateSpectrum
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}.")
    if quad_order < MIN_QUAD_ORDER:
        raise ValueError(f"quad_order must be at least {MIN_QUAD_ORDER}, got {quad_order}.")
    if k < 1 or k > quad_order:
        raise ValueError(f"k must lie in [1, quad_order = {quad_order}], got {k}.")

    eigvals, eigvecs, nodes, weights = _nystrom(T, quad_order, k)
    if np.any(eigvals <= 0) or np.any(eigvals >= 1):
        warnings.warn(f"Nyström eigenvalues at T={T} leave (0, 1); trailing ones are at rounding level.")

    samples = eigvecs[:, 0] / np.sqrt(weights)
    if samples[np.argmin(np.abs(nodes))] < 0:
        samples = -samples

    refinement_error = np.nan
    if refine:
        refined, _, _, _ = _nystrom(T, 2 * quad_order, 1)
        refinement_error = float(abs(refined[0] - eigvals[0]))
        logger.debug("lambda_0(T=%g) refinement error %.3e at order %d", T, refinement_error, quad_order)
    return ProlateSpectrum(float(T), quad_order, eigvals, samples, nodes, weights, refinement_error)


def lambda_asymptotic(T: float) -> float:
    """
    Large-T expansion lambda(T) ~ 1 - 4 sqrt(pi T) exp(-2T) (1 - 3 / (32 T)).

    Parameters
    ----------
    T : float
        Bandwidth, T > 3/32.

    Returns
    -------
    lambda_T : float
    """
    if not T > ASYMPTOTIC_MIN_T:
        raise ValueError(f"lambda_asymptotic requires T > 3/32, got {T}.")
    if T < ASYMPTOTIC_REGIME_T:
        warnings.warn(f"lambda_asymptotic evaluated at T={T}, outside its large-T regime.")
    return float(1 - 4 * np.sqrt(np.pi * T) * np.exp(-2 * T) * (1 - 3 / (32 * T)))


def prolate_curve(T_values, quad_order: int = DEFAULT_QUAD_ORDER, n_jobs: int = 1) -> pd.DataFrame:
    """
    Nyström and asymptotic lambda(T) over a list of bandwidths.

    Returns
    -------
    curve : pd.DataFrame
        Columns T, lambda_nystrom, lambda_asymptotic, gap, where gap = lambda_asymptotic - lambda_nystrom.
    """
    T_values = [float(T) for T in T_values]
    spectra = Parallel(n_jobs=n_jobs)(delayed(prolate_spectrum)(T, quad_order, 1, False) for T in T_values)
    nystrom = np.array([spectrum.top_eigenvalue for spectrum in spectra])
    asymptotic = np.array([lambda_asymptotic(T) for T in T_values])
    return pd.DataFrame(
        {"T": T_values, "lambda_nystrom": nystrom, "lambda_asymptotic": asymptotic, "gap": asymptotic - nystrom}
    )


def concentration_matrix(N: int, T: float) -> np.ndarray:
    "A_jk = sin((j - k) T/N) / (pi (j - k)) on {-N, ..., N}, diagonal T / (pi N)."
    check_interval(T, N)
    window = T / N
    lags = np.arange(2 * N + 1)
    return toeplitz(window / np.pi * np.sinc(lags * window / np.pi))


def dpss_state(N: int, T: float) -> PhaseState:
    """
    Discrete prolate spheroidal sequence on {-N, ..., N}: the state maximizing the probability
    that the estimate lands within T/N of the true phase.

    Parameters
    ----------
    N : int
        Half-width of the index set, N >= 1.
    T : float
        Window numerator, 0 < T/N < pi.

    Returns
    -------
    state : PhaseState
    """
    matrix = concentration_matrix(N, T)
    dim = matrix.shape[0]
    _, eigvecs = eigh(matrix, subset_by_index=[dim - 1, dim - 1])
    return PhaseState(IndexSet.symmetric(N), fix_phase(eigvecs[:, 0] / np.linalg.norm(eigvecs[:, 0])))


def dpss_reference(N: int, T: float) -> tuple[np.ndarray, float]:
    """
    The same sequence from scipy's multitaper windows, used as an independent check.

    Returns
    -------
    window : np.ndarray
        Unit-norm taper of length 2N + 1, phase fixed like dpss_state.
    ratio : float
        Its concentration ratio, the top eigenvalue of the concentration matrix.
    """
    check_interval(T, N)
    length = 2 * N + 1
    windows, ratios = dpss(length, length * T / (2 * np.pi * N), Kmax=1, return_ratios=True)
    window = windows[0] / np.linalg.norm(windows[0])
    return fix_phase(window), float(ratios[0])


def interval_success_prob(state: PhaseState, T: float, N: int) -> float:
    """
    Probability that the covariant estimate lies within T/N of the true phase, 1 - risk under the interval loss.

    Parameters
    ----------
    state : PhaseState
        Any state.
    T : float
        Window numerator.
    N : int
        Window denominator, 0 < T/N < pi.

    Returns
    -------
    probability : float
    """
    return 1 - risk(state, ErrorFunction.interval_loss(T, N))


def prolate_sampled_state(T: float, N: int, quad_order: int = DEFAULT_QUAD_ORDER) -> PhaseState:
    "Finite state on {-N, ..., N} from samples psi_T(j / N) of the top prolate function."
    spectrum = prolate_spectrum(T, quad_order, refine=False)
    return sampled_state(spectrum.eigenfunction, N)
