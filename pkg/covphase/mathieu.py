# Ground characteristic value a0(q) and ground function ce0(theta, q) of the Mathieu equation
#   y'' + (a - 2q cos 2theta) y = 0,
# i.e. the lowest eigenvalue of -d^2/dtheta^2 + 2q cos 2theta on even pi-periodic functions.
#
# In the orthonormal basis u_0 = 1/sqrt(pi), u_m = sqrt(2/pi) cos(2m theta) of L^2(-pi/2, pi/2]
# the operator is the symmetric tridiagonal matrix with diagonal (2m)^2 and off-diagonal
# (sqrt(2) q, q, q, ...). The eigenvector gives the cosine coefficients of ce0 directly.
import warnings
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import eigh_tridiagonal, eigvalsh, eigvalsh_tridiagonal

logger = getLogger(__name__)

MIN_MATHIEU_ORDER = 20  # Truncation M >= MIN_MATHIEU_ORDER + ceil(|q|).
RESIDUAL_TOLERANCE = 1e-10
ORACLE_GRID = 2048
MAX_Q = 1e7  # Keeps the truncated matrix within memory.
SMALL_Q = 1e-2  # Below this a0 comes from its power series.


@dataclass(frozen=True, eq=False)
class MathieuGround:
    """
    Ground characteristic value and ground function of the Mathieu equation.

    Attributes
    ----------
    q : float
        Mathieu parameter.
    a0 : float
        Ground characteristic value a0(q).
    cos_coeffs : np.ndarray
        (A_0, A_2, ..., A_2M) with ce0(theta, q) = sum_m A_2m cos(2m theta), normalized to unit
        L^2 norm on (-pi/2, pi/2] and A_0 > 0.
    truncation : int
        Truncation order M.
    residual : float
        Recurrence residual ||T c - a0 c|| of the orthonormal coefficients, scaled by max(1, |q|).
    truncation_error : float
        |a0 at 2M - a0 at M|, nan unless requested.
    """

    q: float
    a0: float
    cos_coeffs: np.ndarray = field(repr=False)
    truncation: int
    residual: float
    truncation_error: float = np.nan

    @property
    def basis_coeffs(self) -> np.ndarray:
        "Coefficients in the orthonormal basis (1/sqrt(pi), sqrt(2/pi) cos 2theta, ...)."
        scale = np.full(self.cos_coeffs.size, np.sqrt(np.pi / 2))
        scale[0] = np.sqrt(np.pi)
        return self.cos_coeffs * scale

    def __call__(self, theta):
        return ce0_series(self.cos_coeffs, theta)


def default_truncation(q: float) -> int:
    "Smallest admissible truncation order for q."
    return MIN_MATHIEU_ORDER + int(np.ceil(abs(q)))


def _check_truncation(q: float, M: int | None) -> int:
    if not np.isfinite(q):
        raise ValueError(f"q must be finite, got {q}.")
    if abs(q) > MAX_Q:
        raise ValueError(f"|q| = {abs(q)} exceeds the supported maximum {MAX_Q:g}.")
    minimum = default_truncation(q)
    if M is None:
        return minimum
    if M < minimum:
        raise ValueError(f"Truncation M={M} is below the minimum {minimum} for q={q}.")
    return int(M)


def recurrence_bands(q: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Diagonal and off-diagonal of the truncated Mathieu matrix in the orthonormal even cosine basis.

    Parameters
    ----------
    q : float
        Mathieu parameter.
    M : int
        Truncation order, the basis is cos(2m theta) for m = 0, ..., M.

    Returns
    -------
    diagonal : np.ndarray
        (2m)^2, shape (M + 1,).
    off_diagonal : np.ndarray
        (sqrt(2) q, q, ..., q), shape (M,).
    """
    diagonal = (2.0 * np.arange(M + 1)) ** 2
    off_diagonal = np.full(M, float(q))
    if M > 0:
        off_diagonal[0] *= np.sqrt(2)
    return diagonal, off_diagonal


def recurrence_matrix(q: float, M: int) -> np.ndarray:
    "Dense form of recurrence_bands."
    diagonal, off_diagonal = recurrence_bands(q, M)
    return np.diag(diagonal) + np.diag(off_diagonal, 1) + np.diag(off_diagonal, -1)


def _tolerance(q: float) -> float:
    return np.finfo(float).eps * max(1.0, abs(q))


def _a0_series(q: float) -> float:
    # Full relative precision at small q; bisection is only eps-accurate in absolute terms.
    q2 = q * q
    return -q2 / 2 + 7 * q2**2 / 128 - 29 * q2**3 / 2304 + 68687 * q2**4 / 18874368


def a0(q: float, M: int | None = None) -> float:
    """
    Ground characteristic value a0(q), computed at |q| since a0 is even in q.
    For |q| < SMALL_Q the power series through q^8 is returned.

    Parameters
    ----------
    q : float
        Mathieu parameter, finite.
    M : int, optional
        Truncation order, at least 20 + ceil(|q|).
        Default None, the minimum admissible order.

    Returns
    -------
    a0 : float
    """
    M = _check_truncation(q, M)
    if q == 0:
        return 0.0
    if abs(q) < SMALL_Q:
        return _a0_series(q)
    diagonal, off_diagonal = recurrence_bands(abs(q), M)
    value = eigvalsh_tridiagonal(
        diagonal, off_diagonal, select="i", select_range=(0, 0), lapack_driver="stebz", tol=_tolerance(q)
    )
    return float(value[0])


def mathieu_ground(q: float, M: int | None = None, check_truncation: bool = False) -> MathieuGround:
    """
    Ground characteristic value together with the cosine coefficients of ce0.

    Negative q is handled by evenness of a0 and the identity A_2m(-q) = (-1)^m A_2m(q),
    which is the shift theta -> theta + pi/2 of the ground function.

    Parameters
    ----------
    q : float
        Mathieu parameter.
    M : int, optional
        Truncation order, at least 20 + ceil(|q|).
        Default None, the minimum admissible order.
    check_truncation : bool, optional
        Recompute a0 at 2M and store the difference as truncation_error.
        Default False

    Returns
    -------
    ground : MathieuGround
    """
    M = _check_truncation(q, M)
    diagonal, off_diagonal = recurrence_bands(abs(q), M)
    if q == 0:
        value, vector = 0.0, np.eye(M + 1)[:, 0]
    else:
        values, vectors = eigh_tridiagonal(
            diagonal, off_diagonal, select="i", select_range=(0, 0), lapack_driver="stebz", tol=_tolerance(q)
        )
        value, vector = float(values[0]), vectors[:, 0] / np.linalg.norm(vectors[:, 0])
        if abs(q) < SMALL_Q:
            value = _a0_series(q)
    if vector[0] < 0:
        vector = -vector

    applied = diagonal * vector - value * vector
    applied[:-1] += off_diagonal * vector[1:]
    applied[1:] += off_diagonal * vector[:-1]
    residual = float(np.linalg.norm(applied) / max(1.0, abs(q)))
    if residual > RESIDUAL_TOLERANCE:
        warnings.warn(f"Mathieu recurrence residual {residual:.3e} at q={q}, M={M} exceeds {RESIDUAL_TOLERANCE:.0e}.")

    scale = np.full(M + 1, np.sqrt(2 / np.pi))
    scale[0] = 1 / np.sqrt(np.pi)
    cos_coeffs = vector * scale
    if q < 0:
        cos_coeffs = cos_coeffs * (-1.0) ** np.arange(M + 1)

    truncation_error = np.nan
    if check_truncation:
        truncation_error = abs(a0(q, 2 * M) - value)
        logger.debug("a0(%g) truncation error %.3e at M=%d", q, truncation_error, M)
    return MathieuGround(float(q), value, cos_coeffs, M, residual, truncation_error)


def ce0_coeffs(q: float, M: int | None = None) -> np.ndarray:
    "Cosine coefficients (A_0, A_2, ..., A_2M) of ce0(., q), unit L^2 norm on the period, A_0 > 0."
    return mathieu_ground(q, M).cos_coeffs


def ce0_series(cos_coeffs: np.ndarray, theta, derivative: int = 0):
    """
    Evaluate sum_m A_2m cos(2m theta) or its first or second derivative.

    Parameters
    ----------
    cos_coeffs : np.ndarray
        (A_0, A_2, ..., A_2M).
    theta : float or np.ndarray
        Angle(s).
    derivative : int, optional
        0, 1 or 2.
        Default 0

    Returns
    -------
    values : float or np.ndarray
    """
    theta = np.asarray(theta, dtype=float)
    wavenumbers = 2.0 * np.arange(cos_coeffs.size)
    phases = np.multiply.outer(theta, wavenumbers)
    if derivative == 0:
        values = np.cos(phases) @ cos_coeffs
    elif derivative == 1:
        values = -np.sin(phases) @ (wavenumbers * cos_coeffs)
    elif derivative == 2:
        values = -np.cos(phases) @ (wavenumbers**2 * cos_coeffs)
    else:
        raise ValueError(f"derivative must be 0, 1 or 2, got {derivative}.")
    if values.ndim == 0:
        return float(values)
    return values


def ce0_eval(q: float, theta, M: int | None = None):
    """
    ce0(theta, q).

    Parameters
    ----------
    q : float
        Mathieu parameter.
    theta : float or np.ndarray
        Angle(s).
    M : int, optional
        Truncation order.
        Default None, the minimum admissible order.

    Returns
    -------
    values : float or np.ndarray
    """
    return ce0_series(ce0_coeffs(q, M), theta)


def a0_grid(q: float, n_points: int = ORACLE_GRID) -> float:
    """
    Independent estimate of a0(q): lowest eigenvalue of -d^2/dtheta^2 + 2q cos 2theta discretized by
    Fourier collocation on n_points uniform points of one period. Parity is not restricted.

    Parameters
    ----------
    q : float
        Mathieu parameter.
    n_points : int, optional
        Collocation points, even.
        Default ORACLE_GRID

    Returns
    -------
    a0 : float
    """
    if n_points < 4 or n_points % 2:
        raise ValueError(f"n_points must be an even number >= 4, got {n_points}.")
    theta = np.pi * np.arange(n_points) / n_points
    wavenumbers = 2.0 * np.fft.fftfreq(n_points, d=1 / n_points)
    laplacian = np.real(np.fft.ifft(wavenumbers[:, None] ** 2 * np.fft.fft(np.eye(n_points), axis=0), axis=0))
    operator = (laplacian + laplacian.T) / 2 + np.diag(2 * q * np.cos(2 * theta))
    return float(eigvalsh(operator, subset_by_index=[0, 0])[0])


def a0_table(q_values, n_jobs: int = 1) -> pd.DataFrame:
    "Columns q, a0."
    q_values = [float(q) for q in q_values]
    values = Parallel(n_jobs=n_jobs)(delayed(a0)(q) for q in q_values)
    return pd.DataFrame({"q": q_values, "a0": values})
