# Energy-constrained phase estimation.
#
# kappa(E) = min <1 - cos Q> over states with <P^2> <= E is the Legendre transform
#   kappa(E) = max_{s > 0} gamma(s) - s E,
# where gamma(s) is the ground energy of 1 - cos Q + s P^2 on 2pi-periodic functions. Substituting
# theta = 2x turns that operator into a Mathieu operator, giving gamma(s) = s a0(2/s) / 4 + 1, and the
# optimal state has F[phi](theta) = ce0(theta/2, -2/s_E).
#
# Once 2/s exceeds FOURIER_ROUTE_Q the Mathieu truncation (about 2/s rows) is far larger than the
# Fourier basis e^{ik theta} that resolves the same ground state (about s^(-1/4) rows), so the
# computations below switch to that basis.
from dataclasses import dataclass
from logging import getLogger

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.optimize import brentq

from covphase.core import PhaseState
from covphase.mathieu import a0, mathieu_ground
from covphase.utils import NumericalError

logger = getLogger(__name__)

S_MIN = 1e-12  # Bracket limits for the dual variable s.
S_MAX = 1e12
BRACKET_FACTOR = 4.0
GOLDEN_TOL = 1e-8  # In log s.
POLISH_WIDTH = 1e-3
MIN_VARIATIONAL_ORDER = 30
TAIL_TOLERANCE = 1e-12
FOURIER_ROUTE_Q = 200.0

INV_PHI = (np.sqrt(5) - 1) / 2
INV_PHI_SQ = (3 - np.sqrt(5)) / 2


class BracketError(NumericalError):
    "Raised when the maximizer of gamma(s) - sE cannot be bracketed."


@dataclass(frozen=True)
class EnergySpec:
    """
    Energy constraint <phi|H|phi> <= E with H = sum_n n^2 I_n, the squared charge.

    Attributes
    ----------
    E : float
        Energy bound, E > 0.
    """

    E: float

    def __post_init__(self):
        if not self.E > 0 or not np.isfinite(self.E):
            raise ValueError(f"Energy bound must be positive and finite, got {self.E}.")

    def admits(self, state: PhaseState, rtol: float = 1e-9) -> bool:
        return energy_expectation(state) <= self.E * (1 + rtol)


@dataclass(frozen=True)
class TradeoffPoint:
    """
    Optimum of the energy-constrained problem.

    Attributes
    ----------
    E : float
        Energy bound.
    s_star : float
        Maximizer s_E of gamma(s) - sE.
    kappa : float
        kappa(E) = gamma(s_E) - s_E E.
    gamma_at_s : float
        gamma(s_E).
    """

    E: float
    s_star: float
    kappa: float
    gamma_at_s: float


def _check_s(s: float) -> None:
    if not s > 0 or not np.isfinite(s):
        raise ValueError(f"s must be positive and finite, got {s}.")


def _fourier_route(s: float) -> bool:
    return 2 / s > FOURIER_ROUTE_Q


def gamma(s: float) -> float:
    """
    Ground energy of 1 - cos Q + s P^2 through the Mathieu route, s a0(2/s) / 4 + 1.
    For 2/s > FOURIER_ROUTE_Q the value comes from gamma_variational.

    Parameters
    ----------
    s : float
        s > 0.

    Returns
    -------
    gamma : float
    """
    _check_s(s)
    if _fourier_route(s):
        return gamma_variational(s)
    return s * a0(2 / s) / 4 + 1


def gamma_asymptotic(s: float) -> float:
    "Small-s expansion gamma(s) ~ sqrt(s/2) - s/16."
    return float(np.sqrt(s / 2) - s / 16)


def default_variational_order(s: float) -> int:
    "Fourier truncation resolving the ground state of 1 - cos Q + s P^2; its width in k grows like s^(-1/4)."
    return max(MIN_VARIATIONAL_ORDER, int(np.ceil(12 * s**-0.25)) + 10)


def _variational_bands(s: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(-M, M + 1)
    return 1 + s * k**2.0, np.full(2 * M, -0.5)


def gamma_variational(s: float, M: int | None = None) -> float:
    """
    Ground energy of 1 - cos Q + s P^2 in the truncated Fourier basis e^{ik theta}, k = -M..M.
    Independent of the Mathieu route and used to check it.

    Parameters
    ----------
    s : float
        s > 0.
    M : int, optional
        Truncation, M >= 30.
        Default None, default_variational_order(s)

    Returns
    -------
    gamma : float
    """
    _check_s(s)
    if M is None:
        M = default_variational_order(s)
    if M < MIN_VARIATIONAL_ORDER:
        raise ValueError(f"M must be at least {MIN_VARIATIONAL_ORDER}, got {M}.")
    diagonal, off_diagonal = _variational_bands(s, M)
    value = eigvalsh_tridiagonal(diagonal, off_diagonal, select="i", select_range=(0, 0), lapack_driver="stebz")
    return float(value[0])


def _momentum_moment(s: float) -> float:
    # <P^2> of the ground state at s; equals gamma'(s).
    if _fourier_route(s):
        vector = _variational_ground(s, default_variational_order(s))
        k = (vector.size - 1) // 2
        return float(np.sum(np.arange(-k, k + 1) ** 2.0 * vector**2))
    ground = mathieu_ground(2 / s)
    orders = np.arange(ground.truncation + 1)
    return float(np.sum(orders**2 * ground.basis_coeffs**2))


def _dual(s: float, E: float) -> float:
    return gamma(s) - s * E


def _bracket(E: float) -> tuple[float, float, float]:
    s_mid = 1.0
    f_mid = _dual(s_mid, E)
    s_hi = s_mid * BRACKET_FACTOR
    f_hi = _dual(s_hi, E)
    while f_hi > f_mid:
        s_mid, f_mid = s_hi, f_hi
        s_hi = s_mid * BRACKET_FACTOR
        if s_hi > S_MAX:
            raise BracketError(f"No maximum of gamma(s) - sE found below s = {S_MAX:g} for E={E}.")
        f_hi = _dual(s_hi, E)
        logger.debug("Grew bracket to s = %g", s_hi)
    s_lo = s_mid / BRACKET_FACTOR
    f_lo = _dual(s_lo, E)
    while f_lo > f_mid:
        s_hi, s_mid, f_mid = s_mid, s_lo, f_lo
        s_lo = s_mid / BRACKET_FACTOR
        if s_lo < S_MIN:
            raise BracketError(f"No maximum of gamma(s) - sE found above s = {S_MIN:g} for E={E}.")
        f_lo = _dual(s_lo, E)
        logger.debug("Shrank bracket to s = %g", s_lo)
    return s_lo, s_mid, s_hi


def _golden_max(objective, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    # Golden-section maximization of a unimodal function on [lo, hi].
    dist = hi - lo
    if dist <= tol:
        return (lo + hi) / 2
    n = int(np.ceil(np.log(tol / dist) / np.log(INV_PHI)))
    c = lo + INV_PHI_SQ * dist
    d = lo + INV_PHI * dist
    yc, yd = objective(c), objective(d)
    for _ in range(n - 1):
        dist = INV_PHI * dist
        if yc > yd:
            hi, d, yd = d, c, yc
            c = lo + INV_PHI_SQ * dist
            yc = objective(c)
        else:
            lo, c, yc = c, d, yd
            d = lo + INV_PHI * dist
            yd = objective(d)
    if yc > yd:
        return (lo + d) / 2
    return (c + hi) / 2


def _polish(E: float, s_guess: float, s_lo: float, s_hi: float) -> float:
    # Root of <P^2>(s) = E near the golden-section estimate.
    def excess(s):
        return _momentum_moment(s) - E

    lo, hi = s_guess * (1 - POLISH_WIDTH), s_guess * (1 + POLISH_WIDTH)
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0:
        lo, hi = s_lo, s_hi
        f_lo, f_hi = excess(lo), excess(hi)
        if f_lo * f_hi > 0:
            raise NumericalError(f"<P^2>(s) - E does not change sign on [{lo:g}, {hi:g}] for E={E}.")
    return brentq(excess, lo, hi, xtol=1e-15 * lo, rtol=4 * np.finfo(float).eps)


def kappa(E: float) -> TradeoffPoint:
    """
    kappa(E) = max_{s > 0} gamma(s) - sE.

    The concave dual is bracketed geometrically from s = 1, maximized by golden-section search
    on log s and the maximizer is refined by solving <P^2>(s) = E, the stationarity condition.

    Parameters
    ----------
    E : float
        Energy bound, E > 0.

    Returns
    -------
    point : TradeoffPoint

    Raises
    ------
    BracketError
        If the maximizer cannot be bracketed in [S_MIN, S_MAX].
    """
    EnergySpec(E)
    s_lo, _, s_hi = _bracket(E)
    log_s = _golden_max(lambda u: _dual(np.exp(u), E), np.log(s_lo), np.log(s_hi))
    s_guess = float(np.exp(log_s))
    s_star = _polish(E, s_guess, s_lo, s_hi)
    gamma_at_s = gamma(s_star)
    value = gamma_at_s - s_star * E
    if value < _dual(s_guess, E) - 1e-12:
        raise NumericalError(f"Refined optimizer for E={E} is worse than the golden-section estimate.")
    logger.info("kappa(%g) = %.12g at s_E = %.12g", E, value, s_star)
    return TradeoffPoint(float(E), s_star, float(value), float(gamma_at_s))


def kappa_asymptotic(E: float) -> float:
    "Large-E expansion kappa(E) ~ 1/(8E) - 1/(128E^2)."
    return 1 / (8 * E) - 1 / (128 * E**2)


def _variational_ground(s: float, M: int) -> np.ndarray:
    diagonal, off_diagonal = _variational_bands(s, M)
    _, vectors = eigh_tridiagonal(diagonal, off_diagonal, select="i", select_range=(0, 0), lapack_driver="stebz")
    return vectors[:, 0] / np.linalg.norm(vectors[:, 0])


def kappa_primal(E: float, M: int | None = None) -> float:
    """
    kappa(E) by the primal route: sweep the Lagrange multiplier s until the ground state of
    1 - cos Q + s P^2 in the truncated Fourier basis has <P^2> = E, then return its <1 - cos Q>.

    Parameters
    ----------
    E : float
        Energy bound, E > 0.
    M : int, optional
        Fourier truncation.
        Default None, chosen from the smallest s in the bracket.

    Returns
    -------
    kappa : float
    """
    EnergySpec(E)
    s_lo = s_hi = 1.0
    order = M

    def excess(s):
        vector = _variational_ground(s, order or default_variational_order(s))
        k = (len(vector) - 1) // 2
        return float(np.sum(np.arange(-k, k + 1) ** 2 * vector**2)) - E

    while excess(s_lo) < 0:
        s_lo /= BRACKET_FACTOR
        if s_lo < S_MIN:
            raise BracketError(f"Primal multiplier for E={E} below {S_MIN:g}.")
    while excess(s_hi) > 0:
        s_hi *= BRACKET_FACTOR
        if s_hi > S_MAX:
            raise BracketError(f"Primal multiplier for E={E} above {S_MAX:g}.")
    if order is None:
        order = default_variational_order(s_lo)
    s_star = brentq(excess, s_lo, s_hi, xtol=1e-15 * s_lo, rtol=4 * np.finfo(float).eps)
    vector = _variational_ground(s_star, order)
    return float(1 - np.dot(vector[:-1], vector[1:]))


def energy_expectation(state: PhaseState) -> float:
    "<phi|H|phi> = sum_n n^2 |phi_n|^2."
    return float(np.sum(state.indices**2.0 * np.abs(state.coeffs) ** 2))


def _ground_amplitudes(s: float) -> tuple[float, np.ndarray]:
    # phi_0 and (phi_1, phi_2, ...) of the ground state, unnormalized; phi_{-k} = phi_k.
    if _fourier_route(s):
        vector = _variational_ground(s, default_variational_order(s))
        k = (vector.size - 1) // 2
        if vector[k] < 0:
            vector = -vector
        return float(vector[k]), vector[k + 1 :]
    ground = mathieu_ground(-2 / s)
    return float(ground.cos_coeffs[0]), ground.cos_coeffs[1:] / 2


def optimal_energy_state(E: float, M: int | None = None, point: TradeoffPoint | None = None) -> PhaseState:
    """
    Minimum-risk state under the energy bound E, F[phi](theta) = ce0(theta/2, -2/s_E).

    ce0(x, q) = sum_m A_2m cos(2mx) gives phi_0 = A_0 and phi_{+-m} = A_2m / 2. At q = -2/s_E
    the coefficients are those at 2/s_E with alternating signs, which puts the peak at theta = 0.
    Above FOURIER_ROUTE_Q the amplitudes are read off the Fourier-basis ground state instead.

    Parameters
    ----------
    E : float
        Energy bound, E > 0.
    M : int, optional
        The state lives on {-M, ..., M}.
        Default None, the smallest M with tail weight sum_{|k| > M} |phi_k|^2 < 1e-12.
    point : TradeoffPoint, optional
        Precomputed kappa(E).
        Default None

    Returns
    -------
    state : PhaseState
    """
    if point is None:
        point = kappa(E)
    centre, half = _ground_amplitudes(point.s_star)
    weights = 2 * half**2
    total = centre**2 + np.sum(weights)
    if M is None:
        tail = (np.sum(weights) - np.cumsum(weights)) / total
        M = int(np.argmax(tail < TAIL_TOLERANCE)) + 1
        logger.debug("Energy-optimal state truncated at M=%d", M)
    if M < 0:
        raise ValueError(f"M must be non-negative, got {M}.")
    half = np.concatenate([half, np.zeros(max(M - half.size, 0))])[:M]
    amplitudes = np.concatenate([half[::-1], [centre], half])
    return PhaseState.from_amplitudes(-M, amplitudes)


def kappa_curve(E_values, n_jobs: int = 1) -> pd.DataFrame:
    """
    kappa(E) over a grid of energy bounds.

    Returns
    -------
    curve : pd.DataFrame
        Columns E, s_star, kappa, asymptote, gamma_at_s.
    """
    points = Parallel(n_jobs=n_jobs)(delayed(kappa)(float(E)) for E in E_values)
    return pd.DataFrame(
        {
            "E": [p.E for p in points],
            "s_star": [p.s_star for p in points],
            "kappa": [p.kappa for p in points],
            "asymptote": [kappa_asymptotic(p.E) for p in points],
            "gamma_at_s": [p.gamma_at_s for p in points],
        }
    )
