# States, error functions and the two equivalent risk functionals of covariant U(1) phase estimation.
# A pure input state is a coefficient vector over a contiguous set of integer charges S = {lo, ..., hi};
# the covariant measurement turns it into the outcome density |F[phi](theta_hat - theta)|^2 / 2pi.
from dataclasses import dataclass, field
from logging import getLogger

import numpy as np
from scipy.linalg import toeplitz

from covphase.utils import next_power_of_two, wrap_angle

logger = getLogger(__name__)

DEFAULT_GRID = 2**12  # Trapezoid points on the circle.
NORM_TOLERANCE = 1e-12

SIN_LOSS = "sin"
INTERVAL_LOSS = "interval"
CUSTOM_LOSS = "custom"
LOSS_KINDS = (SIN_LOSS, INTERVAL_LOSS, CUSTOM_LOSS)


@dataclass(frozen=True)
class IndexSet:
    """
    Contiguous set of integer indices {lo, ..., hi} (inclusive).

    Attributes
    ----------
    lo : int
        Smallest index.
    hi : int
        Largest index.
    """

    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise TypeError("IndexSet bounds must be integers.")
        if self.lo > self.hi:
            raise ValueError(f"IndexSet requires lo <= hi, got lo={self.lo}, hi={self.hi}.")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    @property
    def indices(self) -> np.ndarray:
        "The indices in ascending order."
        return np.arange(self.lo, self.hi + 1)

    @classmethod
    def from_size(cls, size: int, lo: int = 0) -> "IndexSet":
        "Index set {lo, ..., lo + size - 1}."
        if size < 1:
            raise ValueError(f"Index set size must be at least 1, got {size}.")
        return cls(lo, lo + size - 1)

    @classmethod
    def symmetric(cls, N: int) -> "IndexSet":
        "Index set {-N, ..., N}."
        if N < 0:
            raise ValueError(f"N must be non-negative, got {N}.")
        return cls(-N, N)

    def shifted(self, offset: int) -> "IndexSet":
        return IndexSet(self.lo + offset, self.hi + offset)


@dataclass(frozen=True, eq=False)
class PhaseState:
    """
    Normalized pure input state |phi> = sum_n phi_n e_n over a contiguous index set.
    Coefficients are stored in ascending order of n, from index_set.lo to index_set.hi.

    Attributes
    ----------
    index_set : IndexSet
        The charges n carrying the coefficients.
    coeffs : np.ndarray
        Complex coefficients, shape (len(index_set),).
    """

    index_set: IndexSet
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != len(self.index_set):
            raise ValueError(
                f"Expected {len(self.index_set)} coefficients for {self.index_set}, got {coeffs.shape[0]}."
            )
        norm_sq = float(np.sum(np.abs(coeffs) ** 2))
        if abs(norm_sq - 1) > NORM_TOLERANCE:
            raise ValueError(f"PhaseState must be normalized, sum |phi_n|^2 = {norm_sq!r}.")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_amplitudes(cls, lo: int, amplitudes) -> "PhaseState":
        """
        Build a state from unnormalized amplitudes starting at index lo.

        Parameters
        ----------
        lo : int
            Index of the first amplitude.
        amplitudes : array_like
            Real or complex amplitudes, not all zero.

        Returns
        -------
        state : PhaseState
        """
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size == 0:
            raise ValueError("At least one amplitude is required.")
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise ValueError("Amplitudes must not all be zero.")
        return cls(IndexSet.from_size(amplitudes.size, lo), amplitudes / norm)

    @property
    def indices(self) -> np.ndarray:
        return self.index_set.indices

    def __len__(self) -> int:
        return len(self.index_set)

    def rotated(self, alpha: float) -> "PhaseState":
        "Apply the group action phi_n <- exp(i n alpha) phi_n."
        return PhaseState(self.index_set, self.coeffs * np.exp(1j * self.indices * alpha))

    def with_global_phase(self, beta: float) -> "PhaseState":
        return PhaseState(self.index_set, self.coeffs * np.exp(1j * beta))

    def shifted(self, offset: int) -> "PhaseState":
        "Same coefficients on the index set translated by offset."
        return PhaseState(self.index_set.shifted(offset), self.coeffs)


@dataclass(frozen=True, eq=False)
class ErrorFunction:
    """
    Symmetric periodic error R(theta, theta_hat) = R(0, theta_hat - theta).

    Described by its Fourier cosine coefficients r_m = (1/2pi) int_0^2pi R(0, t) cos(m t) dt.
    Use the constructors sin_loss, interval_loss and custom.

    Attributes
    ----------
    kind : str
        One of "sin", "interval", "custom".
    coeffs : np.ndarray
        Cosine coefficients (r_0, ..., r_K) for the sin and custom kinds. Empty for interval,
        whose coefficients are generated on demand.
    T : float | None
        Interval half-width numerator (interval kind only).
    N : int | None
        Interval half-width denominator (interval kind only). The window is |theta_hat - theta| < T/N.
    """

    kind: str
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    T: float | None = None
    N: int | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"Unknown error function kind {self.kind!r}, expected one of {LOSS_KINDS}.")
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("Error function coefficients must be finite reals.")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if self.kind == INTERVAL_LOSS:
            check_interval(self.T, self.N)
        elif self.kind == CUSTOM_LOSS and coeffs.size == 0:
            raise ValueError("A custom error function needs at least r_0.")

    @classmethod
    def sin_loss(cls) -> "ErrorFunction":
        "R(0, t) = 2 sin^2(t/2) = 1 - cos t."
        return cls(SIN_LOSS, np.array([1.0, -0.5]))

    @classmethod
    def interval_loss(cls, T: float, N: int) -> "ErrorFunction":
        "R(0, t) = 1 if |t| >= T/N (on the circle), else 0."
        return cls(INTERVAL_LOSS, T=float(T), N=int(N))

    @classmethod
    def custom(cls, coeffs) -> "ErrorFunction":
        "Error function given by finitely many cosine coefficients (r_0, ..., r_K)."
        return cls(CUSTOM_LOSS, np.asarray(coeffs, dtype=float))

    @property
    def window(self) -> float | None:
        "Half-width T/N of the success window for the interval kind."
        if self.kind != INTERVAL_LOSS:
            return None
        return self.T / self.N


def check_interval(T: float | None, N: int | None) -> None:
    "Validate interval parameters: T > 0, integer N >= 1 and T/N < pi."
    if T is None or N is None:
        raise ValueError("Interval loss requires both T and N.")
    if int(N) != N or N < 1:
        raise ValueError(f"Interval loss requires a positive integer N, got {N}.")
    if not T > 0:
        raise ValueError(f"Interval loss requires T > 0, got {T}.")
    if T / N >= np.pi:
        raise ValueError(f"Interval loss requires T/N < pi (window would wrap the circle), got T/N = {T / N}.")


@dataclass(frozen=True, eq=False)
class ToeplitzForm:
    """
    Quadratic form phi^dagger T phi with T_jk = r_|j-k|.

    Attributes
    ----------
    coeffs : np.ndarray
        Cosine coefficients r_0, r_1, ...; missing lags are zero.
    dimension : int
        Matrix size |S|.
    """

    coeffs: np.ndarray
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"ToeplitzForm dimension must be at least 1, got {self.dimension}.")
        coeffs = np.zeros(self.dimension)
        given = np.asarray(self.coeffs, dtype=float).reshape(-1)[: self.dimension]
        coeffs[: given.size] = given
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_error(cls, err: ErrorFunction, dimension: int) -> "ToeplitzForm":
        return cls(error_fourier_coeffs(err, dimension - 1), dimension)

    def matrix(self) -> np.ndarray:
        "Dense real symmetric Toeplitz matrix."
        return toeplitz(self.coeffs)


def error_fourier_coeffs(err: ErrorFunction, max_lag: int) -> np.ndarray:
    """
    Fourier cosine coefficients (r_0, ..., r_max_lag) of an error function.

    Closed forms are used for the built-in kinds:
    - sin: (1, -1/2, 0, ...)
    - interval(T, N): r_0 = 1 - T/(pi N), r_m = -sin(m T/N) / (pi m)

    Parameters
    ----------
    err : ErrorFunction
        The error function.
    max_lag : int
        Largest lag m returned. Must be >= 0.

    Returns
    -------
    coeffs : np.ndarray
        Shape (max_lag + 1,).
    """
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}.")
    coeffs = np.zeros(max_lag + 1)
    if err.kind == INTERVAL_LOSS:
        check_interval(err.T, err.N)
        window = err.window
        lags = np.arange(1, max_lag + 1)
        coeffs[0] = 1 - window / np.pi
        coeffs[1:] = -np.sin(lags * window) / (np.pi * lags)
    else:
        given = err.coeffs[: max_lag + 1]
        coeffs[: given.size] = given
    return coeffs


def error_profile(err: ErrorFunction, theta) -> np.ndarray:
    """
    Evaluate R(0, theta).

    For the sin and custom kinds the finite cosine series r_0 + 2 sum_m r_m cos(m theta) is summed.
    For the interval kind the infinite series is summed in closed form, which gives the
    indicator of |wrap(theta)| >= T/N.

    Parameters
    ----------
    err : ErrorFunction
        The error function.
    theta : float or np.ndarray
        Angle(s) in radians.

    Returns
    -------
    values : np.ndarray
        R(0, theta), same shape as theta.
    """
    theta = np.asarray(theta, dtype=float)
    if err.kind == INTERVAL_LOSS:
        return (np.abs(wrap_angle(theta)) >= err.window).astype(float)
    lags = np.arange(1, err.coeffs.size)
    series = np.cos(np.multiply.outer(theta, lags)) @ err.coeffs[1:]
    return err.coeffs[0] + 2 * series


def fourier_eval(state: PhaseState, theta):
    """
    Evaluate F[phi](theta) = sum_n phi_n exp(i n theta).

    Parameters
    ----------
    state : PhaseState
        The input state.
    theta : float or np.ndarray
        Angle(s) in radians.

    Returns
    -------
    values : complex or np.ndarray
        F[phi](theta), same shape as theta.
    """
    theta = np.asarray(theta, dtype=float)
    values = np.exp(1j * np.multiply.outer(theta, state.indices)) @ state.coeffs
    if values.ndim == 0:
        return complex(values)
    return values


def outcome_density(state: PhaseState, theta_true: float, theta_hat):
    """
    Density of the covariant measurement outcome, (1/2pi) |F[phi](theta_hat - theta_true)|^2.

    Parameters
    ----------
    state : PhaseState
        The input state.
    theta_true : float
        The true phase.
    theta_hat : float or np.ndarray
        Outcome(s) in radians.

    Returns
    -------
    density : float or np.ndarray
    """
    values = np.abs(fourier_eval(state, np.asarray(theta_hat, dtype=float) - theta_true)) ** 2 / (2 * np.pi)
    if np.ndim(values) == 0:
        return float(values)
    return values


def _quadrature_grid(state: PhaseState, max_lag: int, grid: int | None) -> int:
    bandwidth = len(state) - 1
    required = 4 * (bandwidth + max_lag)
    if grid is None:
        grid = max(DEFAULT_GRID, next_power_of_two(required))
        logger.debug("Quadrature grid of %d points for bandwidth %d and %d lags", grid, bandwidth, max_lag)
        return grid
    if grid < required:
        raise ValueError(f"Quadrature grid {grid} is too coarse, need at least {required} points.")
    return grid


def risk_quadrature(state: PhaseState, err: ErrorFunction, grid: int | None = None) -> float:
    """
    Risk (1/2pi) int_0^2pi R(0, t) |F[phi](t)|^2 dt by the uniform trapezoid rule on the circle.

    Only lags up to the bandwidth |S| - 1 of |F[phi]|^2 contribute to the integral, so R is
    replaced by its cosine series truncated there; the integrand is then a trigonometric
    polynomial and the rule is exact up to rounding.

    Parameters
    ----------
    state : PhaseState
        The input state.
    err : ErrorFunction
        The error function.
    grid : int, optional
        Number of quadrature points. Must be >= 4 (bandwidth + max_lag).
        Default None, DEFAULT_GRID or the next power of two that resolves the integrand.

    Returns
    -------
    risk : float
    """
    max_lag = len(state) - 1
    if err.kind != INTERVAL_LOSS:
        max_lag = min(max_lag, err.coeffs.size - 1)
    grid = _quadrature_grid(state, max_lag, grid)
    thetas = 2 * np.pi * np.arange(grid) / grid
    truncated = ErrorFunction.custom(error_fourier_coeffs(err, max_lag))
    integrand = error_profile(truncated, thetas) * np.abs(fourier_eval(state, thetas)) ** 2
    return float(np.mean(integrand))


def risk_toeplitz(state: PhaseState, form: ToeplitzForm) -> float:
    """
    Risk as the Toeplitz quadratic form sum_jk conj(phi_j) r_|j-k| phi_k.

    Parameters
    ----------
    state : PhaseState
        The input state.
    form : ToeplitzForm
        Quadratic form of matching dimension.

    Returns
    -------
    risk : float
    """
    if form.dimension != len(state):
        raise ValueError(f"ToeplitzForm dimension {form.dimension} does not match state size {len(state)}.")
    phi = state.coeffs
    return float(np.real(np.vdot(phi, form.matrix() @ phi)))


def risk(state: PhaseState, err: ErrorFunction) -> float:
    "Risk of a state under an error function (Toeplitz route)."
    return risk_toeplitz(state, ToeplitzForm.from_error(err, len(state)))


def risk_profile(state: PhaseState, err: ErrorFunction, theta_true, grid: int = DEFAULT_GRID) -> np.ndarray:
    """
    Expected error as a function of the true phase, int R(theta, t) p(t | theta) dt.

    Under the covariant measurement this is constant in theta, so its maximum (worst case)
    and its mean (Bayes average) both equal risk(state, err).

    Parameters
    ----------
    state : PhaseState
        The input state.
    err : ErrorFunction
        The error function.
    theta_true : float or np.ndarray
        True phase(s).
    grid : int, optional
        Trapezoid points used per true phase.
        Default DEFAULT_GRID

    Returns
    -------
    risks : np.ndarray
        Expected error for each true phase.
    """
    theta_true = np.atleast_1d(np.asarray(theta_true, dtype=float))
    max_lag = len(state) - 1
    grid = _quadrature_grid(state, max_lag, grid)
    truncated = ErrorFunction.custom(error_fourier_coeffs(err, max_lag))
    theta_hat = 2 * np.pi * np.arange(grid) / grid
    risks = np.empty(theta_true.shape)
    for idx, theta in enumerate(theta_true):
        density = outcome_density(state, theta, theta_hat)
        risks[idx] = 2 * np.pi * np.mean(error_profile(truncated, theta_hat - theta) * density)
    return risks
