# Position/momentum uncertainty on the circle and the exact trade-off between them.
from dataclasses import dataclass
from logging import getLogger

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from covphase.core import PhaseState
from covphase.energy import EnergySpec, TradeoffPoint, gamma, kappa
from covphase.utils import NumericalError

logger = getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class UncertaintyReport:
    """
    Attributes
    ----------
    delta2_pos : float
        1 - <cos Q>^2 - <sin Q>^2.
    delta2_mom : float
        <P^2> - <P>^2.
    bound_at_E : float
        Smallest delta2_pos compatible with delta2_mom, tradeoff_bound(delta2_mom).
    """

    delta2_pos: float
    delta2_mom: float
    bound_at_E: float

    @property
    def satisfied(self) -> bool:
        return self.delta2_pos >= self.bound_at_E - 1e-8


def position_moments(state: PhaseState) -> tuple[float, float]:
    """
    <cos Q> and <sin Q> from the shift-operator matrix elements.

    <e^{iQ}> = sum_k phi_k conj(phi_{k+1}), so <cos Q> = Re sum conj(phi_k) phi_{k+1} and
    <sin Q> = Im sum conj(phi_{k+1}) phi_k.

    Returns
    -------
    mean_cos : float
    mean_sin : float
    """
    shift = np.vdot(state.coeffs[:-1], state.coeffs[1:])
    return float(shift.real), float(-shift.imag)


def delta2_position(state: PhaseState) -> float:
    "Circular position uncertainty 1 - <cos Q>^2 - <sin Q>^2."
    mean_cos, mean_sin = position_moments(state)
    return 1 - mean_cos**2 - mean_sin**2


def delta2_momentum(state: PhaseState) -> float:
    "Momentum variance sum k^2 |phi_k|^2 - (sum k |phi_k|^2)^2."
    weights = np.abs(state.coeffs) ** 2
    # Offsets from lo make the value identical for shifted index sets.
    k = np.arange(len(state), dtype=float)
    mean = np.sum(k * weights)
    return float(np.sum(k**2 * weights) - mean**2)


def _bound(E: float) -> tuple[float, TradeoffPoint]:
    point = kappa(E)
    bound = 1 - (1 - point.kappa) ** 2
    s = point.s_star
    # s a0(2/s) / 4 = gamma(s) - 1
    direct = 1 - (s * E + 1 - gamma(s)) ** 2
    if abs(direct - bound) > IDENTITY_TOLERANCE:
        raise NumericalError(f"Trade-off identity failed at E={E}: {bound!r} vs {direct!r}.")
    return bound, point


def tradeoff_bound(E: float) -> float:
    """
    Smallest circular position uncertainty among states with momentum variance at most E,
    max_s 1 - (sE - s a0(2/s) / 4)^2 = 1 - (1 - kappa(E))^2.

    Parameters
    ----------
    E : float
        Momentum variance bound, E > 0.

    Returns
    -------
    bound : float
    """
    EnergySpec(E)
    return _bound(E)[0]


def tradeoff_asymptotic(E: float) -> float:
    "Large-E expansion 1/(4E) - 1/(32E^2)."
    return 1 / (4 * E) - 1 / (32 * E**2)


def tradeoff_curve(E_values, n_jobs: int = 1) -> pd.DataFrame:
    """
    Trade-off bound over a grid of momentum variances.

    Parameters
    ----------
    E_values : list[float]
        Grid, all > 0.
    n_jobs : int, optional
        joblib workers.
        Default 1

    Returns
    -------
    curve : pd.DataFrame
        Columns E, bound, asymptote, s_star.
    """
    E_values = [float(E) for E in E_values]
    for E in E_values:
        EnergySpec(E)
    results = Parallel(n_jobs=n_jobs)(delayed(_bound)(E) for E in E_values)
    return pd.DataFrame(
        {
            "E": E_values,
            "bound": [bound for bound, _ in results],
            "asymptote": [tradeoff_asymptotic(E) for E in E_values],
            "s_star": [point.s_star for _, point in results],
        }
    )


def uncertainty_report(state: PhaseState) -> UncertaintyReport:
    """
    Both uncertainties of a state and the bound its momentum variance implies.
    A state with zero momentum variance gets the limiting bound 1.
    """
    delta2_mom = delta2_momentum(state)
    bound = tradeoff_bound(delta2_mom) if delta2_mom > 0 else 1.0
    report = UncertaintyReport(delta2_position(state), delta2_mom, bound)
    if not report.satisfied:
        logger.warning("State beats the trade-off bound: %s", report)
    return report
