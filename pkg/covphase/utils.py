import numpy as np


class NumericalError(RuntimeError):
    "Raised when a numerical procedure fails to produce a trustworthy result."


def wrap_angle(delta):
    """
    Map an angle (or array of angles) to the interval (-pi, pi].
    Ties at +-pi are assigned to +pi.

    Parameters
    ----------
    delta : float or np.ndarray
        Angle(s) in radians.

    Returns
    -------
    wrapped : float or np.ndarray
        Angle(s) in (-pi, pi].
    """
    return np.pi - np.mod(np.pi - np.asarray(delta, dtype=float), 2 * np.pi)


def fix_phase(vector: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """
    Fix the arbitrary phase of an eigenvector so that its largest-magnitude entry is real positive.
    Ties (within rtol) are broken by the lowest index.

    Parameters
    ----------
    vector : np.ndarray
        Real or complex vector.
    rtol : float, optional
        Relative tolerance used to decide ties between largest entries.
        Default 1e-12

    Returns
    -------
    fixed : np.ndarray
        The phase-fixed vector. Real input stays real.
    """
    magnitudes = np.abs(vector)
    pivot = int(np.flatnonzero(magnitudes >= magnitudes.max() * (1 - rtol))[0])
    phase = vector[pivot] / magnitudes[pivot]
    fixed = vector / phase
    if np.isrealobj(vector):
        return np.real(fixed)
    return fixed


def next_power_of_two(value: int) -> int:
    "Smallest power of two greater than or equal to value."
    return 1 << max(int(value) - 1, 0).bit_length()


def parse_number_list(text: str) -> list[float]:
    """
    Parse a comma separated list of numbers, e.g. "1, 2.5,10".

    Parameters
    ----------
    text : str
        The list to parse.

    Returns
    -------
    values : list[float]
        Parsed values.
    """
    try:
        return [float(item) for item in text.split(",") if item.strip() != ""]
    except ValueError:
        raise ValueError(f"Could not parse '{text}' as a comma separated list of numbers.")
