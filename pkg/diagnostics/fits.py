"""
Exponential envelope fit of a decaying positive series.
"""
from typing import Optional, Tuple

import numpy as np
from scipy import stats

LOG_FLOOR = 1e-300


def exponential_envelope_fit(t: np.ndarray, V: np.ndarray, t_start: float,
                             t_end: Optional[float] = None, min_samples: int = 100) -> Tuple[float, float]:
    """Least-squares slope of ln V against t over [t_start, t_end], with r^2.

    Samples at or below 1e-300 end the window.
    """
    t = np.asarray(t, dtype=float)
    V = np.asarray(V, dtype=float)
    mask = t >= t_start
    if t_end is not None:
        mask &= t <= t_end
    t_win, V_win = t[mask], V[mask]
    tiny = np.flatnonzero(V_win <= LOG_FLOOR)
    if tiny.size:
        t_win, V_win = t_win[:tiny[0]], V_win[:tiny[0]]
    if t_win.size < min_samples:
        raise ValueError(f"Need at least {min_samples} positive samples after t={t_start}, got {t_win.size}")

    log_V = np.log(V_win)
    if np.ptp(log_V) == 0.0:
        return 0.0, 1.0
    fit = stats.linregress(t_win, log_V)
    return float(fit.slope), float(fit.rvalue ** 2)
