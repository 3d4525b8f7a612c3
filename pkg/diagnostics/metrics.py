"""
Tracking and estimation metrics over a time window.
"""
from itertools import combinations
from typing import Dict, Optional

import numpy as np

from drem.monitor import DEFAULT_PE_THRESHOLD, pe_floor_monitor
from utils.exceptions import ScenarioConfigError

SYNC_FLOOR = 1e-6


def max_component_rms(x: np.ndarray) -> float:
    """RMS of every component, then the largest one."""
    return float(np.sqrt(np.mean(x ** 2, axis=0)).max())


def sync_ratio_spread(theta_err: np.ndarray) -> Optional[float]:
    """Largest relative variation of theta_err_i / theta_err_j over the window.

    Samples where either component is below 1e-6 are left out; None when no
    pair has samples left.
    """
    worst = None
    for i, j in combinations(range(theta_err.shape[1]), 2):
        a, b = theta_err[:, i], theta_err[:, j]
        keep = (np.abs(a) >= SYNC_FLOOR) & (np.abs(b) >= SYNC_FLOOR)
        if keep.sum() < 2:
            continue
        ratio = a[keep] / b[keep]
        spread = float((ratio.max() - ratio.min()) / np.mean(np.abs(ratio)))
        worst = spread if worst is None else max(worst, spread)
    return worst


def metrics(log, t_start: float, t_end: float, pe_threshold: float = DEFAULT_PE_THRESHOLD) -> Dict:
    if t_end <= t_start:
        raise ScenarioConfigError(f"Metrics window [{t_start}, {t_end}] is empty")
    window = log.window(t_start, t_end)
    if not window.any():
        raise ScenarioConfigError(f"Metrics window [{t_start}, {t_end}] contains no logged samples")

    q_e = log['q_e'][window]
    floor = pe_floor_monitor(log.t[:len(log)], log['Delta_N'], pe_threshold)
    return {
        'rms_qev': max_component_rms(q_e[:, :3]),
        'rms_omega_e': max_component_rms(log['omega_e'][window]),
        'rms_theta_err': max_component_rms(log['theta_err'][window]),
        'min_abs_qe4': float(np.min(np.abs(q_e[:, 3]))),
        'T_s_detected': floor.T_s,
        'hbar': floor.hbar,
        'sync_ratio_spread': sync_ratio_spread(log['theta_err'][window]),
    }
