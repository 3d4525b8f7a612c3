"""
Empirical detection of the excitation floor of Delta_N.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

# Delta_N is a scaled determinant whose size tracks k_I; 1e-2 separates the
# build-up of N from established excitation at the default gains
DEFAULT_PE_THRESHOLD = 1e-2


@dataclass
class PeFloor:
    detected: bool
    T_s: Optional[float] = None
    hbar: Optional[float] = None
    index: Optional[int] = None


def pe_floor_monitor(t: np.ndarray, Delta_N: np.ndarray, threshold: float = DEFAULT_PE_THRESHOLD) -> PeFloor:
    """First time Delta_N exceeds `threshold` and stays above it; hbar is the infimum afterwards."""
    t = np.asarray(t)
    Delta_N = np.asarray(Delta_N)
    below = np.flatnonzero(Delta_N <= threshold)
    if below.size == 0:
        start = 0
    elif below[-1] == Delta_N.size - 1:
        logger.debug(f"Delta_N never settled above {threshold:g}")
        return PeFloor(detected=False)
    else:
        start = int(below[-1]) + 1
    return PeFloor(detected=True, T_s=float(t[start]), hbar=float(Delta_N[start:].min()), index=start)
