"""
Classical fixed-step fourth-order Runge-Kutta.

`rk4_relaxed_finish` is the same scheme for a state in which some entries z
obey a linear decay z' = -r z + g with a scalar rate r >= 0. Those entries
are advanced with the closed-form solution of the decay over every stage, so
the step stays stable and monotone however large r h becomes.
"""
from typing import Callable, Optional, Tuple

import numpy as np

Derivative = Callable[[np.ndarray, float], np.ndarray]
# Returns (slope, rate): slope holds g on the relaxed entries and the plain
# derivative everywhere else.
RelaxedField = Callable[[np.ndarray, float], Tuple[np.ndarray, float]]
Projection = Optional[Callable[[np.ndarray], np.ndarray]]


def rk4_step(state: np.ndarray, t: float, h: float, derivative: Derivative,
             project: Projection = None) -> np.ndarray:
    if h <= 0:
        raise ValueError(f"Step must be positive, got {h}")
    k1 = derivative(state, t)
    return rk4_finish(state, t, h, derivative, k1, project)


def rk4_finish(state: np.ndarray, t: float, h: float, derivative: Derivative, k1: np.ndarray,
               project: Projection = None) -> np.ndarray:
    """Remaining three stages when the first slope is already known."""
    k2 = derivative(state + 0.5 * h * k1, t + 0.5 * h)
    k3 = derivative(state + 0.5 * h * k2, t + 0.5 * h)
    k4 = derivative(state + h * k3, t + h)
    new_state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return project(new_state) if project is not None else new_state


def relax_weight(decay: float) -> float:
    """(1 - exp(-x)) / x for a decay exponent x >= 0, equal to 1 at x = 0."""
    if decay < 1e-12:
        return 1.0 - 0.5 * decay
    return float(-np.expm1(-decay) / decay)


def relaxed_advance(state: np.ndarray, h: float, slope: np.ndarray, rate: float,
                    relaxed: np.ndarray) -> np.ndarray:
    """state + h slope, with z(h) = exp(-r h) z + phi(r h) h g on the relaxed entries."""
    new_state = state + h * slope
    decay = max(rate, 0.0) * h
    new_state[relaxed] = np.exp(-decay) * state[relaxed] + relax_weight(decay) * h * slope[relaxed]
    return new_state


def rk4_relaxed_finish(state: np.ndarray, t: float, h: float, field: RelaxedField,
                       first: Tuple[np.ndarray, float], relaxed: np.ndarray,
                       project: Projection = None) -> np.ndarray:
    """RK4 whose stage and final combinations also weight the decay rate.

    With rate zero this is exactly `rk4_finish`. When g = r c for a constant
    c, every stage value of z - c is exp(-R) (z - c) where R is the RK4
    quadrature of the integrated rate.
    """
    if h <= 0:
        raise ValueError(f"Step must be positive, got {h}")
    k1, r1 = first
    k2, r2 = field(relaxed_advance(state, 0.5 * h, k1, r1, relaxed), t + 0.5 * h)
    k3, r3 = field(relaxed_advance(state, 0.5 * h, k2, r2, relaxed), t + 0.5 * h)
    k4, r4 = field(relaxed_advance(state, h, k3, r3, relaxed), t + h)
    slope = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    rate = (r1 + 2.0 * r2 + 2.0 * r3 + r4) / 6.0
    new_state = relaxed_advance(state, h, slope, rate, relaxed)
    return project(new_state) if project is not None else new_state
