"""
External disturbance torque and measurement noise.

Attitude noise perturbs the eigenaxis uniformly over a spherical cap about
the true axis; gyro noise is additive Gaussian. Random numbers come from
numpy's PCG64 generator so a seed fixes the whole stream.
"""
from dataclasses import dataclass

import numpy as np

from plant.dynamics import BodyState
from utils.constants import CONE_HALF_ANGLE_DEG, GYRO_STD

DISTURBANCE_BOUND = 1e-4 * np.array([17.0, 19.5, 16.0])


def disturbance_at(t: float) -> np.ndarray:
    return 1e-4 * np.array([
        3.0 * np.cos(0.2 * t) + 4.0 * np.sin(0.06 * t) - 10.0,
        -1.5 * np.sin(0.04 * t) + 3.0 * np.cos(0.1 * t) + 15.0,
        3.0 * np.sin(0.2 * t) - 8.0 * np.sin(0.08 * t) + 5.0,
    ])


@dataclass(frozen=True)
class NoiseConfig:
    cone_half_angle: float = CONE_HALF_ANGLE_DEG  # degrees
    gyro_std: float = GYRO_STD
    seed: int = 0

    def __post_init__(self):
        if self.cone_half_angle < 0 or self.gyro_std < 0:
            raise ValueError("Noise magnitudes must be non-negative")

    @property
    def is_silent(self) -> bool:
        return self.cone_half_angle == 0 and self.gyro_std == 0

    def make_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


@dataclass(frozen=True)
class NoiseSample:
    """One draw of measurement noise, held across the RK4 stages of a step."""
    azimuth: float
    cos_polar: float
    gyro: np.ndarray


def draw_noise(noise: NoiseConfig, rng: np.random.Generator) -> NoiseSample:
    # uniform on the cap: cos(polar) uniform in [cos(max), 1]
    cos_max = np.cos(np.deg2rad(noise.cone_half_angle))
    azimuth = rng.uniform(0.0, 2.0 * np.pi)
    cos_polar = rng.uniform(cos_max, 1.0) if noise.cone_half_angle > 0 else 1.0
    gyro = rng.normal(0.0, noise.gyro_std, 3) if noise.gyro_std > 0 else np.zeros(3)
    return NoiseSample(azimuth, cos_polar, gyro)


def tangent_basis(n: np.ndarray):
    helper = np.zeros(3)
    helper[np.argmin(np.abs(n))] = 1.0
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def perturb_axis(n: np.ndarray, sample: NoiseSample) -> np.ndarray:
    sin_polar = np.sqrt(max(0.0, 1.0 - sample.cos_polar ** 2))
    e1, e2 = tangent_basis(n)
    tilt = np.cos(sample.azimuth) * e1 + np.sin(sample.azimuth) * e2
    axis = sample.cos_polar * n + sin_polar * tilt
    return axis / np.linalg.norm(axis)


def apply_noise(state: BodyState, sample: NoiseSample) -> BodyState:
    q = state.q
    sin_half = np.linalg.norm(q[:3])
    if sin_half < 1e-12 or sample.cos_polar == 1.0:
        q_meas = q
    else:
        axis = perturb_axis(q[:3] / sin_half, sample)
        q_meas = np.append(axis * sin_half, q[3])
        q_meas = q_meas / np.linalg.norm(q_meas)
    return BodyState(q_meas, state.omega + sample.gyro)


def measure(state: BodyState, noise: NoiseConfig, rng: np.random.Generator) -> BodyState:
    """Noisy measurement of the body state; noise=None or a silent config is the identity."""
    if noise is None or noise.is_silent:
        return state
    return apply_noise(state, draw_noise(noise, rng))
