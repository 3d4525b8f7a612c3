"""
Shared constants: the reference simulation setup and numerical guards
"""

# True inertia parameters [J11, J22, J33, J23, J13, J12] in kg*m^2
THETA_TRUE = [20.0, 17.0, 15.0, 1.4, 0.9, 1.2]

# Initial parameter estimate theta_hat(0) + zeta(0)
THETA_ESTIMATE_0 = [10.0, 30.0, 8.0, 0.0, 0.0, 0.0]

# Vector part of the initial attitude; the scalar part follows from the case
Q0_VECTOR = [0.33, -0.3, -0.62]

DEFAULT_GAINS = {
    'alpha': 0.5,
    'beta': 0.1,
    'kappa': 0.5,
    'f_m': 2.0,
    'gamma': 25.0,
    'lambda': 0.01,
    'lambda1': 0.0,
    'lambda2': 0.0,
    'iota1': 0.85,
    'iota2': 1.1,
    'gamma_ce': 15.0,
}

DEFAULT_DREM = {
    'a': 5.0,
    'b': 0.5,
    'k_I': 1e9,
    'k_N': 8.0,
}

ESTIMATOR_VARIANTS = [
    ('exponential', 'Composite I&I with exponential DREM term'),
    ('finite_time', 'Composite I&I with finite-time power term'),
    ('fixed_time', 'Composite I&I with fixed-time power term'),
    ('ce_baseline', 'Certainty-equivalence gradient baseline'),
]

# Noise model
CONE_HALF_ANGLE_DEG = 0.1
GYRO_STD = 1e-3

# Numerical guards
QE4_INIT_MIN = 1e-6
QE4_BARRIER_MIN = 1e-12
INERTIA_COND_MAX = 1e12
DET_UNDERFLOW_FLOOR = 1e-300
