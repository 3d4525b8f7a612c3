"""
Controller, filter and mixing gains.
"""
from dataclasses import asdict, dataclass

from utils.constants import ESTIMATOR_VARIANTS
from utils.exceptions import ScenarioConfigError

VARIANTS = [code for code, _ in ESTIMATOR_VARIANTS]


@dataclass(frozen=True)
class ControllerGains:
    alpha: float = 0.5
    beta: float = 0.1
    kappa: float = 0.5
    f_m: float = 2.0
    gamma: float = 25.0
    lam: float = 0.01
    a: float = 5.0
    b: float = 0.5
    k_I: float = 1e9
    k_N: float = 8.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    iota1: float = 0.85
    iota2: float = 1.1
    gamma_ce: float = 15.0

    def __post_init__(self):
        positive = ('alpha', 'beta', 'kappa', 'f_m', 'gamma', 'a', 'b', 'k_N', 'gamma_ce')
        for name in positive:
            if getattr(self, name) <= 0:
                raise ScenarioConfigError(f"Gain '{name}' must be positive, got {getattr(self, name)}")
        for name in ('lam', 'lambda1', 'lambda2'):
            if getattr(self, name) < 0:
                raise ScenarioConfigError(f"Gain '{name}' must be non-negative, got {getattr(self, name)}")
        if self.k_I < 1:
            raise ScenarioConfigError(f"k_I must be at least 1, got {self.k_I}")
        if not 0 < self.iota1 < 1:
            raise ScenarioConfigError(f"iota1 must lie in (0, 1), got {self.iota1}")
        if self.iota2 <= 1:
            raise ScenarioConfigError(f"iota2 must exceed 1, got {self.iota2}")

    @property
    def k_p(self) -> float:
        return self.kappa * (self.f_m + 1.0)

    @property
    def k_f(self) -> float:
        return self.kappa * (self.f_m + 1.0)

    def as_dict(self) -> dict:
        values = asdict(self)
        values['k_p'] = self.k_p
        values['k_f'] = self.k_f
        return values
