import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.structures.well_config import WellConfig
from src.utils.errors import DomainError


@dataclass(frozen=True)
class Nonlinearity:
    """Time-dependent point couplings gamma |psi(t, y_j)|^(2 sigma).

    Note:
        - gamma=None couples each well with its own WellConfig strength (the linear model for sigma=0).
        - A float gamma couples both wells with the same constant.
    """

    gamma: Optional[float] = None
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if not self.sigma >= 0:
            raise DomainError(f"The nonlinearity power sigma must be >= 0, got {self.sigma}.")

    @property
    def is_linear(self) -> bool:
        return self.sigma == 0

    def strengths(self, cfg: WellConfig) -> Tuple[float, float]:
        if self.gamma is None:
            return cfg.gamma1, cfg.gamma2
        return self.gamma, self.gamma

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "sigma": self.sigma}


@dataclass(frozen=True)
class SolverParams:
    DEFAULT_FIXED_POINT_TOL = 1e-10
    DEFAULT_MAX_INNER_ITER = 200
    DEFAULT_BLOWUP_THRESHOLD = 1e6

    dt: float
    t_final: float
    fixed_point_tol: float = DEFAULT_FIXED_POINT_TOL
    max_inner_iter: int = DEFAULT_MAX_INNER_ITER
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD

    def __post_init__(self) -> None:
        if not (0 < self.dt <= self.t_final):
            raise DomainError(
                f"Solver needs 0 < dt <= t_final, got dt={self.dt}, t_final={self.t_final}."
            )
        if not (self.fixed_point_tol > 0 and self.blowup_threshold > 0):
            raise DomainError("Solver tolerances and thresholds must be positive.")
        if self.max_inner_iter < 1:
            raise DomainError(f"max_inner_iter must be >= 1, got {self.max_inner_iter}.")

    @property
    def n_steps(self) -> int:
        """Number of time steps; t_final is rounded to the nearest multiple of dt."""
        return max(1, int(math.floor(self.t_final / self.dt + 0.5)))

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_final": self.t_final,
            "fixed_point_tol": self.fixed_point_tol,
            "max_inner_iter": self.max_inner_iter,
            "blowup_threshold": self.blowup_threshold,
        }
