import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.utils.errors import DomainError


class StateLabel(enum.Enum):
    FUNDAMENTAL = "fundamental"
    EXCITED = "excited"


@dataclass(frozen=True)
class BoundState:
    """A normalised bound state c_l G(x+a) + c_r G(x-a) with energy -lam.

    Note:
        - G is the free Green function exp(-kappa |x|) / (2 kappa) with kappa = sqrt(lam).
        - For the excited state coeff_right carries the minus sign, so coeff_left > 0 > coeff_right.
    """

    lam: float
    coeff_left: float
    coeff_right: float
    label: StateLabel
    a: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise DomainError(f"A bound state needs lam > 0, got {self.lam}.")

    @property
    def kappa(self) -> float:
        return math.sqrt(self.lam)

    @property
    def energy(self) -> float:
        return -self.lam

    @property
    def coeffs(self) -> Tuple[float, float]:
        return self.coeff_left, self.coeff_right

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "lambda": self.lam,
            "coeff_left": self.coeff_left,
            "coeff_right": self.coeff_right,
        }


@dataclass(frozen=True)
class EigenPair:
    """The two negative eigenvalues -lambda0 < -lambda1 of a binding double well.

    The optional offsets are the detunings kappa0 - max|gamma|/2 and min|gamma|/2 - kappa1 found by the
    eigenvalue search; they keep the level splitting exact when it is exponentially small.
    """

    lambda0: float
    lambda1: float
    delta_lambda: float
    ground_offset: Optional[float] = None
    excited_offset: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.lambda0 > self.lambda1 > 0):
            raise DomainError(
                f"An eigen pair needs lambda0 > lambda1 > 0, got {self.lambda0}, {self.lambda1}."
            )
        if not self.delta_lambda > 0:
            raise DomainError(f"The level splitting must be positive, got {self.delta_lambda}.")

    def to_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "delta_lambda": self.delta_lambda,
        }
