import enum
from dataclasses import dataclass
from typing import Tuple

from src.utils.errors import DomainError


class ExistenceVerdict(enum.Enum):
    """How many negative eigenvalues a pair of point interactions supports."""

    TWO_EIGENVALUES = "TwoEigenvalues"
    ONE_EIGENVALUE = "OneEigenvalue"
    NONE = "None"


@dataclass(frozen=True)
class WellConfig:
    """Geometry and strengths of two point scatterers at -a and +a.

    Note:
        - Units are those of the model Hamiltonian -d^2/dx^2 + gamma1 delta(x+a) + gamma2 delta(x-a),
          i.e. hbar = 1 and mass 1/2.
        - Any nonzero strengths are accepted here; the spectral searches check signs.
    """

    a: float
    gamma1: float
    gamma2: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"The half-separation a must be positive, got {self.a}.")
        if self.gamma1 == 0 or self.gamma2 == 0:
            raise DomainError(
                f"Well strengths must be nonzero, got gamma1={self.gamma1}, gamma2={self.gamma2}."
            )

    @property
    def centers(self) -> Tuple[float, float]:
        return -self.a, self.a

    @property
    def strengths(self) -> Tuple[float, float]:
        return self.gamma1, self.gamma2

    @property
    def ratio_alpha(self) -> float:
        """Strength ratio gamma2 / gamma1."""
        return self.gamma2 / self.gamma1

    @property
    def is_symmetric(self) -> bool:
        return self.gamma1 == self.gamma2

    @property
    def binding_margin(self) -> float:
        """2a + 1/gamma1 + 1/gamma2; positive exactly when a second bound state can exist."""
        return 2 * self.a + 1 / self.gamma1 + 1 / self.gamma2

    def to_dict(self) -> dict:
        return {"a": self.a, "gamma1": self.gamma1, "gamma2": self.gamma2}
