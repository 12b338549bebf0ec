from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from src.utils.errors import DomainError


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex function psi(t, .) sampled on a uniform, sorted spatial grid."""

    grid: npt.NDArray
    values: npt.NDArray
    t: float
    half_separation: Optional[float] = None

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise DomainError("A grid function needs a one-dimensional grid of at least two points.")
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise DomainError("The grid of a grid function must be sorted and uniform.")
        if np.shape(self.values) != grid.shape:
            raise DomainError("Grid and values must have the same shape.")

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def half_width(self) -> float:
        return float(min(-self.grid[0], self.grid[-1]))

    @property
    def density(self) -> npt.NDArray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True, eq=False)
class SuppressionReport:
    """Beating measures per window of one linear beating period.

    Note:
        - contrasts hold the contrast (max - min) / (max + min) of |q1|^2, each in [0, 1].
        - exchanges hold how far the population imbalance reaches into both wells, min(max z, -min z)
          clipped at 0, with z = (|q1|^2 - |q2|^2) / (|q1|^2 + |q2|^2).
        - Suppression is judged on exchanges / reference_exchange < threshold.
    """

    window: float
    window_centers: npt.NDArray
    contrasts: npt.NDArray
    exchanges: npt.NDArray
    reference_exchange: float
    threshold: float
    suppression_time: Optional[float]
    no_beating: bool = False

    @property
    def relative_exchanges(self) -> npt.NDArray:
        if self.reference_exchange <= 0:
            return np.zeros_like(self.exchanges)
        return self.exchanges / self.reference_exchange

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "threshold": self.threshold,
            "reference_exchange": self.reference_exchange,
            "no_beating": self.no_beating,
            "suppression_time": self.suppression_time,
            "window_centers": [float(t) for t in self.window_centers],
            "contrasts": [float(c) for c in self.contrasts],
            "exchanges": [float(e) for e in self.exchanges],
        }
