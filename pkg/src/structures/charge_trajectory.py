from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from src.structures.well_config import WellConfig


@dataclass(frozen=True, eq=False)
class ChargeTrajectory:
    """The charges q1(t) = psi(t, -a) and q2(t) = psi(t, a) on a uniform time grid.

    Note:
        - inner_iters[n] and residuals[n] describe the solve that accepted step n (zero at n=0).
        - blow_up_time is set when the march stopped because a charge exceeded the blow-up threshold;
          the arrays then hold the partial trajectory up to and including that step.
    """

    times: npt.NDArray
    q1: npt.NDArray
    q2: npt.NDArray
    inner_iters: npt.NDArray
    residuals: npt.NDArray
    well: WellConfig
    blow_up_time: Optional[float] = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def blew_up(self) -> bool:
        return self.blow_up_time is not None

    def index_of(self, t: float, tolerance: float = 1e-9) -> Optional[int]:
        """Index of the grid point at time t, or None if t is not a grid time."""
        if len(self.times) < 2:
            return 0 if abs(t - self.times[0]) <= tolerance else None
        position = (t - self.times[0]) / self.dt
        index = int(np.floor(position + 0.5))
        if index < 0 or index >= len(self.times) or abs(position - index) > tolerance:
            return None
        return index
