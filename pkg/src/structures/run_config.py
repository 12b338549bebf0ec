import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from src.structures.nonlinearity import SolverParams
from src.structures.well_config import WellConfig
from src.utils.errors import ConfigError

MIX_NORM_TOLERANCE = 1e-12


class Scenario(enum.Enum):
    LINEAR_SYMMETRIC = "linear_symmetric"
    LINEAR_ASYMMETRIC = "linear_asymmetric"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class NonlinearSetup:
    """The strength gamma_pm(0) the nonlinear run starts from, and the power sigma."""

    initial_strength: Optional[float] = None
    sigma: float = 0.0

    def to_dict(self) -> dict:
        return {"initial_strength": self.initial_strength, "sigma": self.sigma}


@dataclass(frozen=True)
class SolverSettings:
    """Solver settings; dt and t_final may be given in units of the linear beating period."""

    dt: Optional[float] = None
    t_final: Optional[float] = None
    dt_per_period: Optional[float] = None
    periods: Optional[float] = None
    fixed_point_tol: float = SolverParams.DEFAULT_FIXED_POINT_TOL
    max_inner_iter: int = SolverParams.DEFAULT_MAX_INNER_ITER
    blowup_threshold: float = SolverParams.DEFAULT_BLOWUP_THRESHOLD

    @property
    def needs_period(self) -> bool:
        return self.dt is None or self.t_final is None

    def resolve(self, period: Optional[float]) -> SolverParams:
        """Turns the settings into absolute SolverParams.

        Args:
            period (float or None): The linear beating period T_B, needed for relative settings.

        Returns:
            (SolverParams): The absolute solver parameters.
        """
        if self.needs_period and (period is None or not math.isfinite(period)):
            raise ConfigError(
                "Solver settings are relative to the beating period, but this configuration has no "
                "finite beating period; give dt and t_final explicitly",
                field="solver",
            )
        dt = self.dt if self.dt is not None else period / self.dt_per_period
        t_final = self.t_final if self.t_final is not None else period * self.periods
        return SolverParams(
            dt=dt,
            t_final=t_final,
            fixed_point_tol=self.fixed_point_tol,
            max_inner_iter=self.max_inner_iter,
            blowup_threshold=self.blowup_threshold,
        )

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_final": self.t_final,
            "dt_per_period": self.dt_per_period,
            "periods": self.periods,
            "fixed_point_tol": self.fixed_point_tol,
            "max_inner_iter": self.max_inner_iter,
            "blowup_threshold": self.blowup_threshold,
        }


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "results"
    snapshots: bool = False
    snapshot_periods: Tuple[float, ...] = (0.0, 0.25, 0.5)
    figures: bool = False

    def to_dict(self) -> dict:
        return {
            "directory": self.directory,
            "snapshots": self.snapshots,
            "snapshot_periods": list(self.snapshot_periods),
            "figures": self.figures,
        }


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment needs: wells, initial mix, nonlinearity, solver and outputs."""

    scenario: Scenario
    well: WellConfig
    mix: Tuple[complex, complex]
    nonlinearity: NonlinearSetup = field(default_factory=NonlinearSetup)
    solver: SolverSettings = field(default_factory=SolverSettings)
    outputs: OutputOptions = field(default_factory=OutputOptions)
    suppression_threshold: float = 0.5
    name: Optional[str] = None

    def __post_init__(self) -> None:
        mix_norm = abs(self.mix[0]) ** 2 + abs(self.mix[1]) ** 2
        if abs(mix_norm - 1) > MIX_NORM_TOLERANCE:
            raise ConfigError(
                f"Mix coefficients must satisfy |alpha|^2 + |beta|^2 = 1, got {mix_norm!r}",
                field="mix",
            )
        if self.scenario is Scenario.LINEAR_SYMMETRIC and not self.well.is_symmetric:
            raise ConfigError(
                "The linear_symmetric scenario needs gamma1 == gamma2", field="well"
            )
        if self.scenario is not Scenario.NONLINEAR and self.nonlinearity.sigma != 0:
            raise ConfigError(
                f"Linear scenarios need sigma = 0, got {self.nonlinearity.sigma}",
                field="nonlinearity.sigma",
            )
        if self.scenario is Scenario.NONLINEAR and self.nonlinearity.initial_strength is None:
            raise ConfigError(
                "The nonlinear scenario needs nonlinearity.initial_strength",
                field="nonlinearity.initial_strength",
            )

    @property
    def mix_alpha(self) -> complex:
        return self.mix[0]

    @property
    def mix_beta(self) -> complex:
        return self.mix[1]

    def to_dict(self) -> dict:
        mix = {}
        for key, value in zip(("alpha", "beta"), self.mix):
            value = complex(value)
            mix[key] = value.real if value.imag == 0 else {"re": value.real, "im": value.imag}
        return {
            "name": self.name,
            "scenario": self.scenario.value,
            "well": self.well.to_dict(),
            "mix": mix,
            "nonlinearity": self.nonlinearity.to_dict(),
            "solver": self.solver.to_dict(),
            "outputs": self.outputs.to_dict(),
            "suppression_threshold": self.suppression_threshold,
        }
