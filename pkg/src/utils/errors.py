from typing import Optional, Tuple


class BeatingLabError(Exception):
    """Base class of every error raised by the laboratory."""


class ConfigError(BeatingLabError):
    """A configuration file or override could not be turned into a RunConfig."""

    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        self.message = message
        self.field = field
        self.line = line
        location = ""
        if field is not None:
            location += f" [field '{field}'"
            location += f", line {line}]" if line is not None else "]"
        super().__init__(f"{message}{location}")


class DomainError(BeatingLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class NotAnEigenvalueError(DomainError):
    pass


class OffGridTimeError(DomainError):
    pass


class InsufficientGridError(DomainError):
    pass


class InsufficientTrajectoryError(DomainError):
    pass


class NoBeatingError(DomainError):
    """The two levels are degenerate (or not resolved), so the beating period is infinite."""

    def __init__(self, message: str) -> None:
        self.period = float("inf")
        super().__init__(message)


class RootFindingError(BeatingLabError):
    def __init__(self, message: str, bracket: Tuple[float, float]) -> None:
        self.bracket = bracket
        super().__init__(f"{message} (best bracket {bracket[0]!r}..{bracket[1]!r})")


class DegeneratePairError(RootFindingError):
    """The two eigenvalues are closer than double precision can tell apart."""

    def __init__(
        self, message: str, midpoint: float, delta_upper_bound: float
    ) -> None:
        self.midpoint = midpoint
        self.delta_upper_bound = delta_upper_bound
        super().__init__(message, (midpoint, midpoint))


class FaddeevaOverflowError(BeatingLabError, OverflowError):
    pass


class MomentConsistencyError(BeatingLabError):
    pass


class SolverConvergenceError(BeatingLabError):
    """The per-step nonlinear solve did not reach the requested tolerance."""

    def __init__(self, message: str, time: float, residual: float, trajectory=None) -> None:
        self.time = time
        self.residual = residual
        self.trajectory = trajectory
        super().__init__(f"{message} (t={time:.6g}, residual={residual:.3e})")
