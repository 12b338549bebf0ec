from dataclasses import dataclass

from src.utils.errors import DomainError


@dataclass(frozen=True)
class ComplexAmplitude:
    """A complex value with an absolute-error estimate."""

    value: complex
    error_estimate: float

    def __post_init__(self) -> None:
        if not self.error_estimate >= 0:
            raise DomainError(f"Error estimates are nonnegative, got {self.error_estimate}.")

    def __complex__(self) -> complex:
        return complex(self.value)
