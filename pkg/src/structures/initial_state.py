import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import numpy.typing as npt

from src.structures.bound_state import BoundState, StateLabel
from src.utils.errors import DomainError

MIX_NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ExponentialTerm:
    """One atom weight * exp(-kappa |x - center|) of an initial state."""

    weight: complex
    kappa: float
    center: float

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise DomainError(f"Exponential atoms need kappa > 0, got {self.kappa}.")

    def to_dict(self) -> dict:
        weight = complex(self.weight)
        return {
            "weight_re": weight.real,
            "weight_im": weight.imag,
            "kappa": self.kappa,
            "center": self.center,
        }


def exponential_overlap(kappa1: float, center1: float, kappa2: float, center2: float) -> float:
    """Exact value of the integral of exp(-kappa1 |x - c1|) exp(-kappa2 |x - c2|) over the real line."""
    if center1 > center2:
        kappa1, center1, kappa2, center2 = kappa2, center2, kappa1, center1
    d = center2 - center1
    outer = (math.exp(-kappa2 * d) + math.exp(-kappa1 * d)) / (kappa1 + kappa2)
    dk = kappa2 - kappa1
    if abs(dk * d) < 1e-12:
        inner = d * math.exp(-kappa1 * d)
    else:
        inner = math.exp(-kappa1 * d) * (-math.expm1(-dk * d)) / dk
    return outer + inner


@dataclass(frozen=True)
class InitialState:
    """An initial datum psi0(x) = sum_j w_j exp(-kappa_j |x - c_j|)."""

    terms: Tuple[ExponentialTerm, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.terms) == 0:
            raise DomainError("An initial state needs at least one exponential term.")
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def from_bound_state(cls, state: BoundState, weight: complex = 1.0) -> "InitialState":
        return cls(terms=cls._terms_of(state, weight))

    @classmethod
    def from_bound_states(
        cls,
        ground: BoundState,
        excited: BoundState,
        mix_alpha: complex,
        mix_beta: complex,
    ) -> "InitialState":
        """Builds the superposition mix_alpha * phi_f + mix_beta * phi_e.

        Args:
            ground (BoundState): The fundamental state.
            excited (BoundState): The excited state.
            mix_alpha (complex): Weight of the fundamental state.
            mix_beta (complex): Weight of the excited state.

        Returns:
            (InitialState): The superposition written in exponential atoms.
        """
        if ground.label is not StateLabel.FUNDAMENTAL or excited.label is not StateLabel.EXCITED:
            raise DomainError("Expected a fundamental and an excited bound state, in that order.")
        mix_norm = abs(mix_alpha) ** 2 + abs(mix_beta) ** 2
        if abs(mix_norm - 1) > MIX_NORM_TOLERANCE:
            raise DomainError(
                f"Mix coefficients must satisfy |alpha|^2 + |beta|^2 = 1, got {mix_norm!r}."
            )
        terms = cls._terms_of(ground, mix_alpha) + cls._terms_of(excited, mix_beta)
        return cls(terms=terms)

    @staticmethod
    def _terms_of(state: BoundState, weight: complex) -> Tuple[ExponentialTerm, ...]:
        kappa = state.kappa
        scale = complex(weight) / (2 * kappa)
        return (
            ExponentialTerm(weight=scale * state.coeff_left, kappa=kappa, center=-state.a),
            ExponentialTerm(weight=scale * state.coeff_right, kappa=kappa, center=state.a),
        )

    def evaluate(self, x: npt.ArrayLike) -> npt.NDArray:
        x = np.asarray(x, dtype=float)
        result = np.zeros(x.shape, dtype=complex)
        for term in self.terms:
            result += term.weight * np.exp(-term.kappa * np.abs(x - term.center))
        return result

    def norm(self) -> float:
        """Closed-form L2 norm."""
        total = 0.0
        for first in self.terms:
            for second in self.terms:
                overlap = exponential_overlap(
                    first.kappa, first.center, second.kappa, second.center
                )
                total += (complex(first.weight) * complex(second.weight).conjugate() * overlap).real
        return math.sqrt(max(total, 0.0))

    def scaled(self, factor: complex) -> "InitialState":
        return InitialState(
            terms=tuple(
                ExponentialTerm(weight=factor * t.weight, kappa=t.kappa, center=t.center)
                for t in self.terms
            )
        )

    @property
    def kappa_max(self) -> float:
        return max(term.kappa for term in self.terms)

    def to_dict(self) -> dict:
        return {"terms": [term.to_dict() for term in self.terms]}
