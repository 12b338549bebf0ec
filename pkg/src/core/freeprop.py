import logging
import math
from typing import Callable

import numpy as np
import numpy.typing as npt
from scipy import integrate

from src.core.faddeeva import faddeeva, faddeeva_amplitude
from src.structures.complex_amplitude import ComplexAmplitude
from src.structures.initial_state import InitialState
from src.utils.errors import DomainError

log = logging.getLogger(__name__)

ROTATION = np.exp(0.25j * np.pi)


def propagator_kernel(tau: npt.ArrayLike, y: npt.ArrayLike):
    """Integral kernel U(tau, y) = exp(i y^2 / (4 tau)) / sqrt(4 pi i tau) of the free evolution.

    Note:
        - sqrt(i) is taken on the principal branch, exp(i pi / 4), so the phase is y^2/(4 tau) - pi/4.

    Args:
        tau (float or array-like): Elapsed time, strictly positive.
        y (float or array-like): Displacement.

    Returns:
        (complex or np.ndarray): The kernel value(s).
    """
    tau_array = np.asarray(tau, dtype=float)
    if np.any(tau_array <= 0):
        raise DomainError("The free propagator is only defined for tau > 0.")
    y_array = np.asarray(y, dtype=float)
    phase = y_array**2 / (4 * tau_array) - 0.25 * np.pi
    value = np.exp(1j * phase) / np.sqrt(4 * np.pi * tau_array)
    return complex(value) if value.ndim == 0 else value


def _half_line_argument(sign: float, z: npt.ArrayLike, kappa: float, t: npt.ArrayLike):
    return ROTATION * (sign * z + 2j * kappa * t) / (2 * np.sqrt(t))


def _half_line_term(sign: float, z: npt.NDArray, kappa: float, t: npt.NDArray) -> npt.NDArray:
    """Contribution of one half-line of exp(-kappa |y|) to 2 (U(t) exp(-kappa |.|))(z)."""
    argument = _half_line_argument(sign, z, kappa, t)
    upper = argument.imag >= 0
    chirp = np.exp(1j * z * z / (4 * t))
    w = faddeeva(np.where(upper, argument, -argument))
    # Below the real axis w(arg) = 2 exp(-arg^2) - w(-arg), and chirp * exp(-arg^2) is bounded
    exponent = np.where(upper, 0.0, 1j * kappa * kappa * t + sign * kappa * z)
    return np.where(upper, chirp * w, 2 * np.exp(exponent) - chirp * w)


def free_evolve_exponential(
    kappa: float, center: float, weight: complex, t: npt.ArrayLike, x: npt.ArrayLike
):
    """Closed-form free evolution of weight * exp(-kappa |x - center|).

    Args:
        kappa (float): Decay rate, strictly positive.
        center (float): Center of the exponential.
        weight (complex): Amplitude.
        t (float or array-like): Time(s), strictly positive; broadcast against x.
        x (float or array-like): Position(s).

    Returns:
        (complex or np.ndarray): (U(t) psi)(x).
    """
    if not kappa > 0:
        raise DomainError(f"Exponential atoms need kappa > 0, got {kappa}.")
    t_array = np.asarray(t, dtype=float)
    if np.any(t_array <= 0):
        raise DomainError("Free evolution is evaluated for t > 0 only.")
    z = np.asarray(x, dtype=float) - center
    z, t_array = np.broadcast_arrays(z, t_array)
    value = 0.5 * weight * (
        _half_line_term(-1.0, z, kappa, t_array) + _half_line_term(1.0, z, kappa, t_array)
    )
    return complex(value) if value.ndim == 0 else value


def free_evolve_at(psi0: InitialState, t: npt.ArrayLike, x: npt.ArrayLike):
    """Free evolution (U(t) psi0)(x) of an initial state made of exponential atoms."""
    total = 0
    for term in psi0.terms:
        total = total + free_evolve_exponential(term.kappa, term.center, term.weight, t, x)
    return total


def free_evolve_amplitude(psi0: InitialState, t: float, x: float) -> ComplexAmplitude:
    """(U(t) psi0)(x) at one point, with the absolute error inherited from its Faddeeva evaluations.

    Note:
        - Every half-line term is chirp * w or a bounded exponential minus chirp * w, with |chirp| = 1,
          so its error is that of w at the upper half-plane argument actually evaluated.
    """
    if not t > 0:
        raise DomainError("Free evolution is evaluated for t > 0 only.")
    error = 0.0
    for term in psi0.terms:
        for sign in (-1.0, 1.0):
            argument = complex(_half_line_argument(sign, x - term.center, term.kappa, t))
            if argument.imag < 0:
                argument = -argument
            error += 0.5 * abs(term.weight) * faddeeva_amplitude(argument).error_estimate
    return ComplexAmplitude(value=complex(free_evolve_at(psi0, t, x)), error_estimate=error)


def free_evolve_profile(
    profile: Callable[[float], complex],
    t: float,
    x: float,
    half_width: float,
    limit: int = 2000,
) -> complex:
    """Free evolution of an arbitrary profile supported (numerically) in [-half_width, half_width].

    Note:
        - This is adaptive quadrature of the oscillatory defining integral; it is only practical when the
          chirp (x - y)^2 / (4 t) stays moderate over the support.
    """
    if t <= 0:
        raise DomainError("Free evolution is evaluated for t > 0 only.")

    def _integrand(y: float) -> complex:
        return propagator_kernel(t, x - y) * complex(profile(y))

    breakpoints = [p for p in (x, 0.0) if -half_width < p < half_width]
    real_part, _ = integrate.quad(
        lambda y: _integrand(y).real, -half_width, half_width, points=breakpoints or None, limit=limit
    )
    imag_part, _ = integrate.quad(
        lambda y: _integrand(y).imag, -half_width, half_width, points=breakpoints or None, limit=limit
    )
    return complex(real_part, imag_part)


def resolving_grid(a: float, t: float, kappa_max: float) -> npt.NDArray:
    """A symmetric grid resolving both the exponential decay and the x^2/(4t) chirp of U(t) psi0.

    Note:
        - Half-width L = 10a + 4 sqrt(t) max(1, kappa_max).
        - Spacing <= min(1/(4 kappa_max), pi sqrt(t) / (2L)); the point count is odd so x=0 is on the grid.
    """
    if not (a > 0 and kappa_max > 0 and t >= 0):
        raise DomainError("A resolving grid needs a > 0, kappa_max > 0 and t >= 0.")
    half_width = 10 * a + 4 * math.sqrt(t) * max(1.0, kappa_max)
    spacing = 1 / (4 * kappa_max)
    if t > 0:
        spacing = min(spacing, math.pi * math.sqrt(t) / (2 * half_width))
    n_half = int(math.ceil(half_width / spacing))
    return np.arange(-n_half, n_half + 1) * (half_width / n_half)
