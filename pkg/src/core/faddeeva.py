import functools
import logging
import math
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import special

from src.structures.complex_amplitude import ComplexAmplitude
from src.utils.errors import FaddeevaOverflowError

log = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
# Largest x with exp(x) finite in double precision
EXP_LIMIT = 709.0
WOFZ_RELATIVE_ACCURACY = 1e-13
MACHINE_EPSILON = float(np.finfo(float).eps)

ComplexLike = Union[complex, npt.ArrayLike]


def _as_scalar_if_needed(result: npt.NDArray, z_input: ComplexLike):
    return complex(result) if np.ndim(z_input) == 0 else result


def faddeeva(z: ComplexLike):
    """Evaluates w(z) = exp(-z^2) erfc(-i z).

    Note:
        - The upper half-plane is evaluated with scipy's wofz.
        - The lower half-plane uses w(z) = 2 exp(-z^2) - w(-z); arguments where exp(-z^2) overflows raise.

    Args:
        z (complex or array-like): Argument(s).

    Returns:
        (complex or np.ndarray): w(z), with the shape of z.
    """
    z_array = np.asarray(z, dtype=complex)
    result = np.empty(z_array.shape, dtype=complex)
    upper = z_array.imag >= 0
    result[upper] = special.wofz(z_array[upper])
    lower = ~upper
    if np.any(lower):
        z_lower = z_array[lower]
        exponent = -(z_lower * z_lower)
        if np.any(exponent.real > EXP_LIMIT):
            worst = z_lower[np.argmax(exponent.real)]
            raise FaddeevaOverflowError(
                f"w(z) overflows in the lower half-plane at z={worst!r} "
                f"(Re(-z^2)={(-worst * worst).real:.1f} > {EXP_LIMIT})"
            )
        result[lower] = 2 * np.exp(exponent) - special.wofz(-z_lower)
    return _as_scalar_if_needed(result, z)


def faddeeva_amplitude(z: complex, cross_check: bool = False) -> ComplexAmplitude:
    """Evaluates w(z) together with an absolute-error estimate.

    Args:
        z (complex): Argument.
        cross_check (bool): Also evaluate the independent rational approximation and widen the
            estimate to the observed disagreement.

    Returns:
        (ComplexAmplitude): The value and its error estimate.
    """
    z = complex(z)
    value = faddeeva(z)
    if z.imag >= 0:
        error = WOFZ_RELATIVE_ACCURACY * max(abs(value), MACHINE_EPSILON)
    else:
        reflected = abs(2 * np.exp(-z * z)) + abs(faddeeva(-z))
        error = WOFZ_RELATIVE_ACCURACY * reflected
    if cross_check and z.imag >= 0:
        error = max(error, abs(value - faddeeva_weideman(z)))
    return ComplexAmplitude(value=value, error_estimate=float(error))


def erf_on_antidiagonal(beta: npt.ArrayLike, v: npt.ArrayLike) -> npt.NDArray:
    """erf(exp(-i pi/4) sqrt(beta) v) for beta > 0, v >= 0, evaluated without cancellation or overflow.

    With u = exp(-i pi/4) sqrt(beta) v one has exp(-u^2) = exp(i beta v^2) and i u in the upper half-plane,
    so erf(u) = 1 - exp(i beta v^2) w(exp(i pi/4) sqrt(beta) v).
    """
    beta = np.asarray(beta, dtype=float)
    v = np.asarray(v, dtype=float)
    rotation = np.exp(0.25j * np.pi)
    argument = rotation * np.sqrt(beta) * v
    return 1 - np.exp(1j * beta * v * v) * faddeeva(argument)


@functools.lru_cache(maxsize=8)
def _weideman_coefficients(n_terms: int) -> Tuple[float, npt.NDArray]:
    n_samples = 2 * n_terms
    scale = math.sqrt(n_terms / math.sqrt(2))
    indices = np.arange(-n_samples + 1.0, n_samples)
    theta = (math.pi / n_samples) * indices
    t = scale * np.tan(0.5 * theta)
    samples = np.empty(indices.size + 1)
    samples[0] = 0.0
    samples[1:] = np.exp(-t * t) * (scale * scale + t * t)
    coefficients = np.fft.fft(np.fft.fftshift(samples)).real / (2 * n_samples)
    return scale, np.flipud(coefficients[1 : n_terms + 1])


def faddeeva_weideman(z: ComplexLike, n_terms: int = 36):
    """Rational (Weideman) approximation of w(z), close to double precision for n_terms=36."""
    z_array = np.atleast_1d(np.asarray(z, dtype=complex))
    scale, coefficients = _weideman_coefficients(n_terms)
    lower = z_array.imag < 0
    signs = np.where(lower, -1.0, 1.0)
    denominator = scale - 1j * signs * z_array
    polynomial = np.polyval(coefficients, (scale + 1j * signs * z_array) / denominator)
    result = signs * (2 * polynomial / denominator**2 + (1 / SQRT_PI) / denominator)
    result[lower] += 2 * np.exp(-z_array[lower] ** 2)
    return _as_scalar_if_needed(result.reshape(np.shape(z)), z)


def faddeeva_series(z: complex, max_terms: int = 400) -> complex:
    """Taylor series w(z) = sum_n (i z)^n / Gamma(n/2 + 1); only accurate for moderate |z|."""
    z = complex(z)
    iz = 1j * z
    even_term = 1.0 + 0j
    odd_term = iz / math.gamma(1.5)
    total = even_term + odd_term
    for n in range(2, max_terms, 2):
        k = n // 2
        even_term *= iz * iz / k
        odd_term *= iz * iz / (k + 0.5)
        total += even_term + odd_term
        if abs(even_term) + abs(odd_term) < 1e-18 * abs(total):
            break
    return total


def faddeeva_continued_fraction(z: complex, depth: int = 200) -> complex:
    """Laplace continued fraction of w(z) for Im z > 0; converges fast for large |z|."""
    z = complex(z)
    tail = z
    for k in range(depth, 0, -1):
        tail = z - (k / 2) / tail
    return 1j / (SQRT_PI * tail)
