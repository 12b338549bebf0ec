import functools
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy import integrate

from src.core.faddeeva import SQRT_PI, erf_on_antidiagonal
from src.utils.errors import DomainError, MomentConsistencyError

log = logging.getLogger(__name__)

# Below this phase constant the oscillatory kernel is the Abel kernel
BETA_FLOOR = 1e-14
# Kernel phase variation (radians) above which an interval's moments are taken in closed form
SMOOTH_PHASE_VARIATION = 2.0
GAUSS_LEGENDRE_ORDER = 16
MOMENT_TOLERANCE = 1e-8
QUADRATURE_EPSABS = 1e-14
WEIGHT_CACHE_SIZE = 32


@dataclass(frozen=True, eq=False)
class ConvolutionWeights:
    """Product-integration weights of a convolution kernel K(u) on a uniform step dt.

    Note:
        - Interval m covers u in [m dt, (m+1) dt]. On it the data is linear between its end values,
          left[m] multiplies the value at u = (m+1) dt and right[m] the value at u = m dt.
        - For step n: sum_k table(n)[k] g_k = integral_0^{t_n} K(t_n - s) g(s) ds for piecewise-linear g.
    """

    left: npt.NDArray
    right: npt.NDArray
    dt: float

    @property
    def size(self) -> int:
        return len(self.left)

    @property
    def current(self) -> complex:
        """Weight of the newest value g_n, the same for every step."""
        return self.right[0]

    def _check_step(self, n: int) -> None:
        if not 1 <= n <= self.size:
            raise DomainError(f"Step {n} is outside the weight table (1..{self.size}).")

    def table(self, n: int) -> npt.NDArray:
        """Weights w_{n,k}, k = 0..n."""
        self._check_step(n)
        weights = np.zeros(n + 1, dtype=np.result_type(self.left, self.right))
        weights[n] = self.right[0]
        weights[0] += self.left[n - 1]
        if n > 1:
            # k = n - m for m = 1..n-1
            weights[n - 1 : 0 : -1] += self.left[: n - 1] + self.right[1:n]
        return weights

    def history(self, values: npt.NDArray, n: int):
        """sum_{k<n} w_{n,k} values[k]: the part of step n that only involves known values."""
        self._check_step(n)
        combined = self.left[: n - 1] + self.right[1:n]
        return np.dot(combined, values[n - 1 : 0 : -1]) + self.left[n - 1] * values[0]


def _freeze(array: npt.NDArray) -> npt.NDArray:
    array.setflags(write=False)
    return array


def _check_table_request(n: int, dt: float) -> None:
    if n < 1:
        raise DomainError(f"A weight table needs n >= 1, got {n}.")
    if not dt > 0:
        raise DomainError(f"A weight table needs dt > 0, got {dt}.")


def abel_weights(n: int, dt: float) -> ConvolutionWeights:
    """Product-integration weights of the Abel kernel u^(-1/2).

    Args:
        n (int): Number of intervals (steps) to tabulate.
        dt (float): Time step.

    Returns:
        (ConvolutionWeights): All weights are positive and the step-n table sums to 2 sqrt(n dt).
    """
    _check_table_request(n, dt)
    upper = np.sqrt(np.arange(1, n + 1, dtype=float))
    lower = np.sqrt(np.arange(0, n, dtype=float))
    # sqrt(m+1) - sqrt(m) without cancellation
    gap = 1 / (upper + lower)
    scale = math.sqrt(dt) * (2.0 / 3.0) * gap * gap
    left = scale * (upper + 2 * lower)
    right = scale * (2 * upper + lower)
    return ConvolutionWeights(left=_freeze(left), right=_freeze(right), dt=dt)


def _antiderivatives(beta: float, v: npt.NDArray) -> Tuple[npt.NDArray, npt.NDArray]:
    """Antiderivatives of exp(i beta v^2) v^-2 and exp(i beta v^2) v^-4, taken at v (inf allowed)."""
    finite = np.isfinite(v)
    v_safe = np.where(finite, v, 1.0)
    fresnel = (
        0.5 * SQRT_PI * np.exp(0.25j * np.pi) / math.sqrt(beta) * erf_on_antidiagonal(beta, v_safe)
    )
    fresnel = np.where(finite, fresnel, 0.5 * SQRT_PI * np.exp(0.25j * np.pi) / math.sqrt(beta))
    chirp = np.where(finite, np.exp(1j * beta * v_safe * v_safe), 0.0)
    second = np.where(finite, -chirp / v_safe, 0.0) + 2j * beta * fresnel
    fourth = np.where(finite, -chirp / (3 * v_safe**3), 0.0) + (2j * beta / 3) * second
    return second, fourth


def _closed_form_moments(
    lo: npt.NDArray, hi: npt.NDArray, beta: float
) -> Tuple[npt.NDArray, npt.NDArray]:
    """Moments of exp(i beta / u) u^(-1/2) over [lo, hi], through v = 1/sqrt(u)."""
    with np.errstate(divide="ignore"):
        v_near = np.where(lo > 0, 1 / np.sqrt(np.where(lo > 0, lo, 1.0)), np.inf)
    v_far = 1 / np.sqrt(hi)
    second_near, fourth_near = _antiderivatives(beta, v_near)
    second_far, fourth_far = _antiderivatives(beta, v_far)
    return 2 * (second_near - second_far), 2 * (fourth_near - fourth_far)


@functools.lru_cache(maxsize=1)
def _gauss_legendre_rule() -> Tuple[npt.NDArray, npt.NDArray]:
    return np.polynomial.legendre.leggauss(GAUSS_LEGENDRE_ORDER)


def _gauss_legendre_hat_weights(
    lo: npt.NDArray, h: float, beta: float
) -> Tuple[npt.NDArray, npt.NDArray]:
    nodes, weights = _gauss_legendre_rule()
    fraction = 0.5 * (nodes + 1)
    u = lo[:, None] + h * fraction[None, :]
    kernel = np.exp(1j * beta / u) / np.sqrt(u)
    scaled = 0.5 * h * weights[None, :] * kernel
    left = scaled @ fraction
    right = scaled @ (1 - fraction)
    return left, right


def _phase_variation(lo: npt.NDArray, hi: npt.NDArray, beta: float) -> npt.NDArray:
    with np.errstate(divide="ignore"):
        return np.where(lo > 0, beta * (hi - lo) / (np.where(lo > 0, lo, 1.0) * hi), np.inf)


def oscillatory_kernel_moments(lo: float, hi: float, beta: float) -> Tuple[complex, complex]:
    """Zeroth and first moments of K(u) = exp(i beta / u) u^(-1/2) over [lo, hi].

    Args:
        lo (float): Lower end, >= 0.
        hi (float): Upper end, > lo.
        beta (float): Phase constant, > 0.

    Returns:
        (tuple): (integral of K, integral of u K).
    """
    if not (0 <= lo < hi and beta > 0):
        raise DomainError("Oscillatory moments need 0 <= lo < hi and beta > 0.")
    lo_array, hi_array = np.array([lo], dtype=float), np.array([hi], dtype=float)
    if _phase_variation(lo_array, hi_array, beta)[0] > SMOOTH_PHASE_VARIATION:
        zeroth, first = _closed_form_moments(lo_array, hi_array, beta)
        return complex(zeroth[0]), complex(first[0])
    nodes, weights = _gauss_legendre_rule()
    u = lo + (hi - lo) * 0.5 * (nodes + 1)
    kernel = np.exp(1j * beta / u) / np.sqrt(u)
    scale = 0.5 * (hi - lo)
    return complex(scale * np.dot(weights, kernel)), complex(scale * np.dot(weights, u * kernel))


def quadrature_moments(lo: float, hi: float, beta: float) -> Tuple[complex, complex]:
    """Adaptive-quadrature moments of exp(i beta / u) u^(-1/2) over [lo, hi], via w = 1/u.

    Note:
        - With w = 1/u the moments are Fourier integrals of w^(-3/2) and w^(-5/2); scipy's QAWO
          (finite range) or QAWF (lo = 0) routines handle the oscillation.
    """
    w_start = 1 / hi
    w_stop = np.inf if lo == 0 else 1 / lo
    moments = []
    for power in (-1.5, -2.5):

        def _envelope(w: float, power: float = power) -> float:
            return w**power

        parts = [
            integrate.quad(
                _envelope, w_start, w_stop, weight=weight, wvar=beta, limit=500, epsabs=QUADRATURE_EPSABS
            )[0]
            for weight in ("cos", "sin")
        ]
        moments.append(complex(parts[0], parts[1]))
    return moments[0], moments[1]


def _oscillatory_weights(n: int, dt: float, beta: float, verify: bool) -> ConvolutionWeights:
    index = np.arange(n, dtype=float)
    lo = index * dt
    hi = (index + 1) * dt
    left = np.empty(n, dtype=complex)
    right = np.empty(n, dtype=complex)

    closed = _phase_variation(lo, hi, beta) > SMOOTH_PHASE_VARIATION
    if np.any(closed):
        zeroth, first = _closed_form_moments(lo[closed], hi[closed], beta)
        j = index[closed]
        left[closed] = first / dt - j * zeroth
        right[closed] = (j + 1) * zeroth - first / dt
    smooth = ~closed
    if np.any(smooth):
        left[smooth], right[smooth] = _gauss_legendre_hat_weights(lo[smooth], dt, beta)
    log.debug(
        f"Kernel weights beta={beta!r}: {int(np.count_nonzero(closed))} closed-form, "
        f"{int(np.count_nonzero(smooth))} Gauss-Legendre intervals"
    )

    if verify:
        for j in range(n):
            zeroth, first = quadrature_moments(lo[j], hi[j], beta)
            expected_left = first / dt - j * zeroth
            expected_right = (j + 1) * zeroth - first / dt
            mismatch = max(abs(left[j] - expected_left), abs(right[j] - expected_right))
            if mismatch > MOMENT_TOLERANCE * max(1.0, abs(zeroth)):
                raise MomentConsistencyError(
                    f"Kernel moments on [{lo[j]!r}, {hi[j]!r}] disagree with quadrature by {mismatch:.3e}"
                )
    return ConvolutionWeights(left=_freeze(left), right=_freeze(right), dt=dt)


@functools.lru_cache(maxsize=WEIGHT_CACHE_SIZE)
def kernel_convolution_weights(n: int, dt: float, beta: float) -> ConvolutionWeights:
    """Cached weights of exp(i beta / u) u^(-1/2); beta = 0 gives the Abel weights."""
    _check_table_request(n, dt)
    if beta < 0:
        raise DomainError(f"The kernel phase constant must be >= 0, got {beta}.")
    if beta < BETA_FLOOR:
        return abel_weights(n, dt)
    return _oscillatory_weights(n, dt, beta, verify=False)


def cross_kernel_moments(n: int, dt: float, a: float, verify: bool = False) -> ConvolutionWeights:
    """Weights of the cross kernel exp(i a^2 / u) u^(-1/2) coupling wells 2a apart.

    Args:
        n (int): Number of steps.
        dt (float): Time step.
        a (float): Half-separation, >= 0.
        verify (bool): Check every interval against adaptive quadrature.

    Returns:
        (ConvolutionWeights): The weights; a = 0 gives exactly the Abel weights.
    """
    if a < 0:
        raise DomainError(f"The half-separation must be >= 0, got {a}.")
    if verify and a * a >= BETA_FLOOR:
        _check_table_request(n, dt)
        return _oscillatory_weights(n, dt, a * a, verify=True)
    return kernel_convolution_weights(n, dt, a * a)


def point_kernel_weights(n: int, dt: float, beta: float) -> ConvolutionWeights:
    """Uncached kernel weights, for one-off phase constants such as reconstruction points."""
    _check_table_request(n, dt)
    if beta < BETA_FLOOR:
        return abel_weights(n, dt)
    return _oscillatory_weights(n, dt, beta, verify=False)
