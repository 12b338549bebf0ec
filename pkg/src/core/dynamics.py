import enum
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import integrate, ndimage

from src.core import spectral
from src.core.charges import MEMORY_PREFACTOR
from src.core.freeprop import free_evolve_at, resolving_grid
from src.core.product_integration import kernel_convolution_weights, point_kernel_weights
from src.structures.bound_state import EigenPair
from src.structures.charge_trajectory import ChargeTrajectory
from src.structures.grid_function import GridFunction, SuppressionReport
from src.structures.initial_state import InitialState
from src.structures.nonlinearity import Nonlinearity
from src.structures.well_config import WellConfig
from src.utils.errors import (
    DomainError,
    InsufficientGridError,
    InsufficientTrajectoryError,
    NoBeatingError,
    OffGridTimeError,
)

log = logging.getLogger(__name__)

NO_BEATING_EXCHANGE = 1e-8
# Grid half-width needed for occupations, in units of the half-separation
OCCUPATION_COVERAGE = 10.0
WINDOW_SAMPLES = 50
MASS_SPACING = 0.1
# Largest radiation wavenumber kept inside the conservation grid (group velocity 2k)
RADIATION_WAVENUMBER = 1.0


class WellSide(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


def default_grid(a: float, t: float, kappa_max: float) -> npt.NDArray:
    return resolving_grid(a, t, kappa_max)


def reconstruct(
    traj: ChargeTrajectory,
    nl: Nonlinearity,
    psi0: InitialState,
    t: float,
    grid: Optional[npt.NDArray] = None,
) -> GridFunction:
    """Rebuilds psi(t, x) from the charges with the Duhamel formula.

    Note:
        - The memory integral of well j is taken with the product-integration weights of the kernel
          exp(i (x - y_j)^2 / (4 u)) / sqrt(u), so at x = y_i it repeats the solver's own discretisation.

    Args:
        traj (ChargeTrajectory): The solved charges.
        nl (Nonlinearity): The couplings the charges were solved with.
        psi0 (InitialState): The initial datum.
        t (float): A time of the trajectory grid.
        grid (np.ndarray or None): Positions; the resolving grid of the trajectory when None.

    Returns:
        (GridFunction): psi(t, .) on the grid.
    """
    n = traj.index_of(t)
    if n is None:
        raise OffGridTimeError(f"t={t!r} is not a time of the trajectory grid; interpolation is refused.")
    a = traj.well.a
    if grid is None:
        grid = default_grid(a, traj.t_final, psi0.kappa_max)
    grid = np.asarray(grid, dtype=float)
    t_n = float(traj.times[n])
    if n == 0:
        return GridFunction(grid=grid, values=psi0.evaluate(grid), t=t_n, half_separation=a)

    values = np.asarray(free_evolve_at(psi0, t_n, grid), dtype=complex).copy()
    couplings = nl.strengths(traj.well)
    dt = traj.dt
    for center, coupling, charge in zip(traj.well.centers, couplings, (traj.q1, traj.q2)):
        if coupling == 0:
            continue
        source = np.abs(charge[: n + 1]) ** (2 * nl.sigma) * charge[: n + 1]
        for index, x in enumerate(grid):
            beta = (x - center) ** 2 / 4
            if beta == 0 or math.isclose(beta, a * a, rel_tol=1e-14):
                weights = kernel_convolution_weights(n, dt, 0.0 if beta == 0 else a * a)
            else:
                weights = point_kernel_weights(n, dt, beta)
            memory = weights.current * source[n] + weights.history(source, n)
            values[index] += MEMORY_PREFACTOR * coupling * memory
    log.debug(f"Reconstructed psi at t={t_n:.6g} on {len(grid)} points")
    return GridFunction(grid=grid, values=values, t=t_n, half_separation=a)


def beating_density_exact(
    cfg: WellConfig,
    mix_alpha: complex,
    mix_beta: complex,
    t: float,
    x: npt.ArrayLike,
    pair: Optional[EigenPair] = None,
):
    """Exact linear density |alpha phi_f e^(i lambda0 t) + beta phi_e e^(i lambda1 t)|^2."""
    if pair is None:
        pair = spectral.solve_eigenvalues(cfg)
    if not isinstance(pair, EigenPair):
        raise DomainError("The beating density needs a configuration with two eigenvalues.")
    ground, excited = spectral.bound_states(cfg, pair)
    phi_f = spectral.eval_state(ground, x)
    phi_e = spectral.eval_state(excited, x)
    interference = (mix_alpha * np.conj(mix_beta) * np.exp(1j * pair.delta_lambda * t)).real
    return (
        abs(mix_alpha) ** 2 * phi_f**2
        + abs(mix_beta) ** 2 * phi_e**2
        + 2 * phi_f * phi_e * interference
    )


def beating_period(pair: Union[EigenPair, object, None]) -> float:
    """T_B = 2 pi / delta_lambda."""
    if not isinstance(pair, EigenPair):
        raise NoBeatingError("A single bound state (or none) does not beat.")
    if not (pair.delta_lambda > 0 and math.isfinite(pair.delta_lambda)):
        raise NoBeatingError(f"Degenerate levels (delta_lambda={pair.delta_lambda!r}) do not beat.")
    return 2 * math.pi / pair.delta_lambda


def _split_at_origin(gf: GridFunction) -> Tuple[npt.NDArray, npt.NDArray, npt.NDArray, npt.NDArray]:
    x, density = gf.grid, gf.density
    split = int(np.searchsorted(x, 0.0))
    if split < len(x) and x[split] == 0.0:
        return x[: split + 1], density[: split + 1], x[split:], density[split:]
    origin_density = np.interp(0.0, x, density)
    left_x = np.append(x[:split], 0.0)
    left_density = np.append(density[:split], origin_density)
    right_x = np.insert(x[split:], 0, 0.0)
    right_density = np.insert(density[split:], 0, origin_density)
    return left_x, left_density, right_x, right_density


def well_occupation(gf: GridFunction, side: Union[WellSide, str]) -> float:
    """Probability on the half-line of one well, x < 0 (left) or x > 0 (right)."""
    side = WellSide(side)
    if gf.half_separation is None:
        raise InsufficientGridError("The grid function does not record the well half-separation.")
    needed = OCCUPATION_COVERAGE * gf.half_separation
    if gf.half_width < needed * (1 - 1e-12):
        raise InsufficientGridError(
            f"Occupations need the grid to cover [-{needed:.6g}, {needed:.6g}], "
            f"it covers +-{gf.half_width:.6g}."
        )
    left_x, left_density, right_x, right_density = _split_at_origin(gf)
    if side is WellSide.LEFT:
        return float(integrate.trapezoid(left_density, left_x))
    return float(integrate.trapezoid(right_density, right_x))


def mass(gf: GridFunction) -> float:
    return float(integrate.trapezoid(gf.density, gf.grid))


def conservation_grid(a: float, t: float, kappa_max: float) -> npt.NDArray:
    """A symmetric grid for mass bookkeeping up to time t.

    Note:
        - Half-width 10a + 2 RADIATION_WAVENUMBER t + 4 sqrt(t): radiation up to that wavenumber stays inside.
        - Spacing at most min(MASS_SPACING, 1/(20 kappa_max)) and chosen so that 0 and +-a are nodes.
    """
    if not (a > 0 and kappa_max > 0 and t >= 0):
        raise DomainError("A conservation grid needs a > 0, kappa_max > 0 and t >= 0.")
    target = min(MASS_SPACING, 1 / (20 * kappa_max))
    spacing = a / math.ceil(a / target)
    half_width = 10 * a + 2 * RADIATION_WAVENUMBER * t + 4 * math.sqrt(t)
    n_half = int(math.ceil(half_width / spacing))
    return np.arange(-n_half, n_half + 1) * spacing


def mass_drift(
    traj: ChargeTrajectory, nl: Nonlinearity, psi0: InitialState, times: Sequence[float]
) -> Tuple[List[float], float]:
    """Masses of the reconstructed psi at the given trajectory times and their largest relative drift.

    Returns:
        (tuple): (masses on the conservation grid, max |m - m_0| / m_0 with m_0 the first mass).
    """
    if not times:
        raise DomainError("Mass drift needs at least one time.")
    grid = conservation_grid(traj.well.a, max(times), psi0.kappa_max)
    masses = [mass(reconstruct(traj, nl, psi0, t, grid)) for t in times]
    log.debug(f"Masses on {len(grid)} points: {', '.join(f'{m:.8f}' for m in masses)}")
    if not masses[0] > 0:
        raise DomainError("The first reconstructed mass vanishes; the drift is undefined.")
    return masses, max(abs(m - masses[0]) for m in masses) / masses[0]


def population_imbalance(q1: npt.NDArray, q2: npt.NDArray) -> npt.NDArray:
    """z = (|q1|^2 - |q2|^2) / (|q1|^2 + |q2|^2), 0 where both charges vanish."""
    left, right = np.abs(q1) ** 2, np.abs(q2) ** 2
    total = left + right
    return np.where(total > 0, (left - right) / np.where(total > 0, total, 1.0), 0.0)


def _window_extrema(
    times: npt.NDArray, signal: npt.NDArray, window: float
) -> Tuple[npt.NDArray, npt.NDArray, npt.NDArray]:
    dt = float(times[1] - times[0])
    half = max(1, int(round(window / (2 * dt))))
    size = 2 * half + 1
    if size > len(signal):
        raise InsufficientTrajectoryError(
            f"The contrast window ({window:.6g}) is longer than the trajectory ({times[-1] - times[0]:.6g})."
        )
    upper = ndimage.maximum_filter1d(signal, size=size, mode="nearest")
    lower = ndimage.minimum_filter1d(signal, size=size, mode="nearest")
    hop = max(1, size // WINDOW_SAMPLES)
    centers = np.arange(half, len(signal) - half, hop)
    return times[centers], upper[centers], lower[centers]


def window_contrasts(
    times: npt.NDArray, signal: npt.NDArray, window: float
) -> Tuple[npt.NDArray, npt.NDArray]:
    """Contrast (max - min) / (max + min) of a signal over sliding windows of the given width.

    Returns:
        (tuple): (window centers, contrasts), sampled about WINDOW_SAMPLES times per window.
    """
    centers, upper, lower = _window_extrema(times, signal, window)
    total = upper + lower
    spread = upper - lower
    return centers, np.where(total > 0, spread / np.where(total > 0, total, 1.0), 0.0)


def window_exchanges(
    times: npt.NDArray, imbalance: npt.NDArray, window: float
) -> Tuple[npt.NDArray, npt.NDArray]:
    """How far a population imbalance reaches into both wells over sliding windows.

    Note:
        - The exchange of a window is min(max z, -min z) clipped at 0: a swing that stays on one side of
          z = 0 (the charge kept in one well) exchanges nothing however wide it is.

    Returns:
        (tuple): (window centers, exchanges in [0, 1]).
    """
    centers, upper, lower = _window_extrema(times, imbalance, window)
    return centers, np.clip(np.minimum(upper, -lower), 0.0, None)


def suppression_report(
    traj: ChargeTrajectory,
    pair: EigenPair,
    threshold: float = 0.5,
    reference: Optional[float] = None,
) -> SuppressionReport:
    """Measures window by window whether the charge is still exchanged between the wells.

    Args:
        traj (ChargeTrajectory): The charges.
        pair (EigenPair): The linear levels; their period sets the window width.
        threshold (float): Relative exchange below which the beating counts as suppressed.
        reference (float or None): Reference exchange, typically that of the exact linear charges;
            the first window's exchange when None.

    Returns:
        (SuppressionReport): Contrast and exchange series and the first suppressed window center.
    """
    window = beating_period(pair)
    if traj.t_final < 3 * window:
        log.warning(
            f"The trajectory spans {traj.t_final / window:.2f} beating periods; "
            "suppression times are unreliable below 3"
        )
    centers, contrasts = window_contrasts(traj.times, np.abs(traj.q1) ** 2, window)
    _, exchanges = window_exchanges(traj.times, population_imbalance(traj.q1, traj.q2), window)
    reference_exchange = float(exchanges[0]) if reference is None else float(reference)

    if reference_exchange < NO_BEATING_EXCHANGE:
        return SuppressionReport(
            window=window,
            window_centers=centers,
            contrasts=contrasts,
            exchanges=exchanges,
            reference_exchange=reference_exchange,
            threshold=threshold,
            suppression_time=None,
            no_beating=True,
        )
    suppressed = np.nonzero(exchanges / reference_exchange < threshold)[0]
    suppression_time = float(centers[suppressed[0]]) if len(suppressed) else None
    if suppression_time is not None:
        log.info(f"Beating suppressed at t={suppression_time:.6g} ({suppression_time / window:.2f} periods)")
    return SuppressionReport(
        window=window,
        window_centers=centers,
        contrasts=contrasts,
        exchanges=exchanges,
        reference_exchange=reference_exchange,
        threshold=threshold,
        suppression_time=suppression_time,
    )


def measured_period(times: npt.NDArray, signal: npt.NDArray) -> float:
    """Mean spacing of the upward mean-crossings of a periodic signal, with linear interpolation."""
    centred = signal - np.mean(signal)
    rising = np.nonzero((centred[:-1] < 0) & (centred[1:] >= 0))[0]
    if len(rising) < 2:
        raise NoBeatingError("The signal does not complete two oscillations.")
    fraction = -centred[rising] / (centred[rising + 1] - centred[rising])
    crossings = times[rising] + fraction * (times[rising + 1] - times[rising])
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))
