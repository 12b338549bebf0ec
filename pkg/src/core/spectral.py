import logging
import math
from typing import Callable, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.structures.bound_state import BoundState, EigenPair, StateLabel
from src.structures.well_config import ExistenceVerdict, WellConfig
from src.utils.errors import (
    DegeneratePairError,
    DomainError,
    NotAnEigenvalueError,
    RootFindingError,
)

log = logging.getLogger(__name__)

SCAN_POINTS = 128
BISECTION_RELATIVE_TOL = 1e-13
MAX_BISECTIONS = 400
NEWTON_POLISH_STEPS = 3
# Neighbouring doubles of lambda tried after the polish, in each direction
ULP_WALK_STEPS = 64
# Largest relative change of kappa accepted from the determinant polish
POLISH_RELATIVE_STEP = 1e-6
# Smallest detuning searched, relative to the single-well momentum
TINY_RELATIVE_OFFSET = 1e-300
EIGENVALUE_PRECONDITION_TOL = 1e-8


def green_function(kappa: float, x: npt.ArrayLike):
    """Free Green function exp(-kappa |x|) / (2 kappa).

    Args:
        kappa (float): sqrt(lambda), strictly positive.
        x (float or array-like): Position(s).

    Returns:
        (float or np.ndarray): The Green function value(s).
    """
    if not kappa > 0:
        raise DomainError(f"The Green function needs kappa > 0, got {kappa}.")
    value = np.exp(-kappa * np.abs(np.asarray(x, dtype=float))) / (2 * kappa)
    return float(value) if value.ndim == 0 else value


def _check_lambda(lam: float) -> float:
    if not lam > 0:
        raise DomainError(f"Spectral quantities need lambda > 0, got {lam}.")
    return math.sqrt(lam)


def gamma_matrix(cfg: WellConfig, lam: float) -> npt.NDArray:
    """The 2x2 matrix (1/gamma_i) delta_ij + G(y_i - y_j) whose singularity marks the eigenvalue -lam."""
    kappa = _check_lambda(lam)
    self_term = 1 / (2 * kappa)
    coupling = math.exp(-2 * kappa * cfg.a) / (2 * kappa)
    return np.array(
        [
            [1 / cfg.gamma1 + self_term, coupling],
            [coupling, 1 / cfg.gamma2 + self_term],
        ]
    )


def det_gamma(cfg: WellConfig, lam: float) -> float:
    """det of gamma_matrix, evaluated as _momentum_condition(kappa) / (4 kappa^2)."""
    kappa = _check_lambda(lam)
    return _momentum_condition(cfg, kappa) / (4 * kappa * kappa)


def residual_scale(cfg: WellConfig) -> float:
    return max(1.0, abs(1 / (cfg.gamma1 * cfg.gamma2)))


def existence_condition(cfg: WellConfig) -> ExistenceVerdict:
    """Counts the negative eigenvalues.

    Note:
        - Both strengths negative: two eigenvalues iff 1/|gamma1| + 1/|gamma2| < 2a, else one.
        - Exactly one negative strength: one eigenvalue iff 2a + 1/gamma1 + 1/gamma2 > 0, else none.
    """
    attractive = sum(1 for g in cfg.strengths if g < 0)
    if attractive == 0:
        return ExistenceVerdict.NONE
    if attractive == 2:
        if cfg.binding_margin > 0:
            return ExistenceVerdict.TWO_EIGENVALUES
        return ExistenceVerdict.ONE_EIGENVALUE
    if cfg.binding_margin > 0:
        return ExistenceVerdict.ONE_EIGENVALUE
    return ExistenceVerdict.NONE


def _bracketed_root(
    func: Callable[[float], float],
    derivative: Callable[[float], float],
    lower: float,
    upper: float,
    increasing: bool,
) -> float:
    """Finds the sign change of func on [lower, upper] by a log-spaced scan, bisection and Newton polish."""
    direction = 1.0 if increasing else -1.0

    def _signed(x: float) -> float:
        return direction * func(x)

    samples = np.geomspace(lower, upper, SCAN_POINTS)
    values = np.array([_signed(x) for x in samples])
    crossings = np.nonzero((values[:-1] < 0) & (values[1:] >= 0))[0]
    if len(crossings) == 0:
        raise RootFindingError(
            "No sign change of the eigenvalue condition on the scan", (lower, upper)
        )
    lo, hi = samples[crossings[0]], samples[crossings[0] + 1]

    for _ in range(MAX_BISECTIONS):
        if hi - lo <= BISECTION_RELATIVE_TOL * hi:
            break
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        if _signed(mid) < 0:
            lo = mid
        else:
            hi = mid
    else:
        raise RootFindingError("Bisection did not converge", (lo, hi))

    root = 0.5 * (lo + hi)
    for _ in range(NEWTON_POLISH_STEPS):
        slope = derivative(root)
        if slope == 0 or not math.isfinite(slope):
            break
        candidate = root - func(root) / slope
        if not lo <= candidate <= hi:
            break
        root = candidate
    return root


def _ground_offset(cfg: WellConfig) -> float:
    g_big = max(abs(cfg.gamma1), abs(cfg.gamma2))
    g_small = min(abs(cfg.gamma1), abs(cfg.gamma2))
    gap = g_big - g_small
    centre = g_big / 2
    a = cfg.a

    def _condition(eps: float) -> float:
        return math.log(2 * eps / g_big) + math.log((gap + 2 * eps) / g_small) + 4 * a * (centre + eps)

    def _slope(eps: float) -> float:
        return 1 / eps + 2 / (gap + 2 * eps) + 4 * a

    lower = centre * TINY_RELATIVE_OFFSET
    if _condition(lower) > 0:
        raise DegeneratePairError(
            "The ground-state detuning underflows double precision",
            midpoint=centre**2,
            delta_upper_bound=2 * centre * lower,
        )
    return _bracketed_root(_condition, _slope, lower, centre, increasing=True)


def _excited_offset(cfg: WellConfig) -> float:
    g_big = max(abs(cfg.gamma1), abs(cfg.gamma2))
    g_small = min(abs(cfg.gamma1), abs(cfg.gamma2))
    gap = g_big - g_small
    centre = g_small / 2
    a = cfg.a

    def _condition(eps: float) -> float:
        return math.log(2 * eps / g_small) + math.log((gap + 2 * eps) / g_big) + 4 * a * (centre - eps)

    def _slope(eps: float) -> float:
        return 1 / eps + 2 / (gap + 2 * eps) - 4 * a

    lower = centre * TINY_RELATIVE_OFFSET
    if _condition(lower) > 0:
        raise DegeneratePairError(
            "The excited-state detuning underflows double precision",
            midpoint=centre**2,
            delta_upper_bound=2 * centre * lower,
        )
    # The condition is concave in eps; its maximum separates the physical root from the trivial one
    peak_lo, peak_hi = lower, centre
    for _ in range(MAX_BISECTIONS):
        if peak_hi - peak_lo <= BISECTION_RELATIVE_TOL * peak_hi:
            break
        mid = math.sqrt(peak_lo * peak_hi) if peak_hi > 4 * peak_lo else 0.5 * (peak_lo + peak_hi)
        if _slope(mid) > 0:
            peak_lo = mid
        else:
            peak_hi = mid
    peak = peak_lo
    if _condition(peak) <= 0:
        raise RootFindingError(
            "The excited-state condition never becomes positive; the pair is at the binding threshold",
            (lower, peak),
        )
    return _bracketed_root(_condition, _slope, lower, peak, increasing=True)


def _momentum_condition(cfg: WellConfig, kappa: float) -> float:
    """(2 kappa / gamma1 + 1)(2 kappa / gamma2 + 1) - exp(-4 kappa a), expanded so that no O(1) terms cancel."""
    inverse_sum = 1 / cfg.gamma1 + 1 / cfg.gamma2
    return (
        2 * kappa * inverse_sum
        + 4 * kappa * kappa / (cfg.gamma1 * cfg.gamma2)
        - math.expm1(-4 * kappa * cfg.a)
    )


def _momentum_slope(cfg: WellConfig, kappa: float) -> float:
    return (
        2 * (1 / cfg.gamma1 + 1 / cfg.gamma2)
        + 8 * kappa / (cfg.gamma1 * cfg.gamma2)
        + 4 * cfg.a * math.exp(-4 * kappa * cfg.a)
    )


def _polish_on_determinant(cfg: WellConfig, kappa: float) -> float:
    """Refines a root momentum directly on the determinant and returns lambda = kappa^2.

    Note:
        - Newton steps in kappa are kept only while |condition| strictly decreases.
        - Of the doubles within ULP_WALK_STEPS of kappa^2, the one with the smallest |det_gamma| is returned.
    """
    best, best_value = kappa, abs(_momentum_condition(cfg, kappa))
    for _ in range(NEWTON_POLISH_STEPS + 2):
        slope = _momentum_slope(cfg, best)
        if slope == 0 or not math.isfinite(slope) or best_value == 0:
            break
        candidate = best - _momentum_condition(cfg, best) / slope
        if not abs(candidate - kappa) <= POLISH_RELATIVE_STEP * kappa:
            break
        value = abs(_momentum_condition(cfg, candidate))
        if not value < best_value:
            break
        best, best_value = candidate, value

    centre = best * best
    candidates = [centre]
    for direction in (math.inf, 0.0):
        lam = centre
        for _ in range(ULP_WALK_STEPS):
            lam = math.nextafter(lam, direction)
            if lam > 0:
                candidates.append(lam)
    residuals = [abs(det_gamma(cfg, lam)) for lam in candidates]
    return candidates[int(np.argmin(residuals))]


def _mixed_sign_root(cfg: WellConfig) -> float:
    """Momentum of the single bound state when only one well is attractive."""
    k_attractive = min(abs(g) for g in cfg.strengths if g < 0) / 2
    return _bracketed_root(
        lambda k: _momentum_condition(cfg, k),
        lambda k: _momentum_slope(cfg, k),
        k_attractive * 1e-12,
        k_attractive,
        increasing=False,
    )


def solve_eigenvalues(cfg: WellConfig) -> Union[EigenPair, BoundState, None]:
    """Finds the negative eigenvalues -lambda of the double well.

    Args:
        cfg (WellConfig): The wells.

    Returns:
        (EigenPair or BoundState or None): The pair when two eigenvalues exist, the single normalised
        bound state when only one exists, None otherwise.
    """
    verdict = existence_condition(cfg)
    if verdict is ExistenceVerdict.NONE:
        return None

    if cfg.gamma1 < 0 and cfg.gamma2 < 0:
        ground_offset = _ground_offset(cfg)
        kappa0 = max(abs(cfg.gamma1), abs(cfg.gamma2)) / 2 + ground_offset
        if verdict is ExistenceVerdict.ONE_EIGENVALUE:
            return bound_state(
                cfg, _polish_on_determinant(cfg, kappa0), StateLabel.FUNDAMENTAL, offset=ground_offset
            )

        excited_offset = _excited_offset(cfg)
        kappa1 = min(abs(cfg.gamma1), abs(cfg.gamma2)) / 2 - excited_offset
        gap = abs(abs(cfg.gamma1) - abs(cfg.gamma2))
        delta_kappa = gap / 2 + ground_offset + excited_offset
        delta_lambda = delta_kappa * (kappa0 + kappa1)
        lambda0, lambda1 = _polish_on_determinant(cfg, kappa0), _polish_on_determinant(cfg, kappa1)
        if not lambda0 > lambda1:
            lambda0, lambda1 = kappa0**2, kappa1**2
        if not lambda0 > lambda1:
            raise DegeneratePairError(
                "The two eigenvalues coincide in double precision",
                midpoint=0.5 * (lambda0 + lambda1),
                delta_upper_bound=max(delta_lambda, math.ulp(lambda0)),
            )
        log.debug(
            f"Eigenvalues lambda0={lambda0!r}, lambda1={lambda1!r}, delta={delta_lambda!r}"
        )
        return EigenPair(
            lambda0=lambda0,
            lambda1=lambda1,
            delta_lambda=delta_lambda,
            ground_offset=ground_offset,
            excited_offset=excited_offset,
        )

    kappa = _mixed_sign_root(cfg)
    return bound_state(cfg, _polish_on_determinant(cfg, kappa), StateLabel.FUNDAMENTAL)


def _detunings(
    cfg: WellConfig, kappa: float, label: StateLabel, offset: Optional[float]
) -> Tuple[float, float]:
    """p_i = 2 kappa / gamma_i + 1 for both wells, exact in the detuning when it is known."""
    if offset is None or not (cfg.gamma1 < 0 and cfg.gamma2 < 0):
        return 2 * kappa / cfg.gamma1 + 1, 2 * kappa / cfg.gamma2 + 1
    g_big = max(abs(cfg.gamma1), abs(cfg.gamma2))
    g_small = min(abs(cfg.gamma1), abs(cfg.gamma2))
    gap = g_big - g_small
    if label is StateLabel.FUNDAMENTAL:
        big, small = -2 * offset / g_big, -(gap + 2 * offset) / g_small
    else:
        big, small = (gap + 2 * offset) / g_big, 2 * offset / g_small
    if abs(cfg.gamma1) >= abs(cfg.gamma2):
        return big, small
    return small, big


def bound_state(
    cfg: WellConfig, lam: float, label: StateLabel, offset: Optional[float] = None
) -> BoundState:
    """Builds the normalised eigenfunction for the eigenvalue -lam.

    Args:
        cfg (WellConfig): The wells.
        lam (float): A root of det_gamma.
        label (StateLabel): FUNDAMENTAL or EXCITED.
        offset (float or None): The detuning found by solve_eigenvalues, when available.

    Returns:
        (BoundState): coeff_left > 0 for both states; the excited state has coeff_right < 0.
    """
    kappa = _check_lambda(lam)
    residual = abs(det_gamma(cfg, lam))
    if residual > EIGENVALUE_PRECONDITION_TOL * residual_scale(cfg):
        raise NotAnEigenvalueError(
            f"lambda={lam!r} is not an eigenvalue (|det Gamma| = {residual:.3e})."
        )
    p_left, p_right = _detunings(cfg, kappa, label, offset)
    if p_left * p_right <= 0:
        raise NotAnEigenvalueError(
            f"lambda={lam!r} does not give a consistent coefficient ratio (p = {p_left}, {p_right})."
        )
    # Gamma c = 0 gives (c_right / c_left)^2 = p_left / p_right and sign(c_right / c_left) = -sign(p_left)
    ratio = -math.copysign(math.sqrt(p_left / p_right), p_left)
    norm = state_norm((1.0, ratio), kappa, cfg.a)
    coeff_left, coeff_right = 1 / norm, ratio / norm

    if label is StateLabel.FUNDAMENTAL:
        # The ground state has no node: make it positive where it is largest
        site = cfg.centers[0] if cfg.gamma1 <= cfg.gamma2 else cfg.centers[1]
        value = coeff_left * green_function(kappa, site + cfg.a) + coeff_right * green_function(
            kappa, site - cfg.a
        )
        if value < 0:
            coeff_left, coeff_right = -coeff_left, -coeff_right
    return BoundState(
        lam=lam, coeff_left=coeff_left, coeff_right=coeff_right, label=label, a=cfg.a
    )


def bound_states(cfg: WellConfig, pair: EigenPair) -> Tuple[BoundState, BoundState]:
    ground = bound_state(cfg, pair.lambda0, StateLabel.FUNDAMENTAL, offset=pair.ground_offset)
    excited = bound_state(cfg, pair.lambda1, StateLabel.EXCITED, offset=pair.excited_offset)
    return ground, excited


def state_norm(coeffs: Tuple[float, float], kappa: float, a: float) -> float:
    """L2 norm of c G(x+a) + d G(x-a), from the exact self and overlap integrals.

    Note:
        - The integral of G^2 is 1/(4 kappa^3).
        - The integral of G(x+a) G(x-a) is (1 + 2 kappa a) exp(-2 kappa a) / (4 kappa^3).
    """
    if not kappa > 0:
        raise DomainError(f"state_norm needs kappa > 0, got {kappa}.")
    c, d = coeffs
    overlap = (1 + 2 * kappa * a) * math.exp(-2 * kappa * a)
    return math.sqrt((c * c + d * d + 2 * c * d * overlap) / (4 * kappa**3))


def eval_state(state: BoundState, x: npt.ArrayLike):
    kappa = state.kappa
    x = np.asarray(x, dtype=float)
    value = state.coeff_left * np.exp(-kappa * np.abs(x + state.a)) / (
        2 * kappa
    ) + state.coeff_right * np.exp(-kappa * np.abs(x - state.a)) / (2 * kappa)
    return float(value) if value.ndim == 0 else value


def coefficient_ratio(cfg: WellConfig, kappa: float, label: StateLabel) -> float:
    """|c_right / c_left| = sqrt(p_1 / p_2) with p_i = 2 kappa / gamma_i + 1."""
    p_left, p_right = _detunings(cfg, kappa, label, None)
    return math.sqrt(p_left / p_right)


def closed_form_left_coefficient(cfg: WellConfig, lambda0: float) -> float:
    """Closed-form normalised left coefficient of the ground state."""
    kappa = _check_lambda(lambda0)
    g1, g2, a = cfg.gamma1, cfg.gamma2, cfg.a
    denominator = g1 * g2 * (g1 + 2 * kappa) / (g2 + 2 * kappa) - g1 * (
        g1 + 4 * kappa + 4 * kappa * a * (g1 + 2 * kappa)
    )
    return 2 * abs(g1) * lambda0**0.75 / math.sqrt(denominator)


def closed_form_right_coefficient(cfg: WellConfig, lambda1: float) -> float:
    """Closed-form magnitude of the right coefficient of the excited state."""
    kappa = _check_lambda(lambda1)
    g1, g2, a = cfg.gamma1, cfg.gamma2, cfg.a
    denominator = g1 * g2 * (g2 + 2 * kappa) / (g1 + 2 * kappa) - g2 * (
        g2 + 4 * kappa + 4 * kappa * a * (g2 + 2 * kappa)
    )
    return 2 * abs(g2) * lambda1**0.75 / math.sqrt(denominator)


def splitting_asymptote(gamma: float, a: float) -> float:
    """Semiclassical level splitting gamma^2 exp(-|gamma| a) of two equal wells."""
    return gamma * gamma * math.exp(-abs(gamma) * a)


def asymmetric_splitting_bound(cfg: WellConfig) -> float:
    """Strict lower bound gamma_s^2 (1 - alpha^2) / 4 on the splitting, gamma_s the stronger well."""
    strong = max(abs(cfg.gamma1), abs(cfg.gamma2))
    weak = min(abs(cfg.gamma1), abs(cfg.gamma2))
    alpha = weak / strong
    return strong * strong * (1 - alpha * alpha) / 4


def strong_coupling_ratios(cfg: WellConfig, pair: EigenPair) -> Tuple[float, float]:
    """(2 sqrt(lambda0) / gamma_strong, 2 sqrt(lambda1) / gamma_weak); both tend to -1 at strong coupling."""
    strong = min(cfg.gamma1, cfg.gamma2)
    weak = max(cfg.gamma1, cfg.gamma2)
    return 2 * math.sqrt(pair.lambda0) / strong, 2 * math.sqrt(pair.lambda1) / weak
