import logging
import math
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.core import spectral
from src.core.freeprop import free_evolve_at
from src.core.product_integration import (
    ConvolutionWeights,
    abel_weights,
    cross_kernel_moments,
)
from src.structures.bound_state import EigenPair
from src.structures.charge_trajectory import ChargeTrajectory
from src.structures.initial_state import InitialState
from src.structures.nonlinearity import Nonlinearity, SolverParams
from src.structures.run_config import NonlinearSetup
from src.structures.well_config import WellConfig
from src.utils.errors import DomainError, SolverConvergenceError

log = logging.getLogger(__name__)

# -i / sqrt(4 pi i): the memory-term prefactor of the Duhamel formula
MEMORY_PREFACTOR = np.exp(-0.75j * np.pi) / (2 * math.sqrt(math.pi))


def _nonlinear_term(q: npt.NDArray, sigma: float) -> npt.NDArray:
    if sigma == 0:
        return q
    return np.abs(q) ** (2 * sigma) * q


class ChargeSolver:
    """Marches the charge equations q_i = (U(t) psi0)(y_i) + memory terms forward in time.

    Each step solves the 2-vector equation q = R + C N(q), where R collects the free term and the
    memory of all earlier steps and C the product-integration weight of the newest interval.
    """

    DAMPING = 0.5
    STALL_LIMIT = 20
    STALL_RATIO = 0.9
    PROGRESS_EVERY = 1000

    def __init__(
        self,
        cfg: WellConfig,
        nl: Nonlinearity,
        psi0: InitialState,
        params: SolverParams,
    ) -> None:
        self.cfg = cfg
        self.nl = nl
        self.psi0 = psi0
        self.params = params
        self.couplings = np.array(nl.strengths(cfg), dtype=float)

        n_steps = params.n_steps
        self.times = np.arange(n_steps + 1) * params.dt
        self.self_weights: ConvolutionWeights = abel_weights(n_steps, params.dt)
        self.cross_weights: ConvolutionWeights = cross_kernel_moments(n_steps, params.dt, cfg.a)

        s0, c0 = self.self_weights.current, self.cross_weights.current
        g1, g2 = self.couplings
        self.step_matrix = MEMORY_PREFACTOR * np.array([[g1 * s0, g2 * c0], [g1 * c0, g2 * s0]])

    def _free_terms(self) -> Tuple[npt.NDArray, npt.NDArray]:
        left, right = self.cfg.centers
        later = self.times[1:]
        free_left = np.empty(len(self.times), dtype=complex)
        free_right = np.empty(len(self.times), dtype=complex)
        free_left[0], free_right[0] = self.psi0.evaluate([left, right])
        free_left[1:] = free_evolve_at(self.psi0, later, left)
        free_right[1:] = free_evolve_at(self.psi0, later, right)
        return free_left, free_right

    def _residual(self, q: npt.NDArray, rhs: npt.NDArray) -> float:
        defect = q - rhs - self.step_matrix @ _nonlinear_term(q, self.nl.sigma)
        return float(np.max(np.abs(defect)))

    def _newton_update(self, q: npt.NDArray, rhs: npt.NDArray) -> npt.NDArray:
        """One Newton step on the real 4x4 form of q - R - C N(q) = 0."""
        sigma = self.nl.sigma
        modulus = np.abs(q)
        power = modulus ** (2 * sigma)
        phase_squared = np.where(modulus > 0, (q / np.where(modulus > 0, modulus, 1.0)) ** 2, 0.0)
        holomorphic = np.eye(2) - self.step_matrix * ((sigma + 1) * power)[None, :]
        antiholomorphic = -self.step_matrix * (sigma * power * phase_squared)[None, :]
        jacobian = np.block(
            [
                [holomorphic.real + antiholomorphic.real, -holomorphic.imag + antiholomorphic.imag],
                [holomorphic.imag + antiholomorphic.imag, holomorphic.real - antiholomorphic.real],
            ]
        )
        defect = q - rhs - self.step_matrix @ _nonlinear_term(q, sigma)
        step = np.linalg.solve(jacobian, -np.concatenate([defect.real, defect.imag]))
        return q + step[:2] + 1j * step[2:]

    def _solve_step(self, rhs: npt.NDArray, guess: npt.NDArray) -> Tuple[npt.NDArray, int, float]:
        params = self.params
        if self.nl.is_linear:
            q = np.linalg.solve(np.eye(2) - self.step_matrix, rhs)
            return q, 1, self._residual(q, rhs)

        q = guess
        residual = self._residual(q, rhs)
        stalled = 0
        for iteration in range(1, params.max_inner_iter + 1):
            if stalled >= self.STALL_LIMIT:
                q = self._newton_update(q, rhs)
            else:
                mapped = rhs + self.step_matrix @ _nonlinear_term(q, self.nl.sigma)
                q = self.DAMPING * mapped + (1 - self.DAMPING) * q
            previous, residual = residual, self._residual(q, rhs)
            if not np.all(np.isfinite(q)):
                return q, iteration, math.inf
            if residual < params.fixed_point_tol * max(1.0, float(np.max(np.abs(q)))):
                return q, iteration, residual
            if residual > self.STALL_RATIO * previous:
                stalled += 1
                if stalled == self.STALL_LIMIT:
                    log.debug(f"Inner iteration stalled at residual {residual:.3e}; switching to Newton")
            if np.max(np.abs(q)) > params.blowup_threshold:
                return q, iteration, residual
        return q, params.max_inner_iter, residual

    def solve(self) -> ChargeTrajectory:
        params = self.params
        n_steps = params.n_steps
        sigma = self.nl.sigma
        g1, g2 = self.couplings
        log.info(
            f"Solving charge equations: {n_steps} steps of dt={params.dt!r}, sigma={sigma}, "
            f"couplings=({g1!r}, {g2!r})"
        )
        free_left, free_right = self._free_terms()

        q = np.zeros((n_steps + 1, 2), dtype=complex)
        nonlinear = np.zeros((n_steps + 1, 2), dtype=complex)
        inner_iters = np.zeros(n_steps + 1, dtype=int)
        residuals = np.zeros(n_steps + 1)
        q[0] = free_left[0], free_right[0]
        nonlinear[0] = _nonlinear_term(q[0], sigma)

        for n in range(1, n_steps + 1):
            self_left = self.self_weights.history(nonlinear[:, 0], n)
            self_right = self.self_weights.history(nonlinear[:, 1], n)
            cross_left = self.cross_weights.history(nonlinear[:, 0], n)
            cross_right = self.cross_weights.history(nonlinear[:, 1], n)
            rhs = np.array(
                [
                    free_left[n] + MEMORY_PREFACTOR * (g1 * self_left + g2 * cross_right),
                    free_right[n] + MEMORY_PREFACTOR * (g1 * cross_left + g2 * self_right),
                ]
            )
            guess = 2 * q[n - 1] - q[n - 2] if n >= 2 else q[n - 1]
            q_new, iterations, residual = self._solve_step(rhs, guess)
            largest = float(np.max(np.abs(q_new))) if np.all(np.isfinite(q_new)) else math.inf

            if largest > params.blowup_threshold:
                q[n] = q_new
                inner_iters[n], residuals[n] = iterations, residual
                log.warning(f"Blow-up detected at t={self.times[n]:.6g}: max|q| = {largest:.3e}")
                return self._trajectory(q, inner_iters, residuals, n, blow_up_time=float(self.times[n]))
            tolerance = params.fixed_point_tol * max(1.0, largest)
            if not residual < tolerance:
                partial = self._trajectory(q, inner_iters, residuals, n - 1)
                raise SolverConvergenceError(
                    f"Inner iteration did not converge in {iterations} iterations",
                    time=float(self.times[n]),
                    residual=residual,
                    trajectory=partial,
                )

            q[n] = q_new
            nonlinear[n] = _nonlinear_term(q_new, sigma)
            inner_iters[n], residuals[n] = iterations, residual
            if n % self.PROGRESS_EVERY == 0:
                log.debug(f"Step {n}/{n_steps}: |q| = ({abs(q_new[0]):.6g}, {abs(q_new[1]):.6g})")

        log.info(f"Charge equations solved up to t={self.times[-1]:.6g}")
        return self._trajectory(q, inner_iters, residuals, n_steps)

    def _trajectory(
        self,
        q: npt.NDArray,
        inner_iters: npt.NDArray,
        residuals: npt.NDArray,
        last_index: int,
        blow_up_time: Optional[float] = None,
    ) -> ChargeTrajectory:
        stop = last_index + 1
        return ChargeTrajectory(
            times=self.times[:stop].copy(),
            q1=q[:stop, 0].copy(),
            q2=q[:stop, 1].copy(),
            inner_iters=inner_iters[:stop].copy(),
            residuals=residuals[:stop].copy(),
            well=self.cfg,
            blow_up_time=blow_up_time,
        )


def solve_charges(
    cfg: WellConfig, nl: Nonlinearity, psi0: InitialState, params: SolverParams
) -> ChargeTrajectory:
    """Solves the charge equations on the uniform grid t_n = n dt.

    Args:
        cfg (WellConfig): The wells.
        nl (Nonlinearity): Couplings and power sigma.
        psi0 (InitialState): The initial datum.
        params (SolverParams): Step, horizon, tolerances.

    Returns:
        (ChargeTrajectory): The charges; partial with blow_up_time set if the blow-up threshold was hit.
    """
    return ChargeSolver(cfg, nl, psi0, params).solve()


def linear_exact_charges(
    cfg: WellConfig,
    mix_alpha: complex,
    mix_beta: complex,
    t: npt.ArrayLike,
    pair: Optional[EigenPair] = None,
):
    """Exact charges of the linear superposition mix_alpha * phi_f + mix_beta * phi_e.

    Returns:
        (tuple): (q1(t), q2(t)), each phi(y_i) evolving with the phase exp(+i lambda t).
    """
    if pair is None:
        pair = spectral.solve_eigenvalues(cfg)
    if not isinstance(pair, EigenPair):
        raise DomainError("Exact linear charges need a configuration with two eigenvalues.")
    ground, excited = spectral.bound_states(cfg, pair)
    left, right = cfg.centers
    t = np.asarray(t, dtype=float)
    ground_phase = np.exp(1j * pair.lambda0 * t)
    excited_phase = np.exp(1j * pair.lambda1 * t)
    charges = []
    for center in (left, right):
        charge = (
            mix_alpha * spectral.eval_state(ground, center) * ground_phase
            + mix_beta * spectral.eval_state(excited, center) * excited_phase
        )
        charges.append(complex(charge) if charge.ndim == 0 else charge)
    return charges[0], charges[1]


def effective_gamma(setup: NonlinearSetup, psi0: InitialState, cfg: WellConfig) -> float:
    """The constant gamma for which gamma |psi0(+-a)|^(2 sigma) averages to the initial strength.

    Args:
        setup (NonlinearSetup): The initial strength gamma_pm(0) and the power sigma.
        psi0 (InitialState): The initial datum.
        cfg (WellConfig): The wells.

    Returns:
        (float): 2 gamma_pm(0) / (|psi0(a)|^(2 sigma) + |psi0(-a)|^(2 sigma)).
    """
    if setup.initial_strength is None:
        raise DomainError("The effective strength needs an initial strength gamma_pm(0).")
    values = np.abs(psi0.evaluate(list(cfg.centers)))
    denominator = float(np.sum(values ** (2 * setup.sigma)))
    if denominator == 0:
        raise DomainError("The initial datum vanishes at both wells; the effective strength is undefined.")
    return 2 * setup.initial_strength / denominator


def time_dependent_strengths(
    traj: ChargeTrajectory, nl: Nonlinearity
) -> Tuple[npt.NDArray, npt.NDArray]:
    """gamma_j |q_j(t)|^(2 sigma) for the left and right wells."""
    g1, g2 = nl.strengths(traj.well)
    return g1 * np.abs(traj.q1) ** (2 * nl.sigma), g2 * np.abs(traj.q2) ** (2 * nl.sigma)
