import cmath
import math
import unittest

import numpy as np

from src.core import spectral
from src.core.charges import *
from src.core.freeprop import free_evolve_at
from src.structures.initial_state import ExponentialTerm, InitialState
from src.structures.nonlinearity import Nonlinearity, SolverParams
from src.structures.run_config import NonlinearSetup
from src.structures.well_config import WellConfig
from src.utils.errors import DomainError, SolverConvergenceError

# Run in terminal to get per test breakdown: python -m unittest -v tests/core/test_charges.py


class TestChargeSolverLinear(unittest.TestCase):
    def setUp(self):
        self.cfg = WellConfig(a=3.0, gamma1=-0.5, gamma2=-0.5)
        self.pair = spectral.solve_eigenvalues(self.cfg)
        self.ground, self.excited = spectral.bound_states(self.cfg, self.pair)
        self.period = 2 * math.pi / self.pair.delta_lambda

    def test_memory_prefactor(self):
        self.assertTrue(np.isclose(MEMORY_PREFACTOR, -1j / cmath.sqrt(4j * math.pi)))

    def test_solve_charges_without_coupling_is_the_free_evolution(self):
        psi0 = InitialState.from_bound_states(self.ground, self.excited, math.sqrt(0.5), math.sqrt(0.5))
        params = SolverParams(dt=0.5, t_final=10.0)
        traj = solve_charges(self.cfg, Nonlinearity(gamma=0.0), psi0, params)
        expected = free_evolve_at(psi0, traj.times[1:], -3.0)
        self.assertTrue(np.allclose(traj.q1[1:], expected, rtol=1e-14, atol=0))

    def test_solve_charges_of_a_bound_state_rotate_with_its_eigenvalue(self):
        psi0 = InitialState.from_bound_state(self.ground)
        params = SolverParams(dt=0.05, t_final=10.0)
        traj = solve_charges(self.cfg, Nonlinearity(), psi0, params)
        value = spectral.eval_state(self.ground, -3.0)
        expected = value * np.exp(1j * self.pair.lambda0 * traj.times)
        scale = np.max(np.abs(expected))
        self.assertLess(np.max(np.abs(traj.q1 - expected)) / scale, 1e-3)
        self.assertLess(np.max(np.abs(traj.q2 - expected)) / scale, 1e-3)
        # The opposite phase convention is far away at t = 10
        wrong = value * np.exp(-1j * self.pair.lambda0 * traj.times)
        self.assertGreater(np.max(np.abs(traj.q1 - wrong)) / scale, 0.5)

    def test_solve_charges_reproduce_the_exact_linear_beating(self):
        mix_alpha, mix_beta = math.sqrt(0.01), math.sqrt(0.99)
        psi0 = InitialState.from_bound_states(self.ground, self.excited, mix_alpha, mix_beta)
        dt = self.period / 400
        params = SolverParams(dt=dt, t_final=200 * dt)
        traj = solve_charges(self.cfg, Nonlinearity(), psi0, params)
        q1, q2 = linear_exact_charges(self.cfg, mix_alpha, mix_beta, traj.times, pair=self.pair)
        scale = np.max(np.abs(q1))
        self.assertLess(np.max(np.abs(traj.q1 - q1)) / scale, 1e-3)
        self.assertLess(np.max(np.abs(traj.q2 - q2)) / scale, 1e-3)

    def test_solve_charges_converge_when_the_step_is_refined(self):
        mix = math.sqrt(0.5)
        psi0 = InitialState.from_bound_states(self.ground, self.excited, mix, mix)
        horizon = self.period / 2
        errors = []
        for steps in (50, 100, 200):
            params = SolverParams(dt=horizon / steps, t_final=horizon)
            traj = solve_charges(self.cfg, Nonlinearity(), psi0, params)
            q1, _ = linear_exact_charges(self.cfg, mix, mix, traj.times, pair=self.pair)
            errors.append(np.max(np.abs(traj.q1 - q1)))
        self.assertLess(errors[1], errors[0])
        self.assertLess(errors[2], errors[1])
        self.assertGreaterEqual(math.log2(errors[0] / errors[2]) / 2, 1.0)

    def test_solve_charges_keep_equal_wells_symmetric(self):
        psi0 = InitialState.from_bound_state(self.ground)
        setup = NonlinearSetup(initial_strength=-0.5, sigma=0.5)
        nl = Nonlinearity(gamma=effective_gamma(setup, psi0, self.cfg), sigma=0.5)
        traj = solve_charges(self.cfg, nl, psi0, SolverParams(dt=0.5, t_final=20.0))
        self.assertTrue(np.allclose(traj.q1, traj.q2, rtol=0, atol=1e-9))

    def test_solve_charges_are_gauge_covariant(self):
        psi0 = InitialState.from_bound_states(self.ground, self.excited, math.sqrt(0.3), math.sqrt(0.7))
        nl = Nonlinearity(gamma=-1.0, sigma=0.5)
        params = SolverParams(dt=0.5, t_final=15.0)
        phase = cmath.exp(0.7j)
        traj = solve_charges(self.cfg, nl, psi0, params)
        rotated = solve_charges(self.cfg, nl, psi0.scaled(phase), params)
        self.assertTrue(np.allclose(rotated.q1, phase * traj.q1, rtol=0, atol=1e-8))
        self.assertTrue(np.allclose(rotated.q2, phase * traj.q2, rtol=0, atol=1e-8))

    def test_solve_charges_are_causal(self):
        psi0 = InitialState.from_bound_states(self.ground, self.excited, math.sqrt(0.5), math.sqrt(0.5))
        nl = Nonlinearity(gamma=-1.0, sigma=0.7)
        short = solve_charges(self.cfg, nl, psi0, SolverParams(dt=0.5, t_final=10.0))
        long = solve_charges(self.cfg, nl, psi0, SolverParams(dt=0.5, t_final=20.0))
        self.assertTrue(np.allclose(long.q1[: len(short.times)], short.q1, rtol=0, atol=1e-9))
        self.assertTrue(np.allclose(long.q2[: len(short.times)], short.q2, rtol=0, atol=1e-9))


class TestChargeSolverFailures(unittest.TestCase):
    def setUp(self):
        self.cfg = WellConfig(a=3.0, gamma1=-0.5, gamma2=-0.5)
        pair = spectral.solve_eigenvalues(self.cfg)
        ground, excited = spectral.bound_states(self.cfg, pair)
        self.psi0 = InitialState.from_bound_states(ground, excited, math.sqrt(0.5), math.sqrt(0.5))

    def test_solve_charges_when_the_blow_up_threshold_is_crossed(self):
        params = SolverParams(dt=0.5, t_final=10.0, blowup_threshold=1e-3)
        traj = solve_charges(self.cfg, Nonlinearity(gamma=-1.0, sigma=1.2), self.psi0, params)
        self.assertTrue(traj.blew_up)
        self.assertEqual(traj.blow_up_time, 0.5)
        self.assertEqual(len(traj.times), 2)
        self.assertGreater(max(abs(traj.q1[-1]), abs(traj.q2[-1])), 1e-3)

    def test_solve_charges_when_the_inner_iteration_cannot_converge(self):
        params = SolverParams(dt=0.5, t_final=10.0, max_inner_iter=1)
        with self.assertRaises(SolverConvergenceError) as context:
            solve_charges(self.cfg, Nonlinearity(gamma=-1.0, sigma=0.7), self.psi0, params)
        error = context.exception
        self.assertEqual(error.time, 0.5)
        self.assertEqual(len(error.trajectory.times), 1)

    def test_solve_charges_record_inner_iterations(self):
        traj = solve_charges(
            self.cfg, Nonlinearity(gamma=-1.0, sigma=0.7), self.psi0, SolverParams(dt=0.5, t_final=5.0)
        )
        self.assertEqual(traj.inner_iters[0], 0)
        self.assertTrue(np.all(traj.inner_iters[1:] >= 1))
        self.assertTrue(np.all(traj.residuals[1:] < 1e-10 * np.maximum(1.0, np.abs(traj.q1[1:]))))


class TestLinearExactCharges(unittest.TestCase):
    def setUp(self):
        self.cfg = WellConfig(a=3.0, gamma1=-0.5, gamma2=-0.5)
        self.pair = spectral.solve_eigenvalues(self.cfg)

    def test_linear_exact_charges_of_a_stationary_state_have_constant_modulus(self):
        t = np.linspace(0.0, 200.0, 101)
        q1, _ = linear_exact_charges(self.cfg, 1.0, 0.0, t)
        self.assertTrue(np.allclose(np.abs(q1), 0.3695, atol=2e-3))
        self.assertTrue(np.allclose(np.abs(q1), np.abs(q1[0]), rtol=1e-13))

    def test_linear_exact_charges_beat_with_the_level_splitting(self):
        period = 2 * math.pi / self.pair.delta_lambda
        mix = math.sqrt(0.5)
        t = np.linspace(0.0, period, 201)
        q1, _ = linear_exact_charges(self.cfg, mix, mix, t, pair=self.pair)
        signal = np.abs(q1) ** 2
        self.assertEqual(int(np.argmax(signal)) % 200, 0)
        self.assertEqual(int(np.argmin(signal)), 100)

    def test_linear_exact_charges_when_there_is_no_pair(self):
        with self.assertRaises(DomainError):
            linear_exact_charges(WellConfig(a=2.0, gamma1=-0.5, gamma2=-0.5), 1.0, 0.0, 1.0)


class TestStrengths(unittest.TestCase):
    def setUp(self):
        self.cfg = WellConfig(a=3.0, gamma1=-0.5, gamma2=-0.5)
        pair = spectral.solve_eigenvalues(self.cfg)
        self.ground, _ = spectral.bound_states(self.cfg, pair)

    def test_effective_gamma_without_nonlinearity_is_the_initial_strength(self):
        psi0 = InitialState.from_bound_state(self.ground)
        self.assertEqual(effective_gamma(NonlinearSetup(initial_strength=-0.5, sigma=0.0), psi0, self.cfg), -0.5)

    def test_effective_gamma_for_a_symmetric_datum(self):
        psi0 = InitialState.from_bound_state(self.ground)
        value = abs(spectral.eval_state(self.ground, 3.0))
        result = effective_gamma(NonlinearSetup(initial_strength=-0.5, sigma=0.7), psi0, self.cfg)
        self.assertTrue(np.isclose(result, -0.5 / value**1.4))

    def test_effective_gamma_when_the_datum_vanishes_at_both_wells(self):
        psi0 = InitialState(
            terms=(
                ExponentialTerm(weight=1.0, kappa=1.0, center=0.0),
                ExponentialTerm(weight=-1.0, kappa=1.0, center=0.0),
            )
        )
        with self.assertRaises(DomainError):
            effective_gamma(NonlinearSetup(initial_strength=-0.5, sigma=0.7), psi0, self.cfg)

    def test_time_dependent_strengths_follow_the_charges(self):
        psi0 = InitialState.from_bound_state(self.ground)
        nl = Nonlinearity(gamma=-2.0, sigma=0.5)
        traj = solve_charges(self.cfg, nl, psi0, SolverParams(dt=0.5, t_final=5.0))
        left, right = time_dependent_strengths(traj, nl)
        self.assertTrue(np.allclose(left, -2.0 * np.abs(traj.q1)))
        self.assertTrue(np.allclose(right, -2.0 * np.abs(traj.q2)))

        linear_left, _ = time_dependent_strengths(traj, Nonlinearity())
        self.assertTrue(np.all(linear_left == -0.5))


if __name__ == "__main__":
    unittest.main()
