import math
import unittest

import numpy as np
from scipy import integrate

from src.core.freeprop import *
from src.structures.initial_state import ExponentialTerm, InitialState
from src.utils.errors import DomainError

# Run in terminal to get per test breakdown: python -m unittest -v tests/core/test_freeprop.py

OMEGA = np.exp(0.25j * np.pi)


def _complex_quad(func, lo, hi, **kwargs):
    real_part, _ = integrate.quad(lambda r: func(r).real, lo, hi, **kwargs)
    imag_part, _ = integrate.quad(lambda r: func(r).imag, lo, hi, **kwargs)
    return complex(real_part, imag_part)


def _free_evolution_by_quadrature(kappa, center, t, x):
    """Oracle for U(t) exp(-kappa |. - center|) at x.

    For small kappa^2 t the real-line integral is moved onto rays x +- exp(i pi/4) r from x and from the
    kink, where the chirp becomes a Gaussian. Otherwise it is integrated directly on a truncated line.
    """
    prefactor = np.exp(-0.25j * np.pi) / math.sqrt(4 * math.pi * t)

    def _chirp(y):
        return np.exp(1j * (x - y) ** 2 / (4 * t))

    def _decaying(y):
        return np.exp(-kappa * (y - center))

    def _growing(y):
        return np.exp(kappa * (y - center))

    if kappa * kappa * t > 8:
        width = abs(x - center) + 40 / kappa
        points = [p for p in (center, x) if center - width < p < center + width]
        value = _complex_quad(
            lambda y: _chirp(y) * np.exp(-kappa * abs(y - center)),
            center - width,
            center + width,
            points=points,
            limit=2000,
            epsabs=1e-12,
        )
        return prefactor * value

    reach = 4 * math.sqrt(15 * t) + 8 * kappa * t
    options = dict(limit=200, epsabs=1e-13, epsrel=1e-11)

    def _ray(start, direction, profile):
        def _integrand(r):
            y = start + direction * OMEGA * r
            return _chirp(y) * profile(y) * OMEGA

        return _complex_quad(_integrand, 0.0, reach, **options)

    if x <= center:
        value = (
            _ray(center, 1, _decaying)
            + _ray(x, -1, _growing)
            + _ray(x, 1, _growing)
            - _ray(center, 1, _growing)
        )
    else:
        value = (
            _ray(center, -1, _growing)
            + _ray(x, -1, _decaying)
            - _ray(center, -1, _decaying)
            + _ray(x, 1, _decaying)
        )
    return prefactor * value


class TestPropagatorKernel(unittest.TestCase):
    def test_propagator_kernel_modulus_and_phase(self):
        value = propagator_kernel(1 / (4 * math.pi), 0.0)
        self.assertTrue(np.isclose(abs(value), 1.0))
        self.assertTrue(np.isclose(np.angle(value), -math.pi / 4))

        value = propagator_kernel(1.0, 2.0)
        self.assertTrue(np.isclose(abs(value), 1 / math.sqrt(4 * math.pi)))
        self.assertTrue(np.isclose(np.angle(value), 1 - math.pi / 4))

    def test_propagator_kernel_when_tau_is_not_positive(self):
        with self.assertRaises(DomainError):
            propagator_kernel(0.0, 1.0)
        with self.assertRaises(DomainError):
            propagator_kernel(np.array([0.5, -0.1]), 1.0)


class TestFreeEvolveExponential(unittest.TestCase):
    def test_free_evolve_exponential_against_quadrature_on_random_cases(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            kappa = float(rng.uniform(0.05, 2.0))
            t = float(np.exp(rng.uniform(math.log(0.01), math.log(50.0))))
            center = float(rng.uniform(-3.0, 3.0))
            x = center + float(rng.uniform(-10.0, 10.0))
            expected = _free_evolution_by_quadrature(kappa, center, t, x)
            result = free_evolve_exponential(kappa, center, 1.0, t, x)
            self.assertLess(abs(result - expected), 1e-7 * max(1.0, abs(expected)), msg=f"{kappa}, {t}, {x}")

    def test_free_evolve_exponential_at_the_kink(self):
        for kappa, t in ((0.5, 0.3), (1.5, 2.0)):
            expected = _free_evolution_by_quadrature(kappa, 1.0, t, 1.0)
            self.assertLess(abs(free_evolve_exponential(kappa, 1.0, 1.0, t, 1.0) - expected), 1e-7)

    def test_free_evolve_exponential_is_linear_in_the_weight(self):
        base = free_evolve_exponential(0.7, -1.0, 1.0, 0.8, 0.4)
        scaled = free_evolve_exponential(0.7, -1.0, 2.0 - 0.5j, 0.8, 0.4)
        self.assertTrue(np.isclose(scaled, (2.0 - 0.5j) * base))

    def test_free_evolve_exponential_is_even_about_its_center(self):
        x = np.linspace(0.0, 8.0, 17)
        left = free_evolve_exponential(0.6, 0.0, 1.0, 1.7, -x)
        right = free_evolve_exponential(0.6, 0.0, 1.0, 1.7, x)
        self.assertTrue(np.all(np.isclose(left, right, rtol=1e-13)))

    def test_free_evolve_exponential_tends_to_the_initial_datum(self):
        x = np.array([-3.0, -1.0, 0.5, 2.5])
        result = free_evolve_exponential(1.0, 0.5, 1.0, 1e-8, x)
        self.assertTrue(np.all(np.abs(result - np.exp(-np.abs(x - 0.5))) < 1e-3))

    def test_free_evolve_exponential_broadcasts_times_against_positions(self):
        t = np.array([0.5, 1.0, 2.0])
        result = free_evolve_exponential(0.5, 0.0, 1.0, t, 1.0)
        self.assertEqual(result.shape, (3,))
        for index, time in enumerate(t):
            self.assertTrue(np.isclose(result[index], free_evolve_exponential(0.5, 0.0, 1.0, time, 1.0)))

    def test_free_evolve_exponential_when_time_is_not_positive(self):
        with self.assertRaises(DomainError):
            free_evolve_exponential(0.5, 0.0, 1.0, 0.0, 1.0)
        with self.assertRaises(DomainError):
            free_evolve_exponential(0.0, 0.0, 1.0, 1.0, 1.0)


class TestFreeEvolution(unittest.TestCase):
    def test_free_evolve_at_preserves_the_norm(self):
        psi0 = InitialState(
            terms=(
                ExponentialTerm(weight=1.0, kappa=0.5, center=-3.0),
                ExponentialTerm(weight=0.5j, kappa=0.5, center=3.0),
            )
        )
        t = 0.5
        grid = resolving_grid(3.0, t, psi0.kappa_max)
        density = np.abs(free_evolve_at(psi0, t, grid)) ** 2
        mass = integrate.trapezoid(density, grid)
        self.assertTrue(np.isclose(mass, psi0.norm() ** 2, rtol=1e-4))

    def test_free_evolve_amplitude_carries_a_small_error_estimate(self):
        psi0 = InitialState(
            terms=(
                ExponentialTerm(weight=1.0, kappa=0.5, center=-3.0),
                ExponentialTerm(weight=-2.0, kappa=4.0, center=3.0),
            )
        )
        for t, x in ((0.01, 3.0), (1.0, -3.0), (50.0, 0.0), (400.0, 25.0)):
            amplitude = free_evolve_amplitude(psi0, t, x)
            self.assertEqual(amplitude.value, complex(free_evolve_at(psi0, t, x)))
            self.assertGreater(amplitude.error_estimate, 0.0)
            self.assertLess(amplitude.error_estimate, 1e-10)
        with self.assertRaises(DomainError):
            free_evolve_amplitude(psi0, 0.0, 0.0)

    def test_free_evolve_profile_agrees_with_the_closed_form(self):
        kappa, t, x = 1.0, 2.0, 1.5
        expected = free_evolve_exponential(kappa, 0.0, 1.0, t, x)
        result = free_evolve_profile(lambda y: math.exp(-kappa * abs(y)), t, x, half_width=30.0)
        self.assertLess(abs(result - expected), 1e-6)

    def test_resolving_grid_is_symmetric_and_fine_enough(self):
        a, t, kappa = 3.0, 0.5, 0.5
        grid = resolving_grid(a, t, kappa)
        half_width = 10 * a + 4 * math.sqrt(t)
        spacing = grid[1] - grid[0]
        self.assertEqual(len(grid) % 2, 1)
        self.assertEqual(grid[len(grid) // 2], 0.0)
        self.assertTrue(np.all(grid == -grid[::-1]))
        self.assertTrue(np.isclose(grid[-1], half_width))
        self.assertTrue(np.isclose(grid[0], -half_width))
        self.assertLessEqual(spacing, 1 / (4 * kappa) + 1e-12)
        self.assertLessEqual(spacing, math.pi * math.sqrt(t) / (2 * half_width) + 1e-12)

    def test_resolving_grid_at_time_zero(self):
        grid = resolving_grid(2.0, 0.0, 1.0)
        self.assertTrue(np.isclose(grid[-1], 20.0))
        self.assertLessEqual(grid[1] - grid[0], 0.25 + 1e-12)


if __name__ == "__main__":
    unittest.main()
