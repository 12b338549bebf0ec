import math
import unittest

import numpy as np
from scipy import integrate, special

from src.core.faddeeva import *
from src.utils.errors import FaddeevaOverflowError

# Run in terminal to get per test breakdown: python -m unittest -v tests/core/test_faddeeva.py


def _faddeeva_by_quadrature(z):
    """w(z) = pi^(-1/2) int_0^inf exp(-t^2 / 4 + i z t) dt for Im z >= 0; the integrand is below 1e-21 past t=14."""
    z = complex(z)

    def _part(oscillation):
        value, _ = integrate.quad(
            lambda t: math.exp(-0.25 * t * t - z.imag * t) * oscillation(z.real * t),
            0.0,
            14.0,
            epsabs=1e-15,
            epsrel=1e-13,
            limit=400,
        )
        return value

    return complex(_part(math.cos), _part(math.sin)) / SQRT_PI


class TestFaddeeva(unittest.TestCase):
    def test_faddeeva_at_origin(self):
        self.assertTrue(np.isclose(faddeeva(0j), 1.0))

    def test_faddeeva_on_the_imaginary_axis_is_the_scaled_complementary_error_function(self):
        y = np.array([0.1, 1.0, 3.0, 10.0])
        self.assertTrue(np.all(np.isclose(faddeeva(1j * y), special.erfcx(y), rtol=1e-13)))

    def test_faddeeva_keeps_the_shape_of_its_input(self):
        z = np.array([[0.5 + 0.5j, -1.0 + 2.0j], [3.0 + 0.0j, 0.0 + 0.2j]])
        self.assertEqual(faddeeva(z).shape, (2, 2))
        self.assertIsInstance(faddeeva(1 + 1j), complex)

    def test_faddeeva_in_the_lower_half_plane_uses_the_reflection(self):
        for z in (1 - 1j, -2 - 0.5j, 0.3 - 2j):
            self.assertTrue(np.isclose(faddeeva(z), special.wofz(z), rtol=1e-12))
            self.assertTrue(np.isclose(faddeeva(z), 2 * np.exp(-z * z) - faddeeva(-z), rtol=1e-12))

    def test_faddeeva_when_the_reflection_overflows(self):
        with self.assertRaises(FaddeevaOverflowError):
            faddeeva(-30j)
        with self.assertRaises(OverflowError):
            faddeeva(np.array([1j, -30j]))

    def test_faddeeva_against_quadrature_over_the_disc(self):
        heights = np.concatenate(([0.0, 1e-10, 1e-4, 1e-2], np.linspace(0.5, 10.0, 12)))
        heights = np.concatenate((heights, -heights[1:]))
        x, y = np.meshgrid(np.linspace(-10.0, 10.0, 33), heights)
        z = (x + 1j * y)[np.abs(x + 1j * y) <= 10.0]
        values = faddeeva(z)
        for point, value in zip(z, values):
            if point.imag >= 0:
                expected = _faddeeva_by_quadrature(point)
                scale = abs(expected)
            else:
                reflected = _faddeeva_by_quadrature(-point)
                expected = 2 * np.exp(-point * point) - reflected
                scale = abs(2 * np.exp(-point * point)) + abs(reflected)
            self.assertLessEqual(abs(value - expected), 1e-12 * scale, point)

    def test_faddeeva_near_the_real_axis(self):
        for x in (0.5, 2.0, 4.5, 6.0, 9.5):
            for y in (0.0, 1e-12, 1e-6):
                for z in (complex(x, y), complex(-x, y)):
                    expected = _faddeeva_by_quadrature(z)
                    self.assertLessEqual(abs(faddeeva(z) - expected), 1e-12 * abs(expected), z)

    def test_faddeeva_series_for_moderate_arguments(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            z = complex(rng.uniform(-1.4, 1.4), rng.uniform(0.0, 1.4))
            self.assertTrue(np.isclose(faddeeva_series(z), faddeeva(z), rtol=1e-12, atol=1e-14))

    def test_faddeeva_continued_fraction_for_large_arguments(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            radius = rng.uniform(6.0, 10.0)
            angle = rng.uniform(0.06, np.pi - 0.06)
            z = radius * np.exp(1j * angle)
            self.assertTrue(
                np.isclose(faddeeva_continued_fraction(z), faddeeva(z), rtol=1e-10, atol=1e-14)
            )

    def test_faddeeva_weideman_over_the_upper_half_plane(self):
        x, y = np.meshgrid(np.linspace(-10, 10, 41), np.linspace(0, 10, 21))
        z = x + 1j * y
        z = z[np.abs(z) <= 10]
        self.assertTrue(np.all(np.isclose(faddeeva_weideman(z), faddeeva(z), rtol=1e-8, atol=1e-10)))

    def test_faddeeva_weideman_in_the_lower_half_plane(self):
        z = np.array([1 - 1j, -0.5 - 0.25j])
        self.assertTrue(np.all(np.isclose(faddeeva_weideman(z), special.wofz(z), rtol=1e-8)))

    def test_faddeeva_amplitude_error_estimate(self):
        amplitude = faddeeva_amplitude(1 + 1j)
        self.assertTrue(np.isclose(amplitude.value, faddeeva(1 + 1j)))
        self.assertLessEqual(amplitude.error_estimate, 1e-10)
        checked = faddeeva_amplitude(1 + 1j, cross_check=True)
        self.assertLessEqual(checked.error_estimate, 1e-9)
        self.assertGreaterEqual(checked.error_estimate, amplitude.error_estimate)

    def test_erf_on_antidiagonal_matches_the_complex_error_function(self):
        for beta, v in ((2.0, 0.7), (9.0, 0.1), (0.5, 3.0), (16.0, 0.0)):
            expected = special.erf(np.exp(-0.25j * np.pi) * np.sqrt(beta) * v)
            self.assertTrue(np.isclose(erf_on_antidiagonal(beta, v), expected, rtol=1e-12, atol=1e-14))


if __name__ == "__main__":
    unittest.main()
