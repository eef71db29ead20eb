from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from nlsdecay import oracles

# frozen quadrature values
SQRT_PI = 1.772453850905516
PI_QUARTER = 1.3313353638003897
WINDOW_0_2 = 1.2221490357664462


class TestClosedForms:
    def test_gaussian_integrals(self):
        vals = oracles.gaussian_integrals()
        assert vals["sqrt_pi"] == pytest.approx(SQRT_PI, abs=1e-14)
        assert vals["sqrt_pi_over_2"] == pytest.approx(SQRT_PI / 2, abs=1e-14)
        assert vals["pi_quarter"] == pytest.approx(PI_QUARTER, abs=1e-14)

    def test_sin_integrals(self):
        vals = oracles.sin_integrals()
        assert vals["sin2"] == pytest.approx(math.pi / 2, abs=1e-13)
        assert vals["cos2"] == pytest.approx(math.pi / 2, abs=1e-13)
        assert vals["sin4"] == pytest.approx(3 * math.pi / 8, abs=1e-13)


class TestSpectralMass:
    def test_window(self):
        assert oracles.gaussian_spectral_mass(0, 2) == pytest.approx(WINDOW_0_2, abs=1e-13)

    def test_full_band_is_norm(self):
        assert oracles.gaussian_spectral_mass(0, math.inf) == pytest.approx(PI_QUARTER, abs=1e-13)
        assert oracles.gaussian_spectral_mass(0, math.inf, dim=2) == pytest.approx(math.sqrt(math.pi), abs=1e-13)

    def test_width_scaling(self):
        # mass of exp(-x^2/(2w^2)) is sqrt(pi) w
        assert oracles.gaussian_spectral_mass(0, math.inf, width=3.0) == pytest.approx(math.sqrt(SQRT_PI * 3), abs=1e-12)

    def test_additive_in_squares(self):
        a = oracles.gaussian_spectral_mass(0, 1) ** 2
        b = oracles.gaussian_spectral_mass(1, 2) ** 2
        assert a + b == pytest.approx(WINDOW_0_2**2, abs=1e-13)

    def test_dim3_rejected(self):
        with pytest.raises(ValueError):
            oracles.gaussian_spectral_mass(0, 1, dim=3)


class TestGaussianEvolution:
    def test_initial(self):
        x = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(oracles.gaussian_evolution(0.0, x), np.exp(-(x**2) / 2))

    @pytest.mark.parametrize("t", [0.5, 3.0, -2.0])
    def test_mass_conserved(self, t):
        val, _ = integrate.quad(lambda x: abs(oracles.gaussian_evolution(t, x)) ** 2, -np.inf, np.inf, epsabs=1e-13)
        assert val == pytest.approx(SQRT_PI, abs=1e-10)

    def test_solves_free_equation(self):
        # i u_t + u_xx = 0 by central differences in t and x
        t, x, h = 0.7, np.array([-1.3, 0.0, 0.4, 2.1]), 1e-3
        u = lambda s, y: oracles.gaussian_evolution(s, y)
        ut = (u(t + h, x) - u(t - h, x)) / (2 * h)
        uxx = (u(t, x + h) - 2 * u(t, x) + u(t, x - h)) / h**2
        np.testing.assert_allclose(1j * ut + uxx, 0, atol=1e-5)

    def test_2d_is_product(self):
        t, r = 1.5, np.array([0.0, 1.0, 2.5])
        one = oracles.gaussian_evolution(t, r)
        np.testing.assert_allclose(oracles.gaussian_evolution(t, r, dim=2), one * oracles.gaussian_evolution(t, 0.0), rtol=1e-14)


class TestHartreeDirect:
    def test_constant_density(self):
        kernel = np.array([1.0, 0.5, 0.25, 0.5])
        out = oracles.hartree_direct(kernel, np.ones(4), 0.5)
        np.testing.assert_allclose(out, 0.5 * kernel.sum())

    def test_matches_fft(self):
        rng = np.random.default_rng(11)
        k = rng.standard_normal((6, 5))
        d = rng.random((6, 5))
        fft = np.real(np.fft.ifft2(np.fft.fft2(k) * np.fft.fft2(d))) * 0.1
        np.testing.assert_allclose(oracles.hartree_direct(k, d, 0.1), fft, atol=1e-13)

    def test_delta_density_reproduces_kernel(self):
        k = np.arange(5.0)
        d = np.zeros(5)
        d[0] = 1.0
        np.testing.assert_allclose(oracles.hartree_direct(k, d, 1.0), k)
