import numpy as np
import pytest
from numpy.testing import assert_allclose

from miekerker.mie import (ConvergenceError, MieCoefficients, internal_field,
                           mie_coefficients, mie_efficiencies, wiscombe_n_max)


def rayleigh_a1(x: float, m: complex) -> complex:
    """Small-particle limit -i*(2/3)*x^3*(m^2-1)/(m^2+2)."""
    return -1j * (2.0 / 3.0) * x**3 * (m**2 - 1) / (m**2 + 2)


class TestCoefficients:
    def test_index_matched_sphere_scatters_nothing(self):
        c = mie_coefficients(1.7, 1.0, n_max=5)
        assert np.all(c.a == 0)
        assert np.all(c.b == 0)

    def test_rayleigh_limit(self):
        # oracle value: -i*(2/3)*1e-6*(1.25/4.25) = -1.9607843e-7i
        c = mie_coefficients(0.01, 1.5)
        expect = rayleigh_a1(0.01, 1.5)
        assert expect == pytest.approx(-1.9607843137e-7j, rel=1e-9)
        assert abs(c.a[0] - expect) < 0.01 * abs(expect)
        assert abs(c.b[0]) < 1e-4 * abs(c.a[0])

    def test_lossless_unitarity_circle(self):
        for x in (0.5, 1.0, 2.0):
            c = mie_coefficients(x, 1.5)
            assert np.max(np.abs(np.abs(c.a - 0.5) - 0.5)) < 1e-10
            assert np.max(np.abs(np.abs(c.b - 0.5) - 0.5)) < 1e-10

    def test_coefficients_decay(self):
        c = mie_coefficients(1.0, 1.5)
        mags = np.abs(c.a) + np.abs(c.b)
        assert mags[-1] < 1e-8 * mags[0]

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            mie_coefficients(-1.0, 1.5)
        with pytest.raises(ValueError):
            mie_coefficients(1.0, 1.5 - 0.2j)

    def test_truncation_raises_convergence_error(self):
        with pytest.raises(ConvergenceError):
            mie_coefficients(5.0, 1.5, n_max=2)

    def test_auto_n_max_is_converged(self):
        q0 = mie_efficiencies(mie_coefficients(2.0, 1.5))
        q1 = mie_efficiencies(mie_coefficients(2.0, 1.5,
                                               n_max=wiscombe_n_max(2.0) + 8))
        assert abs(q1.q_sca - q0.q_sca) < 1e-10


class TestEfficiencies:
    def test_lossless_absorption_vanishes(self):
        for x in (0.3, 1.0, 2.0):
            q = mie_efficiencies(mie_coefficients(x, 1.5))
            assert abs(q.q_abs) < 1e-10

    def test_no_scatterer(self):
        q = mie_efficiencies(mie_coefficients(1.0, 1.0, n_max=3))
        assert q.q_sca == 0 and q.q_ext == 0

    def test_rayleigh_q_sca(self):
        x, m = 0.01, 1.5
        q = mie_efficiencies(mie_coefficients(x, m))
        expect = (8.0 / 3.0) * x**4 * abs((m**2 - 1) / (m**2 + 2)) ** 2
        assert q.q_sca == pytest.approx(expect, rel=0.02)

    def test_absorbing_sphere(self):
        q = mie_efficiencies(mie_coefficients(1.0, 2.0 + 0.5j))
        assert q.q_abs > 0

    def test_optical_theorem(self):
        # forward amplitude S(0) = sum (2n+1)/2 (a_n + b_n);
        # Q_ext = (4/x^2) Re S(0)
        for x, m in [(0.5, 1.5), (2.0, 2.0 + 0.1j)]:
            c = mie_coefficients(x, m)
            n = np.arange(1, c.n_max + 1)
            s0 = np.sum((2 * n + 1) / 2.0 * (c.a + c.b))
            q = mie_efficiencies(c)
            assert q.q_ext == pytest.approx(4.0 / x**2 * s0.real, rel=1e-8)


class TestInternalField:
    def test_index_matched_reproduces_plane_wave(self):
        c = mie_coefficients(2.0, 1.0, n_max=20)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-0.6, 0.6, (40, 3))
        e = internal_field(c, pts, radius=1.0)
        k = 2.0
        expect = np.zeros_like(e)
        expect[:, 0] = np.exp(1j * k * pts[:, 2])
        assert_allclose(e, expect, atol=1e-10)

    def test_electrostatic_center_field(self):
        m = 2.0
        c = mie_coefficients(1e-3, m, n_max=3)
        e = internal_field(c, [[0.0, 0.0, 0.0]], radius=1.0, e0=2.5)
        assert e[0, 0] == pytest.approx(2.5 * 3.0 / (m**2 + 2), rel=1e-5)
        assert abs(e[0, 1]) < 1e-12 and abs(e[0, 2]) < 1e-12

    def test_uniform_in_small_sphere(self):
        # residual variation across the sphere is O(m*x)
        c = mie_coefficients(1e-3, 1.8, n_max=3)
        rng = np.random.default_rng(1)
        pts = rng.uniform(-0.5, 0.5, (30, 3))
        e = internal_field(c, pts, radius=1.0)
        assert np.max(np.abs(e - e[0])) < 5e-3

    def test_point_outside_raises(self):
        c = mie_coefficients(0.8, 2.0)
        with pytest.raises(ValueError):
            internal_field(c, [[1.2, 0.0, 0.0]], radius=1.0)

    def test_synthetic_coefficients_rejected(self):
        c = MieCoefficients.from_amplitudes([1.0], [1.0])
        with pytest.raises(ValueError):
            internal_field(c, [[0.0, 0.0, 0.0]], radius=1.0)
