"""Propagator and heat-kernel tests: oracle equivalence, conventions, symmetry."""

import math
import warnings

import numpy as np
import pytest

from fluxcone import cone, propagator, quadrature, specfun
from fluxcone.cone import BVariant, ConePoint
from fluxcone.errors import DomainError
from fluxcone.propagator import SeriesTruncation

# regression baselines recorded from the series oracle at high truncation,
# independently confirmed by an arbitrary-precision mode sum
SERIES_BASELINE = -0.039798233432381744 - 0.09432766895652453j


def params(rho, alpha, gauge=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cone.ConeParams(rho, alpha, gauge)


X = ConePoint(1.0, 0.3)
Y = ConePoint(1.2, 2.1)


class TestModeKernel:
    def test_against_regularized_quadrature(self):
        nu, t, r, r_p = 0.5, 0.7, 1.0, 1.2
        spec = quadrature.QuadratureSpec(
            abs_tol=1e-9, rel_tol=1e-9,
            epsilon_schedule=quadrature.default_epsilon_schedule(t, 10, 0.15))

        def family(eps):
            p = eps + 1j * t
            def g(sig):
                return (np.exp(-p * sig * sig) * specfun.bessel_j(nu, r * sig)
                        * specfun.bessel_j(nu, r_p * sig) * sig)
            return g

        oracle = quadrature.integrate_oscillatory_regularized(family, spec)
        got = propagator.mode_kernel(params(1.0, 0.5), nu, t, r, r_p)
        assert abs(got - oracle.value) < 1e-8

    def test_heat_mode_positive(self):
        p = params(1.0, 0.0)
        for tau in (0.1, 1.0, 10.0):
            for r in (0.3, 1.0, 2.5):
                assert propagator.mode_heat(p, 0.0, tau, r, 1.1) > 0.0

    def test_group_law(self):
        # K_nu(t1) o K_nu(t2) = K_nu(t1+t2) under radial quadrature
        p = params(1.0, 0.5)
        nu, t1, t2 = 0.5, 0.2, 0.3
        prof = lambda r: np.exp(-8.0 * (r - 1.2) ** 2)
        r_in = np.linspace(0.4, 2.0, 90)
        w_in = np.full_like(r_in, r_in[1] - r_in[0])
        r_mid, w_mid = np.linspace(1e-3, 30.0, 6000, retstep=True)

        def apply_kernel(t, r_out, r_src, w_src, fvals):
            y = np.outer(r_out, r_src) / (2.0 * abs(t))
            jv = specfun.bessel_j(nu, y.ravel()).reshape(y.shape)
            pfac = 1j * t
            ker = (np.exp(-(r_out[:, None] ** 2 + r_src[None, :] ** 2) / (4.0 * pfac))
                   / (2.0 * pfac) * np.exp(-1j * np.sign(t) * nu * math.pi / 2) * jv)
            return ker @ (fvals * r_src * w_src)

        u1 = apply_kernel(t1, r_mid, r_in, w_in, prof(r_in))
        u12 = apply_kernel(t2, r_in, r_mid, np.full_like(r_mid, w_mid), u1)
        direct = apply_kernel(t1 + t2, r_in, r_in, w_in, prof(r_in))
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(u12 - direct)) / scale < 1e-5

    def test_domain(self):
        with pytest.raises(DomainError):
            propagator.mode_kernel(params(1.0, 0.5), 0.5, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            propagator.mode_heat(params(1.0, 0.5), 0.5, -1.0, 1.0, 1.0)


class TestSeries:
    def test_free_reduction(self):
        p = params(1.0, 0.0)
        t = 0.7
        kv = propagator.schrodinger_series(p, SeriesTruncation(400), t, X, Y)
        d2 = X.r ** 2 + Y.r ** 2 - 2 * X.r * Y.r * math.cos(X.theta - Y.theta)
        want = np.exp(-d2 / (4j * t)) / (4j * math.pi * t)
        assert abs(kv.value - want) < 1e-8

    def test_regression_baseline(self):
        kv = propagator.schrodinger_series(params(1.0, 0.5), SeriesTruncation(400),
                                           0.7, X, Y)
        assert abs(kv.value - SERIES_BASELINE) < 1e-12

    def test_time_reversal(self):
        p = params(1.0, 0.5)
        k1 = propagator.schrodinger_series(p, SeriesTruncation(250), 0.7, X, Y).value
        k2 = propagator.schrodinger_series(p, SeriesTruncation(250), -0.7, Y, X).value
        assert abs(k1 - np.conj(k2)) < 1e-8

    def test_tail_doubling_stability(self):
        p = params(0.5, 0.6)
        a = propagator.schrodinger_series(p, SeriesTruncation(200), 0.5, X, Y).value
        b = propagator.schrodinger_series(p, SeriesTruncation(400), 0.5, X, Y).value
        assert abs(a - b) < 1e-10


class TestClosed:
    def test_free_reduction_exact_split(self):
        kv = propagator.schrodinger_closed(params(1.0, 0.0), BVariant.RESUMMED, 0.7, X, Y)
        assert kv.diffractive_part == 0j
        assert kv.value == kv.geometric_part

    @pytest.mark.parametrize("rho,alpha", [(1.0, 0.3), (1.0, 0.5), (2.0, 0.25), (0.5, 0.6)])
    def test_matches_series(self, rho, alpha):
        p = params(rho, alpha)
        for t in (0.7, -1.3):
            clo = propagator.schrodinger_closed(p, BVariant.RESUMMED, t, X, Y)
            ser = propagator.schrodinger_series(p, SeriesTruncation(300), t, X, Y)
            assert abs(clo.value - ser.value) < 1e-6

    def test_boundary_image_configuration(self):
        # theta = theta' at rho = 1/2 puts two images on |psi| = pi; the
        # half weights are adjudicated by the series oracle
        p = params(0.5, 0.6)
        x, y = ConePoint(1.1, 0.4), ConePoint(0.9, 0.4)
        clo = propagator.schrodinger_closed(p, BVariant.RESUMMED, 0.9, x, y)
        ser = propagator.schrodinger_series(p, SeriesTruncation(400), 0.9, x, y)
        assert abs(clo.value - ser.value) < 1e-6

    def test_flux_conjugation(self):
        k1 = propagator.schrodinger_closed(params(1.0, 0.5), BVariant.RESUMMED, 0.7, X, Y).value
        k2 = propagator.schrodinger_closed(params(1.0, -0.5), BVariant.RESUMMED, -0.7, X, Y).value
        assert abs(k1 - np.conj(k2)) < 1e-8

    def test_small_time_large_phase(self):
        # gamma ~ 450: the deformed contour keeps the integral resolvable
        p = params(1.0, 0.5)
        kv = propagator.schrodinger_closed(p, BVariant.RESUMMED, 0.01,
                                           ConePoint(3.0, 0.3), ConePoint(3.0, 2.1))
        assert abs(kv.value) * 0.01 < 1.0
        assert kv.abs_error_estimate < 1e-6

    def test_narrow_gap_warns(self):
        p = params(1.0, 0.96)
        with pytest.warns(UserWarning):
            propagator.schrodinger_closed(p, BVariant.RESUMMED, 0.5, X, Y)

    def test_tip_excluded(self):
        with pytest.raises(DomainError):
            propagator.schrodinger_closed(params(1.0, 0.5), BVariant.RESUMMED, 0.5,
                                          ConePoint(0.0, 0.1), Y)


class TestHeat:
    def test_free_reduction(self):
        p = params(1.0, 0.0)
        tau = 0.6
        got = propagator.heat_kernel(p, tau, X, Y)
        d2 = X.r ** 2 + Y.r ** 2 - 2 * X.r * Y.r * math.cos(X.theta - Y.theta)
        want = math.exp(-d2 / (4 * tau)) / (4 * math.pi * tau)
        assert abs(got - want) < 1e-10

    def test_positivity_wide_cone(self):
        p = params(2.0, 0.0)
        rng = np.random.default_rng(4)
        for _ in range(12):
            x = ConePoint(rng.uniform(0.2, 3.0), rng.uniform(0, p.circumference))
            y = ConePoint(rng.uniform(0.2, 3.0), rng.uniform(0, p.circumference))
            k = propagator.heat_kernel(p, rng.uniform(0.05, 5.0), x, y)
            assert k.real > 0 and abs(k.imag) < 1e-12 * k.real

    def test_diamagnetic_comparison(self):
        p0 = params(1.0, 0.0)
        ph = params(1.0, 0.5)
        rng = np.random.default_rng(5)
        for _ in range(12):
            x = ConePoint(rng.uniform(0.2, 3.0), rng.uniform(0, 2 * math.pi))
            y = ConePoint(rng.uniform(0.2, 3.0), rng.uniform(0, 2 * math.pi))
            tau = rng.uniform(0.05, 5.0)
            assert abs(propagator.heat_kernel(ph, tau, x, y)) \
                <= propagator.heat_kernel(p0, tau, x, y).real + 1e-12
