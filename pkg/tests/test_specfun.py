"""Special-function tests: closed forms, independent oracles, branch overlap."""

import math

import numpy as np
import pytest

from fluxcone import specfun
from fluxcone.errors import AccuracyError, DomainError


def series_j_oracle(nu, x, term_tol=1e-14):
    """Independent ascending-series sum, terminated at term size term_tol."""
    lead = math.exp(nu * math.log(x / 2.0) - math.lgamma(nu + 1.0)) if x > 0 else (1.0 if nu == 0 else 0.0)
    q = -(x / 2.0) ** 2
    term, total = 1.0, 1.0
    m = 0
    while abs(term) > term_tol:
        m += 1
        term *= q / (m * (nu + m))
        total += term
    return lead * total


def series_y0_oracle(x):
    j0 = series_j_oracle(0.0, x)
    q = -(x / 2.0) ** 2
    term, total, h = 1.0, 0.0, 0.0
    for m in range(1, 200):
        term *= q / (m * m)
        h += 1.0 / m
        total += -term * h
        if abs(term) < 1e-18:
            break
    gamma = 0.5772156649015328606
    return (2.0 / math.pi) * ((math.log(x / 2.0) + gamma) * j0 + total)


def quadrature_i_oracle(nu, z, n=60001, tmax=None):
    """Direct dense-trapezoid quadrature of the two-integral representation.

    Feasible when Re z is large enough that the cosh factor damps the second
    integral before its phase gets out of hand.
    """
    s = np.linspace(0.0, math.pi, n)
    first = np.trapezoid(np.exp(z * np.cos(s)) * np.cos(nu * s), s) / math.pi
    if tmax is None:
        tmax = math.acosh(45.0 / z.real) if z.real > 1 else 12.0
    t = np.linspace(0.0, tmax, n)
    second = np.trapezoid(np.exp(-z * np.cosh(t) - nu * t), t)
    return first - math.sin(nu * math.pi) / math.pi * second


class TestBesselJ:
    def test_at_zero(self):
        assert specfun.bessel_j(0, 0.0) == 1.0
        assert specfun.bessel_j(0.4, 0.0) == 0.0

    def test_half_order_at_pi(self):
        assert abs(specfun.bessel_j(0.5, math.pi)) < 1e-14

    def test_series_oracle(self):
        got = specfun.bessel_j(0.75, 2.0)
        assert got == pytest.approx(series_j_oracle(0.75, 2.0), abs=1e-13)

    @pytest.mark.parametrize("nu", [0.5])
    def test_half_order_closed_form(self, nu):
        x = np.geomspace(1e-3, 50.0, 120)
        want = np.sqrt(2.0 / (math.pi * x)) * np.sin(x)
        got = specfun.bessel_j(nu, x)
        assert np.max(np.abs(got - want)) < 1e-10

    @pytest.mark.parametrize("nu", [0.0, 0.6, 3.2])
    def test_branch_overlap(self, nu):
        # agreement to 10x the default accuracy target on the switch band
        x = np.linspace(10.0, 14.0, 9)
        ser = specfun.bessel_j(nu, x, method="series")
        quad = specfun.bessel_j(nu, x, method="integral")
        assert np.max(np.abs(ser - quad)) < 10 * specfun.DEFAULT_ACCURACY.abs_tol

    @pytest.mark.parametrize("nu,x", [(1.0, 0.3), (1.0, 7.0), (1.3, 20.0),
                                      (2.6, 44.0), (5.5, 13.0)])
    def test_recurrence(self, nu, x):
        lhs = specfun.bessel_j(nu - 1, x) + specfun.bessel_j(nu + 1, x)
        rhs = 2.0 * nu / x * specfun.bessel_j(nu, x)
        assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_large_argument_order_zero(self):
        # Hankel asymptotic branch against a frozen high-precision value
        assert specfun.bessel_j(0, 18.5) == pytest.approx(
            0.077164821422554699, abs=1e-13)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            specfun.bessel_j(-1.0, 1.0)
        with pytest.raises(DomainError):
            specfun.bessel_j(0.5, -1.0)
        with pytest.raises(DomainError):
            specfun.bessel_j(0.5, math.nan)

    def test_accuracy_error_carries_best(self):
        with pytest.raises(AccuracyError) as err:
            specfun.bessel_j(0.3, 9.0, acc=specfun.SpecFunAccuracy(max_terms=3))
        assert err.value.best is not None


class TestBesselI:
    def test_at_zero(self):
        assert specfun.bessel_i(0, 0) == 1.0 + 0j
        assert specfun.bessel_i(1.2, 0) == 0j

    def test_half_order(self):
        want = math.sqrt(2.0 / math.pi) * math.sinh(1.0)
        assert specfun.bessel_i(0.5, 1.0).real == pytest.approx(want, abs=1e-13)
        x = np.geomspace(1e-3, 50.0, 40)
        for xx in x:
            want = math.sqrt(2.0 / (math.pi * xx)) * math.sinh(xx)
            assert abs(specfun.bessel_i(0.5, xx) - want) < 1e-10 * max(1.0, want)

    def test_pure_imaginary_argument(self):
        # frozen high-precision oracle value for I_{0.3}(2i)
        want = 0.379296186533687079 + 0.193261059935099625j
        assert abs(specfun.bessel_i(0.3, 2j) - want) < 1e-13

    def test_quadrature_oracle_moderate(self):
        z = 1.5 + 2.5j
        got = specfun.bessel_i(0.3, z)
        assert abs(got - quadrature_i_oracle(0.3, z, tmax=12.0)) < 1e-9

    def test_quadrature_oracle_large_real(self):
        z = complex(16.0, 3.0)
        got = specfun.bessel_i(0.45, z)  # integral branch
        ser = specfun.bessel_i(0.45, z, method="series")
        assert abs(got - ser) / abs(ser) < 1e-12

    def test_branch_overlap_band(self):
        tol = 10 * specfun.DEFAULT_ACCURACY.abs_tol
        for mag in (10.0, 12.0, 14.0):
            for ang in (0.0, 0.4, 1.2, 1.5707):
                z = mag * complex(math.cos(ang), math.sin(ang))
                a = specfun.bessel_i(0.7, z, method="series")
                b = specfun.bessel_i(0.7, z, method="integral")
                assert abs(a - b) < tol * max(1.0, abs(a)), (mag, ang)

    def test_reflection(self):
        # I_nu(-z) via the principal-branch phase factor
        want = -229.658404022979157 + 236.282923001439008j  # I_1.3(8+9i)
        got = specfun.bessel_i(1.3, 8 + 9j)
        assert abs(got - want) / abs(want) < 1e-12
        got_neg = specfun.bessel_i(1.3, -8 - 9j)
        phase = np.exp(-1j * 1.3 * math.pi)
        assert abs(got_neg - phase * got) / abs(got) < 1e-12

    def test_scaled_variant(self):
        # e^{-x} I_nu(x), checked against the series at moderate x and
        # used far beyond overflow range
        x = 9.0
        want = specfun.bessel_i(0.8, x).real * math.exp(-x)
        assert specfun.bessel_i_scaled(0.8, x) == pytest.approx(want, rel=1e-12)
        big = specfun.bessel_i_scaled(0.6, 450.0)
        assert 0 < big < 1.0 and math.isfinite(big)


class TestHankel:
    def test_split_reconstruction(self):
        r = np.array([0.5, 1.0, 5.0, 20.0])
        ap, am = specfun.hankel_split(r)
        recon = ap * np.exp(1j * r) + am * np.exp(-1j * r)
        assert np.max(np.abs(recon - 2 * math.pi * specfun.bessel_j(0, r))) < 1e-10

    def test_split_against_oracle(self):
        want = math.pi * complex(series_j_oracle(0.0, 1.0), series_y0_oracle(1.0)) \
            * np.exp(-1j)
        ap, _ = specfun.hankel_split(1.0)
        assert abs(ap - want) < 1e-12

    def test_decay_envelope(self):
        r = np.geomspace(1.0, 100.0, 400)
        ap, am = specfun.hankel_split(r)
        sup = float(np.max(np.sqrt(r) * np.abs(ap)))
        envelope = math.pi * math.sqrt(2.0 / math.pi)
        assert sup <= envelope * 1.05
        assert sup >= envelope * 0.9
        assert np.allclose(np.abs(ap), np.abs(am))

    def test_wronskian_by_finite_differences(self):
        h = 1e-5
        for r in (0.7, 2.3, 8.0, 19.0):
            j0 = specfun.bessel_j(0, np.array([r - h, r, r + h]))
            y0 = specfun.bessel_y0(np.array([r - h, r, r + h]))
            jp = (j0[2] - j0[0]) / (2 * h)
            yp = (y0[2] - y0[0]) / (2 * h)
            assert j0[1] * yp - jp * y0[1] == pytest.approx(2.0 / (math.pi * r), abs=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.hankel_split(0.0)
        with pytest.raises(DomainError):
            specfun.hankel_split(-2.0)

    def test_hankel0_complex(self):
        # frozen oracle: H0^(1)(3+4i)
        want = -0.00106665287467913 + 0.00632179175797873j
        assert abs(specfun.hankel0(3 + 4j, 1) - want) / abs(want) < 1e-11
        w = 20 + 5j
        h1 = specfun.hankel0(w, 1)
        h2 = specfun.hankel0(np.conj(w), 2)
        assert abs(h1 - np.conj(h2)) < 1e-14
        with pytest.raises(DomainError):
            specfun.hankel0(20 - 5j, 1)  # wrong half plane for the asymptotics
