"""Resolvent boundary values, spectral measure, and frequency-localized
half-wave kernels.

The incoming/outgoing resolvents at energy lambda^2 are image sums of
order-zero Hankel functions plus a diffractive integral of the same Hankel
kernel against the B weight:

    R_+-(lambda; x, y) = (+-i/4) sum_j w_j A_j H0^(1|2)(lambda |m_j|)
                         -+ (i/(4 pi rho)) int_0^inf H0^(1|2)(lambda |n(s)|)
                                                     B(s) ds.

H0^(1) decays in the upper half plane and H0^(2) in the lower, so each
diffractive integral deforms to the matching side of the real s-axis (the
distance |n(s)| maps the strip to the correct half plane).  The spectral
density follows either from the resolvent jump (Stone's formula, factor
lambda/(pi i)) or in closed form through the incoming/outgoing split of
2 pi J0 delivered by :func:`fluxcone.specfun.hankel_split`; both reduce to

    density(lambda; x, y) = (lambda/2 pi) sum_j w_j A_j J0(lambda |m_j|)
                            - (lambda/(2 pi^2 rho)) int_0^inf
                              J0(lambda |n(s)|) B(s) ds,

whose eigenfunction-series oracle is
lambda sum_k phi_k(theta) conj(phi_k(theta')) J_nu_k(lambda r) J_nu_k(lambda r').

Dyadic frequency windows are the exact-partition normalization of a one-octave
bump: any profile supported in one octave, divided by its own dyadic
periodization, collapses to the indicator of the half-open octave
(2^{j-1}, 2^j].  The partition of unity is then exact everywhere, which is
what the band-sum identities and the localized dispersive scans rely on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import cone, propagator, quadrature, specfun
from .errors import DomainError

TWO_PI = 2.0 * math.pi


class ResolventSign(enum.Enum):
    """Boundary value side: INCOMING is the +i0 limit, OUTGOING the -i0 one."""

    INCOMING = +1
    OUTGOING = -1

    @property
    def conjugate(self) -> "ResolventSign":
        return ResolventSign.OUTGOING if self is ResolventSign.INCOMING else ResolventSign.INCOMING

    @property
    def hankel_kind(self) -> int:
        return 1 if self is ResolventSign.INCOMING else 2


@dataclass(frozen=True)
class SpectralSample:
    """Spectral-measure density at one frequency, with its part split."""

    lam: float
    density: complex
    geometric_part: complex
    diffractive_part: complex
    abs_error_estimate: float


def _check_offdiag(lam: float, x: cone.ConePoint, y: cone.ConePoint):
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if x.r * y.r <= 0:
        raise DomainError("kernel formulas exclude the cone tip: need r, r' > 0")


def resolvent_kernel(params: cone.ConeParams, sign: ResolventSign, lam: float,
                     x: cone.ConePoint, y: cone.ConePoint,
                     spec: quadrature.QuadratureSpec | None = None) -> complex:
    """Kernel of (H - (lambda^2 +- i0))^{-1} at distinct points."""
    _check_offdiag(lam, x, y)
    spec = spec or quadrature.DEFAULT_SPEC
    s = float(sign.value)
    kind = sign.hankel_kind

    images = cone.image_indices(params, x.theta, y.theta)
    geo = 0j
    for term in images:
        m = term.chordal(x.r, y.r)
        if m <= 0:
            raise DomainError("resolvent kernel is singular at coincident points")
        geo += term.weight * cone.a_factor(params, term.j, x.theta, y.theta) \
            * specfun.hankel0(lam * m, kind)
    geo = 0.25j * s * geo

    if params.alpha == 0.0 and abs(params.rho - 1.0) < 1e-15:
        return complex(geo)

    geom = cone.diffractive_geometry(params, x.theta, y.theta)
    gauge_pref = np.exp(-1j * ((x.theta - y.theta) * params.alpha
                               - params.gauge_integral(y.theta, x.theta)))

    def weight(sv):
        w = lam * geom.distance(x.r, y.r, sv)
        return np.asarray([specfun.hankel0(wi, kind) for wi in np.atleast_1d(w)]).reshape(np.shape(sv))

    # H0^(1) decays upward, H0^(2) downward
    ival, ierr, _, _ = propagator._diffractive_integral(
        params, cone.BVariant.RESUMMED, geom, weight, float(s), spec)
    diff = -0.25j * s / (math.pi * params.rho) * gauge_pref * ival
    return complex(geo + diff)


def resolvent_kernel_analytic(params: cone.ConeParams, zeta: complex,
                              x: cone.ConePoint, y: cone.ConePoint,
                              spec: quadrature.QuadratureSpec | None = None) -> complex:
    """Resolvent (H - zeta)^{-1} at a complex energy with Im zeta > 0.

    Uses sqrt(zeta) in the upper half plane, where H0^(1) decays on the real
    s-axis already; no contour deformation is needed.
    """
    if zeta.imag <= 0:
        raise DomainError("resolvent_kernel_analytic requires Im zeta > 0")
    _check_offdiag(1.0, x, y)
    spec = spec or quadrature.DEFAULT_SPEC
    lam = complex(np.sqrt(complex(zeta)))

    geo = 0j
    for term in cone.image_indices(params, x.theta, y.theta):
        m = term.chordal(x.r, y.r)
        if m <= 0:
            raise DomainError("resolvent kernel is singular at coincident points")
        geo += term.weight * cone.a_factor(params, term.j, x.theta, y.theta) \
            * specfun.hankel0(lam * m, 1)
    geo = 0.25j * geo

    if params.alpha == 0.0 and abs(params.rho - 1.0) < 1e-15:
        return complex(geo)

    geom = cone.diffractive_geometry(params, x.theta, y.theta)
    gauge_pref = np.exp(-1j * ((x.theta - y.theta) * params.alpha
                               - params.gauge_integral(y.theta, x.theta)))

    def f(sv):
        w = lam * geom.distance(x.r, y.r, sv)
        h = np.asarray([specfun.hankel0(wi, 1) for wi in np.atleast_1d(w)])
        b = cone._b_core(params.rho, params.alpha, geom.dth, np.atleast_1d(sv), cone.BVariant.RESUMMED)
        return (h * b).reshape(np.shape(sv)) if np.ndim(sv) else complex(h[0] * b[0])

    res = quadrature.integrate_decaying(f, 0.0, params.spectral_gap, spec)
    diff = -0.25j / (math.pi * params.rho) * gauge_pref * res.value
    return complex(geo + diff)


def spectral_measure_closed(params: cone.ConeParams, variant: cone.BVariant, lam: float,
                            x: cone.ConePoint, y: cone.ConePoint,
                            spec: quadrature.QuadratureSpec | None = None) -> SpectralSample:
    """Closed-form spectral density via the incoming/outgoing split."""
    _check_offdiag(lam, x, y)
    spec = spec or quadrature.DEFAULT_SPEC

    geo = 0j
    for term in cone.image_indices(params, x.theta, y.theta):
        m = term.chordal(x.r, y.r)
        geo += term.weight * cone.a_factor(params, term.j, x.theta, y.theta) \
            * specfun.bessel_j(0.0, lam * m)
    geo = complex(lam / TWO_PI * geo)

    if params.alpha == 0.0 and abs(params.rho - 1.0) < 1e-15:
        return SpectralSample(lam, geo, geo, 0j, 1e-15 * abs(geo))

    geom = cone.diffractive_geometry(params, x.theta, y.theta)
    gauge_pref = np.exp(-1j * ((x.theta - y.theta) * params.alpha
                               - params.gauge_integral(y.theta, x.theta)))

    total = 0j
    err = 0.0
    for kind, sgn in ((1, +1.0), (2, -1.0)):
        def weight(sv, kind=kind):
            w = lam * geom.distance(x.r, y.r, sv)
            return np.asarray([specfun.hankel0(wi, kind) for wi in np.atleast_1d(w)]).reshape(np.shape(sv))

        ival, ierr, _, _ = propagator._diffractive_integral(
            params, variant, geom, weight, sgn, spec)
        total += ival
        err += ierr
    diff = complex(-lam / (4.0 * math.pi ** 2 * params.rho) * gauge_pref * total)
    scale = lam / (4.0 * math.pi ** 2 * params.rho)
    return SpectralSample(lam, geo + diff, geo, diff, scale * err)


def spectral_density_series_batch(params: cone.ConeParams, lams, x: cone.ConePoint,
                                  y: cone.ConePoint,
                                  truncation: propagator.SeriesTruncation | None = None) -> np.ndarray:
    """Eigenfunction-series density on a vector of frequencies.

    Vectorized over lambda; the Bessel factors are evaluated per mode on the
    whole frequency grid at once.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(lams <= 0):
        raise DomainError("lambda must be positive")
    if truncation is None:
        zmax = float(np.max(lams)) * max(x.r, y.r)
        nu_max = zmax + 10.0 * zmax ** (1.0 / 3.0) + 20.0
        truncation = propagator.SeriesTruncation(
            k_max=min(4000, int(math.ceil(params.rho * nu_max)) + 2))
    total = np.zeros_like(lams, dtype=complex)
    for k in range(-truncation.k_max, truncation.k_max + 1):
        nu = cone.eigen_nu(params, k)
        ph = cone.mode_phase_product(params, k, x.theta, y.theta)
        total += ph * specfun.bessel_j(nu, lams * x.r) * specfun.bessel_j(nu, lams * y.r)
    return lams * total


def spectral_measure_series(params: cone.ConeParams, truncation: propagator.SeriesTruncation,
                            lam: float, x: cone.ConePoint, y: cone.ConePoint) -> SpectralSample:
    """Series spectral density at one frequency; the oracle for the closed form."""
    _check_offdiag(lam, x, y)
    density = complex(spectral_density_series_batch(params, [lam], x, y, truncation)[0])
    # tail estimate: last terms of the mode sum
    kst = truncation.k_max
    tail = 0.0
    for k in (kst - 1, kst, -kst + 1, -kst):
        nu = cone.eigen_nu(params, k)
        tail += abs(cone.mode_phase_product(params, k, x.theta, y.theta)) \
            * abs(specfun.bessel_j(nu, lam * x.r) * specfun.bessel_j(nu, lam * y.r))
    return SpectralSample(lam, density, density, 0j, lam * tail * 5.0)


# ---------------------------------------------------------------------------
# dyadic frequency windows
# ---------------------------------------------------------------------------

def dyadic_bump(lam) -> np.ndarray:
    """Base window profile: indicator of the half-open octave (1/2, 1].

    This is the exact-partition normalization b/periodization(b) of any bump b
    positive inside one octave; the normalization forces the indicator, and in
    exchange sum_j profile(2^{-j} lam) = 1 exactly for every lam > 0.
    """
    la = np.asarray(lam, dtype=float)
    return ((la > 0.5) & (la <= 1.0)).astype(float)


@dataclass(frozen=True)
class LPWindow:
    """Dyadic frequency window j, supported on (2^{j-1}, 2^j]."""

    j: int

    def profile(self, lam):
        return dyadic_bump(lam)

    def value(self, lam):
        return dyadic_bump(np.asarray(lam, dtype=float) * 2.0 ** (-self.j))

    @property
    def band(self) -> tuple[float, float]:
        return (2.0 ** (self.j - 1), 2.0 ** self.j)


def partition_of_unity(windows, lams) -> np.ndarray:
    """sum over the given windows of their values on lams."""
    lams = np.asarray(lams, dtype=float)
    total = np.zeros_like(lams)
    for w in windows:
        total += w.value(lams)
    return total


def wave_localized_kernel(params: cone.ConeParams, window: LPWindow, t: float,
                          x: cone.ConePoint, y: cone.ConePoint,
                          spec: quadrature.QuadratureSpec | None = None,
                          route: str = "series",
                          truncation: propagator.SeriesTruncation | None = None) -> complex:
    """Band-localized half-wave kernel
    int e^{i t lambda} window(lambda) density(lambda; x, y) d lambda."""
    if x.r * y.r <= 0:
        raise DomainError("need r, r' > 0")
    spec = spec or quadrature.DEFAULT_SPEC
    a, b = window.band
    if route == "series":
        def f(lams):
            dens = spectral_density_series_batch(params, lams, x, y, truncation)
            return np.exp(1j * t * lams) * dens
    elif route == "closed":
        def f(lams):
            vals = [spectral_measure_closed(params, cone.BVariant.RESUMMED, la, x, y, spec).density
                    for la in np.atleast_1d(lams)]
            return np.exp(1j * t * np.asarray(lams)) * np.asarray(vals)
    else:
        raise DomainError(f"unknown route {route!r}")
    res = quadrature.integrate_finite(f, a, b, spec)
    return complex(res.value)


def wave_localized_batch(params: cone.ConeParams, window: LPWindow, ts,
                         x: cone.ConePoint, y: cone.ConePoint,
                         truncation: propagator.SeriesTruncation | None = None) -> np.ndarray:
    """Band kernel on a whole grid of times at once.

    The series density is evaluated on a fixed composite Gauss grid over the
    band (the density does not depend on t), then every time is a weighted
    exponential sum over the same nodes.  Panel count tracks the largest
    phase t*lambda across the requested times.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    a, b = window.band
    d_max = x.r + y.r
    tmax = float(np.max(np.abs(ts))) if ts.size else 0.0
    panels = max(16, int(math.ceil((b - a) * (tmax + d_max) / 2.5)))
    nodes, weights = np.polynomial.legendre.leggauss(10)
    edges = np.linspace(a, b, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    lam_grid = (mids[:, None] + half * nodes[None, :]).ravel()
    w_grid = np.tile(half * weights, panels)
    dens = spectral_density_series_batch(params, lam_grid, x, y, truncation)
    phases = np.exp(1j * np.outer(ts, lam_grid))
    return phases @ (w_grid * dens)
