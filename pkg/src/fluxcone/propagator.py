"""Time-evolution kernels: per-mode radial kernel, full propagator by
eigenfunction series and by closed form, and the heat kernel.

Conventions
-----------
The propagator computed here is the kernel of exp(-i t H) for the magnetic
operator H on the cone: its per-mode radial factor is

    K_nu(t, r, r') = int_0^inf e^{-i t sigma^2} J_nu(r sigma) J_nu(r' sigma)
                     sigma d sigma
                   = e^{-(r^2+r'^2)/(4 i t)} / (2 i t) * I_nu(r r'/(2 i t)),

the (regularization) limit of the second exponential integral of the Bessel
product.  The modified Bessel function is entire, so the limit is evaluated
directly; the regularized quadrature route in :mod:`fluxcone.quadrature`
serves as the independent oracle.

The closed form splits the full kernel into a weighted sum over angular
images plus a diffractive integral of the B weight against
e^{(r r'/(2 i t)) cosh s}.  On the real s-axis that factor has modulus one
and its phase grows like e^s, so the integral is evaluated on a rectangular
contour (a short vertical leg, then a horizontal ray at imaginary offset
tau0) where the factor decays superexponentially.  tau0 stays below half the
nearest pole height of B; equality of the deformed and real-axis integrals is
Cauchy's theorem plus the decay of B in the strip.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import cone, quadrature, specfun
from .errors import AccuracyError, DomainError

FOUR_PI = 4.0 * math.pi

NARROW_GAP_WARNING = 0.05


@dataclass(frozen=True)
class KernelValue:
    """Kernel value with its geometric/diffractive split and error estimate."""

    value: complex
    geometric_part: complex
    diffractive_part: complex
    abs_error_estimate: float

    def __post_init__(self):
        gap = abs(self.value - (self.geometric_part + self.diffractive_part))
        if gap > max(self.abs_error_estimate, 1e-12 * (1.0 + abs(self.value))):
            raise DomainError("kernel parts do not sum to the value")


@dataclass(frozen=True)
class SeriesTruncation:
    """Angular truncation |k| <= k_max and the requested tail ceiling."""

    k_max: int = 400
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.k_max < 0:
            raise DomainError("k_max must be >= 0")
        if self.tail_bound < 0:
            raise DomainError("tail_bound must be >= 0")


def suggested_truncation(params: cone.ConeParams, t: float, r: float, r_p: float) -> SeriesTruncation:
    """Truncation adequate for |I_nu(z)| decay at z = r r'/(2|t|)."""
    zmag = r * r_p / (2.0 * abs(t))
    nu_max = zmag + 12.0 * zmag ** (1.0 / 3.0) + 25.0
    return SeriesTruncation(k_max=min(4000, int(math.ceil(params.rho * nu_max)) + 2))


def _check_point_pair(t_or_tau: float, x: cone.ConePoint, y: cone.ConePoint, label: str):
    if t_or_tau == 0:
        raise DomainError(f"{label} must be nonzero")
    if x.r * y.r <= 0:
        raise DomainError("kernel formulas exclude the cone tip: need r, r' > 0")


def mode_kernel(params: cone.ConeParams, nu: float, t: float, r: float, r_p: float,
                spec: quadrature.QuadratureSpec | None = None) -> complex:
    """Radial kernel of exp(-i t H) restricted to one angular mode."""
    if t == 0:
        raise DomainError("t must be nonzero")
    if r <= 0 or r_p <= 0:
        raise DomainError("need r, r' > 0")
    p = 1j * t
    z = r * r_p / (2.0 * p)
    return complex(np.exp(-(r * r + r_p * r_p) / (4.0 * p)) / (2.0 * p) * specfun.bessel_i(nu, z))


def mode_heat(params: cone.ConeParams, nu: float, tau: float, r: float, r_p: float) -> float:
    """Heat variant of the mode kernel (t = -i tau, tau > 0); real positive."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    if r <= 0 or r_p <= 0:
        raise DomainError("need r, r' > 0")
    z = r * r_p / (2.0 * tau)
    return math.exp(-(r - r_p) ** 2 / (4.0 * tau)) / (2.0 * tau) * specfun.bessel_i_scaled(nu, z)


def _series_sum(params, truncation, term_fn):
    """Sum term_fn(k) over |k| <= k_max with a geometric tail fit."""
    kmax = truncation.k_max
    total = 0j
    mags = {}
    for k in range(-kmax, kmax + 1):
        val = term_fn(k)
        total += val
        if abs(k) >= kmax - 5:
            mags[k] = abs(val)
    top = [mags[k] for k in range(kmax - 5, kmax + 1)]
    bot = [mags[-k] for k in range(kmax - 5, kmax + 1)]
    tail = 0.0
    for side in (top, bot):
        if side[-1] == 0.0:
            continue
        if side[0] == 0.0 or side[-1] >= side[0]:
            raise AccuracyError(
                f"series tail is not decaying at k_max={kmax}", best=total)
        q = (side[-1] / side[0]) ** (1.0 / (len(side) - 1))
        tail += side[-1] * q / (1.0 - q)
    return total, tail


def schrodinger_series(params: cone.ConeParams, truncation: SeriesTruncation,
                       t: float, x: cone.ConePoint, y: cone.ConePoint,
                       spec: quadrature.QuadratureSpec | None = None) -> KernelValue:
    """Eigenfunction-series propagator; the oracle for the closed form."""
    _check_point_pair(t, x, y, "t")
    p = 1j * t
    z = x.r * y.r / (2.0 * p)
    pref = np.exp(-(x.r ** 2 + y.r ** 2) / (4.0 * p)) / (2.0 * p)

    def term(k):
        nu = cone.eigen_nu(params, k)
        return cone.mode_phase_product(params, k, x.theta, y.theta) * specfun.bessel_i(nu, z)

    total, tail = _series_sum(params, truncation, term)
    value = complex(pref * total)
    err = abs(pref) * tail
    if truncation.tail_bound and err > truncation.tail_bound:
        raise AccuracyError("series tail exceeds the requested bound", best=value,
                            error_estimate=err)
    return KernelValue(value, value, 0j, err)


def _contour_tau0(geom: cone.DiffractiveGeometry) -> float:
    return min(0.75, 0.5 * geom.pole_heights()[0])


def _diffractive_integral(params, variant, geom, weight_fn, sgn, spec,
                          extra_rate: float = 0.0):
    """int_0^inf weight_fn(s) B(s) ds on the rectangular contour rotated to
    the side sgn = +-1.  weight_fn must decay (or stay bounded) on that side;
    B supplies the guaranteed rate spectral_gap + extra_rate."""
    gap = params.spectral_gap
    if 0 < gap < NARROW_GAP_WARNING:
        warnings.warn(
            f"spectral gap 1/rho-|alpha|={gap:.3g} is small; the diffractive "
            "truncation point grows like 1/gap", stacklevel=3)
    tau0 = _contour_tau0(geom)
    dth = geom.dth

    def b_at(s):
        return cone._b_core(params.rho, params.alpha, dth, s, variant)

    res_v = quadrature.integrate_finite(
        lambda u: 1j * sgn * weight_fn(1j * sgn * u) * b_at(1j * sgn * u),
        0.0, tau0, spec)
    res_h = quadrature.integrate_decaying(
        lambda sig: weight_fn(sig + 1j * sgn * tau0) * b_at(sig + 1j * sgn * tau0),
        0.0, gap + extra_rate, spec)
    value = res_v.value + res_h.value
    err = res_v.abs_error_estimate + res_h.abs_error_estimate
    evals = res_v.evaluations + res_h.evaluations
    return value, err, evals, res_v.converged and res_h.converged


def schrodinger_closed(params: cone.ConeParams, variant: cone.BVariant,
                       t: float, x: cone.ConePoint, y: cone.ConePoint,
                       spec: quadrature.QuadratureSpec | None = None) -> KernelValue:
    """Closed-form propagator: weighted image sum plus diffractive integral."""
    _check_point_pair(t, x, y, "t")
    spec = spec or quadrature.DEFAULT_SPEC
    r, r_p = x.r, y.r
    p = 1j * t
    pref = np.exp(-(r * r + r_p * r_p) / (4.0 * p)) / p

    geo = 0j
    for term in cone.image_indices(params, x.theta, y.theta):
        geo += term.weight * cone.a_factor(params, term.j, x.theta, y.theta) \
            * np.exp((r * r_p / (2.0 * p)) * math.cos(term.psi))
    geo = complex(pref / FOUR_PI * geo)

    if params.alpha == 0.0 and abs(params.rho - 1.0) < 1e-15:
        # free reduction: the diffractive weight vanishes identically
        return KernelValue(geo, geo, 0j, 1e-15 * abs(geo))

    gamma = r * r_p / (2.0 * t)
    geom = cone.diffractive_geometry(params, x.theta, y.theta)
    gauge_pref = np.exp(-1j * ((x.theta - y.theta) * params.alpha
                               - params.gauge_integral(y.theta, x.theta)))

    def osc(s):
        return np.exp(1j * gamma * np.cosh(s))

    ival, ierr, _, ok = _diffractive_integral(
        params, variant, geom, osc, 1.0 if gamma > 0 else -1.0, spec)
    scale = abs(pref) / (FOUR_PI * math.pi * params.rho)
    diff = complex(-pref / (FOUR_PI * math.pi * params.rho) * gauge_pref * ival)
    err = scale * ierr
    if not ok:
        err = max(err, abs(diff) * 1e-3)
    return KernelValue(geo + diff, geo, diff, err + 1e-15 * abs(geo))


def heat_kernel(params: cone.ConeParams, tau: float, x: cone.ConePoint, y: cone.ConePoint,
                spec: quadrature.QuadratureSpec | None = None) -> complex:
    """Heat semigroup kernel exp(-tau H)(x, y) by eigenfunction series."""
    _check_point_pair(tau, x, y, "tau")
    if tau <= 0:
        raise DomainError("tau must be positive")
    z = x.r * y.r / (2.0 * tau)
    nu_max = max(math.sqrt(80.0 * z), 8.0) + 12.0
    kmax = int(math.ceil(params.rho * nu_max)) + 2
    gaussian = math.exp(-(x.r - y.r) ** 2 / (4.0 * tau)) / (2.0 * tau)

    def term(k):
        nu = cone.eigen_nu(params, k)
        return cone.mode_phase_product(params, k, x.theta, y.theta) \
            * specfun.bessel_i_scaled(nu, z)

    total, tail = _series_sum(params, SeriesTruncation(k_max=kmax), term)
    return complex(gaussian * total)
