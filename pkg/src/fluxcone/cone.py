"""Cone geometry, flux data, eigenbasis, and the closed-form kernel blocks.

The surface is the product cone (0, inf) x R/(2 pi rho Z) with metric
dr^2 + r^2 dtheta^2.  A magnetic potential A(theta) with mean alpha twists the
angular eigenbasis; only the mean (the flux) enters moduli of kernels, the
rest is a unimodular gauge factor.

Two closed-form blocks feed every kernel:

* the image/interference factor ``a_factor`` attached to each admissible
  angular image, and
* the diffractive weight ``b_kernel`` integrated against cosh-type
  exponentials.

``b_kernel`` is implemented in a grouped form (sinh/cosh in s times real
fraction pairs) that is stable near s = 0 and analytic in s, so kernel
integrals may deform the contour off the real axis.  Its poles sit on the
imaginary s-axis at heights ``DiffractiveGeometry.pole_heights``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def _cexpm1(z):
    """expm1 for complex arrays, stable near 0."""
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        return np.expm1(z.astype(float))
    a, b = z.real, z.imag
    return np.expm1(a) * np.cos(b) - 2.0 * np.sin(b / 2.0) ** 2 + 1j * np.exp(a) * np.sin(b)


@dataclass(frozen=True)
class FourierGauge:
    """Periodic angular potential with prescribed mean and exact antiderivative.

    A(theta) = mean + sum_m [cos_amps[m-1] cos(m theta/rho)
                             + sin_amps[m-1] sin(m theta/rho)]

    The harmonics are zero-mean over the circle of circumference 2 pi rho, so
    ``mean`` is the flux.
    """

    rho: float
    mean: float
    cos_amps: tuple = ()
    sin_amps: tuple = ()

    def value(self, theta):
        out = np.full_like(np.asarray(theta, dtype=float), self.mean)
        for m, a in enumerate(self.cos_amps, start=1):
            out = out + a * np.cos(m * np.asarray(theta) / self.rho)
        for m, b in enumerate(self.sin_amps, start=1):
            out = out + b * np.sin(m * np.asarray(theta) / self.rho)
        return out

    def integral(self, theta0: float, theta1: float) -> float:
        """int_{theta0}^{theta1} A, exact."""
        total = self.mean * (theta1 - theta0)
        for m, a in enumerate(self.cos_amps, start=1):
            total += a * self.rho / m * (math.sin(m * theta1 / self.rho) - math.sin(m * theta0 / self.rho))
        for m, b in enumerate(self.sin_amps, start=1):
            total -= b * self.rho / m * (math.cos(m * theta1 / self.rho) - math.cos(m * theta0 / self.rho))
        return total


@dataclass(frozen=True)
class ConeParams:
    """Cone radius, flux, and gauge potential.

    alpha = 0 is accepted only as the baseline (free cone) reduction; the
    twisted problem requires 0 < |alpha| < 1/rho.
    """

    rho: float
    alpha: float
    gauge: FourierGauge | None = None

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise DomainError(f"rho must be positive and finite, got {self.rho}")
        if not math.isfinite(self.alpha):
            raise DomainError("alpha must be finite")
        if self.alpha != 0.0 and abs(self.alpha) >= 1.0 / self.rho:
            raise DomainError(
                f"flux alpha={self.alpha} outside (-1/rho, 1/rho) = "
                f"(-{1.0 / self.rho:g}, {1.0 / self.rho:g}); the spectral gap "
                "1/rho - |alpha| must be positive"
            )
        if self.gauge is None:
            object.__setattr__(self, "gauge", FourierGauge(self.rho, self.alpha))
        else:
            if abs(self.gauge.rho - self.rho) > 1e-12:
                raise DomainError("gauge periodicity does not match the cone radius")
            if abs(self.gauge.mean - self.alpha) > 1e-10:
                raise DomainError("gauge mean must equal the flux alpha")
        if self.rho < 1.0:
            warnings.warn(
                f"rho={self.rho} < 1: accepted, but the closed-to-series "
                "comparisons are the only guarantee here",
                stacklevel=2,
            )

    @property
    def circumference(self) -> float:
        return TWO_PI * self.rho

    @property
    def spectral_gap(self) -> float:
        """Gap 1/rho - |alpha|; decay rate of the resummed bracket terms."""
        return 1.0 / self.rho - abs(self.alpha)

    @property
    def b_decay_rate(self) -> float:
        """Guaranteed envelope rate of the diffractive weight.

        The flux term decays at |alpha|, the bracket terms at the spectral
        gap; the envelope is the slower of the two (1/rho for zero flux,
        where the flux term is absent).
        """
        if self.alpha == 0.0:
            return 1.0 / self.rho
        return min(abs(self.alpha), self.spectral_gap)

    def reduce_angle(self, theta: float) -> float:
        return theta % self.circumference

    def gauge_integral(self, theta0: float, theta1: float) -> float:
        return self.gauge.integral(theta0, theta1)


@dataclass(frozen=True)
class ConePoint:
    """Point (r, theta) on the cone; theta is kept as given (all kernel
    formulas are 2 pi rho periodic)."""

    r: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise DomainError("r must be finite and >= 0")
        if not math.isfinite(self.theta):
            raise DomainError("theta must be finite")


def eigen_nu(params: ConeParams, k: int) -> float:
    """Angular eigenvalue nu_k = |k/rho + alpha|."""
    return abs(k / params.rho + params.alpha)


@dataclass(frozen=True)
class AngularMode:
    """Mode index, eigenvalue, and the unit-norm angular eigenfunction."""

    params: ConeParams
    k: int
    nu: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nu", eigen_nu(self.params, self.k))

    def eigenfunction(self, theta):
        p = self.params
        freq = self.k / p.rho + p.alpha
        gauge_part = np.vectorize(lambda th: p.gauge_integral(0.0, th))(theta)
        return np.exp(-1j * (np.asarray(theta) * freq - gauge_part)) / math.sqrt(p.circumference)


def mode_phase_product(params: ConeParams, k: int, theta: float, theta_p: float) -> complex:
    """phi_k(theta) * conj(phi_k(theta')), the angular weight of mode k."""
    dth = theta - theta_p
    freq = k / params.rho + params.alpha
    return np.exp(-1j * (dth * freq - params.gauge_integral(theta_p, theta))) / params.circumference


@dataclass(frozen=True)
class ImageTerm:
    """One admissible angular image: index, endpoint weight, unfolded angle."""

    j: int
    weight: float
    psi: float

    def chordal(self, r: float, r_p: float) -> float:
        """|m_j| = sqrt(r^2 + r'^2 - 2 r r' cos psi_j)."""
        c = r * r + r_p * r_p - 2.0 * r * r_p * math.cos(self.psi)
        return math.sqrt(max(c, 0.0))


BOUNDARY_TOL = 1e-9


def image_indices(params: ConeParams, theta: float, theta_p: float,
                  tol: float = BOUNDARY_TOL) -> list[ImageTerm]:
    """All j with |theta - theta' + 2 j rho pi| <= pi.

    Angles landing on the boundary |psi| = pi (within ``tol``) carry weight
    1/2: they sit at an endpoint of the angular folding and are shared with
    the diffractive term.  The list may be empty for wide cones (rho > 1)
    when the angular separation exceeds pi both ways.
    """
    dth = theta - theta_p
    step = TWO_PI * params.rho
    jlo = math.ceil((-math.pi - dth) / step - 1)
    jhi = math.floor((math.pi - dth) / step + 1)
    out = []
    for j in range(jlo, jhi + 1):
        psi = dth + j * step
        if abs(psi) <= math.pi + tol:
            weight = 0.5 if abs(abs(psi) - math.pi) <= tol else 1.0
            out.append(ImageTerm(j, weight, psi))
    return out


def a_factor(params: ConeParams, j: int, theta: float, theta_p: float) -> complex:
    """Unimodular interference factor of image j:
    exp(i int_{theta'}^{theta} A) * exp(i alpha 2 j rho pi)."""
    return np.exp(1j * (params.gauge_integral(theta_p, theta)
                        + params.alpha * j * TWO_PI * params.rho))


class BVariant(enum.Enum):
    """Sign convention of the sin(phi_2) numerators in the diffractive weight.

    RESUMMED applies the geometric-series numerator uniformly to both angles;
    it reproduces the eigenfunction-series oracle and vanishes identically in
    the free reduction.  ALTERNATE flips the sign of the sin(phi_2) terms;
    the two disagree whenever sin(phi_2) != 0 and ALTERNATE is retained only
    so the discrepancy can be demonstrated.
    """

    RESUMMED = "resummed"
    ALTERNATE = "alternate"


@dataclass(frozen=True)
class DiffractiveGeometry:
    """Angles and distances entering the diffractive integral."""

    rho: float
    dth: float
    phi1: float = field(init=False)
    phi2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "phi1", (math.pi - self.dth) / self.rho)
        object.__setattr__(self, "phi2", (-math.pi - self.dth) / self.rho)

    def distance(self, r: float, r_p: float, s):
        """|n(s)| = sqrt(r^2 + r'^2 + 2 r r' cosh s); principal branch for
        complex s (upper half maps to upper half)."""
        val = r * r + r_p * r_p + 2.0 * r * r_p * np.cosh(s)
        if np.iscomplexobj(np.asarray(s)):
            return np.sqrt(val.astype(complex))
        return np.sqrt(val)

    def pole_heights(self) -> list[float]:
        """Positive heights of the diffractive weight's imaginary-axis poles.

        The weight is singular where cosh(s/rho) = cos(phi_i), i.e. at
        s = i rho (+-phi_i + 2 pi m).  A height of exactly zero is removable
        and excluded.
        """
        heights = []
        for phi in (self.phi1, self.phi2):
            h = abs(phi - TWO_PI * round(phi / TWO_PI))
            if h > 1e-9:
                heights.append(self.rho * h)
            heights.append(self.rho * (TWO_PI - h))
        return sorted(heights)


def diffractive_geometry(params: ConeParams, theta: float, theta_p: float) -> DiffractiveGeometry:
    return DiffractiveGeometry(params.rho, theta - theta_p)


def _b_core(rho: float, alpha: float, dth: float, s, variant: BVariant):
    """Diffractive weight without the gauge prefactor, vectorized over s.

    s may be real (including 0) or complex; the formula is the analytic
    continuation of the angular resummation
    sum_k e^{-i k dth/rho} sin(nu_k pi) e^{-s nu_k}.
    """
    s = np.asarray(s)
    complex_path = np.iscomplexobj(s)
    sigma = s / rho
    eip = np.exp(1j * alpha * math.pi)
    eim = np.conj(eip)
    out = math.sin(abs(alpha) * math.pi) * np.exp(-abs(alpha) * s)

    sh2 = np.sinh(sigma / 2.0)
    base = 2.0 * sh2 * sh2

    def pieces(phi, flip):
        # reduce mod 2 pi so boundary angles give exact zeros, not 1e-16 junk
        phm = phi - TWO_PI * round(phi / TWO_PI)
        sin_half_sq = 2.0 * math.sin(phm / 2.0) ** 2
        D = base + sin_half_sq
        num = -_cexpm1(-sigma) - sin_half_sq
        if phm == 0.0:
            # removable 0/0 at s = 0: sinh(s alpha) * R -> 2 rho alpha there
            ratio = np.divide(num, D, out=np.zeros_like(num), where=(D != 0))
            V = np.where(s == 0, 2.0 * rho * alpha, np.sinh(s * alpha) * ratio)
            S = np.zeros_like(D)
        else:
            V = np.sinh(s * alpha) * num / D
            S = math.sin(phm) / D
        return V, (-S if flip else S)

    flip2 = variant is BVariant.ALTERNATE
    V1, S1 = pieces((math.pi - dth) / rho, False)
    V2, S2 = pieces((-math.pi - dth) / rho, flip2)
    out = out + 0.5j * (V1 * eip - V2 * eim)
    out = out + 0.5 * np.cosh(s * alpha) * (S1 * eip - S2 * eim)
    if not complex_path:
        out = out.astype(complex)
    return out


def b_kernel(params: ConeParams, variant: BVariant, s, theta: float, theta_p: float):
    """Diffractive angular weight B(s, theta, theta').

    Accepts scalar or array s; real s must be >= 0.  Complex s is the analytic
    continuation used by the contour-deformed kernel integrals.  Decays like
    exp(-b_decay_rate * s) along rays of bounded imaginary part (the flux term
    decays at |alpha|, the bracket terms at the gap 1/rho - |alpha|).
    """
    sa = np.asarray(s)
    if not np.iscomplexobj(sa) and np.any(sa < 0):
        raise DomainError("b_kernel requires s >= 0 on the real axis")
    dth = theta - theta_p
    pref = np.exp(-1j * (dth * params.alpha - params.gauge_integral(theta_p, theta)))
    out = pref * _b_core(params.rho, params.alpha, dth, sa, variant)
    if np.ndim(s) == 0:
        return complex(out)
    return out
