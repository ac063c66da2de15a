"""Self-contained real-order Bessel and order-zero Hankel functions.

Everything downstream (mode kernels, resolvents, spectral measures) reduces to
J_nu at real argument, I_nu at complex argument, and H0^(1,2) at complex
argument in the closed upper/lower half plane.  Each function has two
independently testable branches:

* an ascending power series, used for small argument or whenever the order
  dominates the argument (no cancellation there), and
* a quadrature/asymptotic branch for large argument: a Schlafli-type integral
  representation in a middle band and the Hankel asymptotic expansion beyond.

The switchover radius defaults to ``SERIES_SWITCH_RADIUS`` and can be
overridden per call; the two branches overlap on a band around it, which the
test suite checks for mutual consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError

SERIES_SWITCH_RADIUS = 12.0

_EULER_GAMMA = 0.5772156649015328606

# Nodes/weights cache for fixed-order Gauss-Legendre rules.
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL_CACHE[n]
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@dataclass(frozen=True)
class SpecFunAccuracy:
    """Accuracy targets for special-function evaluation.

    The defaults reflect what the ascending series can actually deliver at the
    switch radius, where alternating-term cancellation amplifies roundoff by
    about e^{|z|} eps.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_terms: int = 600

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


DEFAULT_ACCURACY = SpecFunAccuracy()


def _check_order(nu) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0:
        raise DomainError(f"order nu must be finite and >= 0, got {nu}")
    return nu


# ---------------------------------------------------------------------------
# J_nu, real argument
# ---------------------------------------------------------------------------

def _series_j(nu: float, x: np.ndarray, acc: SpecFunAccuracy) -> np.ndarray:
    """Ascending series (x/2)^nu / Gamma(nu+1) * sum_m c_m, c_0 = 1."""
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    if nu == 0.0:
        out[~pos] = 1.0
    if not np.any(pos):
        return out
    xp = x[pos]
    # leading factor through logs to dodge overflow/underflow at large nu
    lead = np.exp(nu * np.log(xp / 2.0) - math.lgamma(nu + 1.0))
    q = -(xp / 2.0) ** 2
    term = np.ones_like(xp)
    total = np.ones_like(xp)
    for m in range(1, acc.max_terms + 1):
        term = term * q / (m * (nu + m))
        total += term
        if np.max(np.abs(term)) <= 1e-17 * max(1.0, float(np.max(np.abs(total)))):
            break
    else:
        raise AccuracyError(
            f"J_{nu} series did not converge in {acc.max_terms} terms",
            best=lead * total,
        )
    out[pos] = lead * total
    return out


def _schlafli_j(nu: float, x: np.ndarray) -> np.ndarray:
    """Schlafli integral: J_nu(x) = (1/pi) int_0^pi cos(nu t - x sin t) dt
    - sin(nu pi)/pi int_0^inf exp(-nu t - x sinh t) dt, for x > 0."""
    xmax = float(np.max(x))
    n1 = min(20000, 96 + int(1.3 * (xmax + nu)))
    t, w = _gl_nodes(n1, 0.0, math.pi)
    osc = np.cos(nu * t[None, :] - x[:, None] * np.sin(t)[None, :]) @ w / math.pi

    s = math.sin(nu * math.pi)
    if s == 0.0:
        return osc
    # substitute u = sinh t; scale v = x u so the rule is x-independent
    v, wv = _gl_nodes(96, 0.0, 60.0)
    u = v[None, :] / x[:, None]
    integ = np.exp(-v[None, :] - nu * np.arcsinh(u)) / np.sqrt(1.0 + u * u)
    tail = (integ @ wv) / x
    return osc - (s / math.pi) * tail


def _hankel_a_coeffs(nu: float, kmax: int = 40) -> np.ndarray:
    """a_k of the Hankel asymptotic expansion, a_0 = 1."""
    a = np.empty(kmax + 1)
    a[0] = 1.0
    four_nu2 = 4.0 * nu * nu
    for k in range(kmax):
        a[k + 1] = a[k] * (four_nu2 - (2 * k + 1) ** 2) / (8.0 * (k + 1))
    return a


def _asymptotic_pq(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P, Q of J_nu(x) ~ sqrt(2/(pi x)) [cos(w) P - sin(w) Q]; truncated at the
    smallest term per element."""
    a = _hankel_a_coeffs(nu)
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    pw = np.ones_like(x)
    last = np.full_like(x, np.inf)
    for k in range(1, len(a)):
        pw = pw / x
        term = a[k] * pw
        mag = np.abs(term)
        stop = mag >= last  # divergent part of the asymptotic series
        term = np.where(stop, 0.0, term)
        last = np.minimum(last, mag)
        if k % 2 == 1:
            Q += term * (-1.0) ** ((k - 1) // 2)
        else:
            P += term * (-1.0) ** (k // 2)
        if np.all(stop) or float(np.max(mag)) < 1e-18:
            break
    return P, Q


def _asymptotic_j(nu: float, x: np.ndarray) -> np.ndarray:
    P, Q = _asymptotic_pq(nu, x)
    w = x - nu * math.pi / 2.0 - math.pi / 4.0
    return np.sqrt(2.0 / (math.pi * x)) * (np.cos(w) * P - np.sin(w) * Q)


def bessel_j(nu, x, acc: SpecFunAccuracy | None = None, method: str = "auto",
             switch_radius: float = SERIES_SWITCH_RADIUS):
    """Bessel function of the first kind of real order nu >= 0 at real x >= 0.

    Parameters
    ----------
    nu : float
        Order, finite and nonnegative.
    x : float or ndarray
        Argument(s), finite and nonnegative.
    acc : SpecFunAccuracy, optional
        Accuracy targets; governs series truncation.
    method : {"auto", "series", "integral"}
        Force a branch (used by branch-consistency tests).  "integral" covers
        both the Schlafli band and the large-x asymptotic regime.
    switch_radius : float
        Series/quadrature switchover radius.
    """
    acc = acc or DEFAULT_ACCURACY
    nu = _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("bessel_j argument must be finite")
    if np.any(xa < 0):
        raise DomainError("bessel_j argument must be >= 0")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)

    if method == "series":
        ser = np.ones_like(xa, dtype=bool)
    elif method == "integral":
        ser = np.zeros_like(xa, dtype=bool)
        if np.any(xa <= 0):
            raise DomainError("integral branch requires x > 0")
    elif method == "auto":
        ser = (xa <= switch_radius) | (nu >= xa)
    else:
        raise DomainError(f"unknown method {method!r}")

    if np.any(ser):
        out[ser] = _series_j(nu, xa[ser], acc)
    hard = ~ser
    if np.any(hard):
        xh = xa[hard]
        asym = xh >= max(18.0, 1.5 * nu * nu)
        vals = np.empty_like(xh)
        if np.any(asym):
            vals[asym] = _asymptotic_j(nu, xh[asym])
        if np.any(~asym):
            vals[~asym] = _schlafli_j(nu, xh[~asym])
        out[hard] = vals
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Y_0 and H_0^(1,2)
# ---------------------------------------------------------------------------

def _series_y0(x: np.ndarray) -> np.ndarray:
    j0 = _series_j(0.0, x, DEFAULT_ACCURACY)
    q = -(x / 2.0) ** 2
    term = np.ones_like(x)
    h = 0.0
    total = np.zeros_like(x)
    for m in range(1, 200):
        term = term * q / (m * m)
        h += 1.0 / m
        total += -term * h  # (-1)^{m+1} H_m (x^2/4)^m/(m!)^2, sign folded in q^m
        if np.max(np.abs(term)) < 1e-18:
            break
    return (2.0 / math.pi) * ((np.log(x / 2.0) + _EULER_GAMMA) * j0 + total)


def _schlafli_y0(x: np.ndarray) -> np.ndarray:
    """Y_0(x) = (1/pi) int_0^pi sin(x sin t) dt - (2/pi) int_0^inf e^{-x sinh t} dt."""
    xmax = float(np.max(x))
    n1 = min(20000, 96 + int(1.3 * xmax))
    t, w = _gl_nodes(n1, 0.0, math.pi)
    osc = np.sin(x[:, None] * np.sin(t)[None, :]) @ w / math.pi
    v, wv = _gl_nodes(96, 0.0, 60.0)
    u = v[None, :] / x[:, None]
    tail = (np.exp(-v[None, :]) / np.sqrt(1.0 + u * u) @ wv) / x
    return osc - (2.0 / math.pi) * tail


def _asymptotic_y0(x: np.ndarray) -> np.ndarray:
    P, Q = _asymptotic_pq(0.0, x)
    w = x - math.pi / 4.0
    return np.sqrt(2.0 / (math.pi * x)) * (np.sin(w) * P + np.cos(w) * Q)


def bessel_y0(x, method: str = "auto", switch_radius: float = SERIES_SWITCH_RADIUS):
    """Order-zero Bessel function of the second kind at real x > 0.

    Provided because the Hankel split a_+/a_- needs J_0 +- i Y_0; the
    logarithmic singularity confines the domain to x > 0.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("bessel_y0 argument must be finite")
    if np.any(xa <= 0):
        raise DomainError("bessel_y0 requires x > 0")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)
    if method == "series":
        ser = np.ones_like(xa, dtype=bool)
    elif method == "integral":
        ser = np.zeros_like(xa, dtype=bool)
    else:
        ser = xa <= switch_radius
    if np.any(ser):
        out[ser] = _series_y0(xa[ser])
    hard = ~ser
    if np.any(hard):
        xh = xa[hard]
        asym = xh >= 18.0
        vals = np.empty_like(xh)
        if np.any(asym):
            vals[asym] = _asymptotic_y0(xh[asym])
        if np.any(~asym):
            vals[~asym] = _schlafli_y0(xh[~asym])
        out[hard] = vals
    return float(out[0]) if scalar else out


def _series_h0_complex(w: complex, kind: int) -> complex:
    """J_0(w) + (-1)^{kind+1} i Y_0(w) by ascending series, |w| small."""
    q = -(w / 2.0) ** 2
    term = 1.0 + 0j
    j0 = 1.0 + 0j
    ysum = 0j
    h = 0.0
    for m in range(1, 300):
        term = term * q / (m * m)
        j0 += term
        h += 1.0 / m
        ysum += -term * h
        if abs(term) < 1e-18 * max(1.0, abs(j0)):
            break
    y0 = (2.0 / math.pi) * ((np.log(w / 2.0) + _EULER_GAMMA) * j0 + ysum)
    return j0 + 1j * y0 if kind == 1 else j0 - 1j * y0


def _asymptotic_h0_complex(w: complex, kind: int) -> complex:
    """One-sided Hankel expansion; kind 1 valid for Im w >= 0, kind 2 for <= 0."""
    a = _hankel_a_coeffs(0.0)
    sgn = 1j if kind == 1 else -1j
    total = 1.0 + 0j
    pw = 1.0 + 0j
    last = math.inf
    for k in range(1, len(a)):
        pw = pw * (sgn / w)
        term = a[k] * pw
        if abs(term) >= last:
            break
        total += term
        last = abs(term)
        if last < 1e-18:
            break
    phase = w - math.pi / 4.0
    return np.sqrt(2.0 / (math.pi * w)) * np.exp(sgn * phase) * total


def hankel0(w, kind: int = 1, switch_radius: float = SERIES_SWITCH_RADIUS):
    """H_0^(1) (kind=1) or H_0^(2) (kind=2) at complex argument w != 0.

    The asymptotic branch of kind 1 requires Im w >= 0 and of kind 2
    Im w <= 0; that is the half plane in which each decays, and the only
    region the kernel contours evaluate them in.
    """
    if kind not in (1, 2):
        raise DomainError("kind must be 1 or 2")
    w = complex(w)
    if w == 0 or not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError("hankel0 requires finite nonzero argument")
    if abs(w) <= switch_radius:
        return _series_h0_complex(w, kind)
    if (kind == 1 and w.imag < -1e-12 * abs(w)) or (kind == 2 and w.imag > 1e-12 * abs(w)):
        raise DomainError("hankel0 asymptotic branch used outside its half plane")
    return _asymptotic_h0_complex(w, kind)


def hankel_split(r):
    """Split 2*pi*J_0(r) into incoming/outgoing radial waves.

    Returns (a_plus, a_minus) with

        a_plus(r) e^{ir} + a_minus(r) e^{-ir} = 2 pi J_0(r),

    realized exactly as a_+(r) = pi H_0^(1)(r) e^{-ir} and
    a_-(r) = pi H_0^(2)(r) e^{+ir}.  Both amplitudes decay like r^{-1/2}.
    """
    ra = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(ra)):
        raise DomainError("hankel_split argument must be finite")
    if np.any(ra <= 0):
        raise DomainError("hankel_split requires r > 0")
    j0 = bessel_j(0.0, ra)
    y0 = bessel_y0(ra)
    a_plus = math.pi * (j0 + 1j * y0) * np.exp(-1j * ra)
    return a_plus, np.conj(a_plus)


# ---------------------------------------------------------------------------
# I_nu, complex argument
# ---------------------------------------------------------------------------

def _series_i(nu: float, z: complex, acc: SpecFunAccuracy) -> complex:
    if z == 0:
        return 1.0 + 0j if nu == 0.0 else 0j
    lead = np.exp(nu * np.log(z / 2.0) - math.lgamma(nu + 1.0))
    q = (z / 2.0) ** 2
    term = 1.0 + 0j
    total = 1.0 + 0j
    for m in range(1, acc.max_terms + 1):
        term = term * q / (m * (nu + m))
        total += term
        if abs(term) <= 1e-17 * max(1.0, abs(total)):
            break
    else:
        raise AccuracyError(
            f"I_{nu} series did not converge in {acc.max_terms} terms",
            best=lead * total,
        )
    return complex(lead * total)


def _integral_i(nu: float, z: complex) -> complex:
    """Two-integral representation of I_nu for Re z >= 0, |z| above the switch.

    First piece: (1/pi) int_0^pi e^{z cos t} cos(nu t) dt.
    Second: (sin(nu pi)/pi) int_0^inf e^{-z cosh t - nu t} dt, evaluated on a
    rotated ray so the cosh factor decays instead of oscillating.
    """
    n1 = min(6000, 128 + int(1.3 * (abs(z.imag) + nu)))
    t, w = _gl_nodes(n1, 0.0, math.pi)
    first = np.sum(np.exp(z * np.cos(t)) * np.cos(nu * t) * w) / math.pi

    s = math.sin(nu * math.pi)
    if s == 0.0:
        return complex(first)

    if z.imag == 0.0:
        # real z: pure decay, boundary layer of width ~sqrt(2/z)
        L = math.sqrt(2.0 / z.real)
        v, wv = _gl_nodes(96, 0.0, 10.0)
        tt = L * v
        second = L * np.sum(np.exp(-z * np.cosh(tt) + z - nu * tt) * wv) * np.exp(-z)
    else:
        rot = -np.sign(z.imag) * math.pi / 4.0
        # vertical leg 0 -> i*rot
        nv = min(6000, 48 + int(0.4 * (abs(z.imag) + nu)))
        u, wu = _gl_nodes(nv, 0.0, abs(rot))
        sgn = np.sign(rot)
        leg_v = 1j * sgn * np.sum(np.exp(-z * np.cos(u) - nu * 1j * sgn * u) * wu)
        # horizontal leg i*rot -> i*rot + sigma_T; the cosh factor now decays
        # at rate ~|z| sin(pi/4) sinh(sigma), which alone kills the integrand
        sigma_t = float(np.arcsinh(75.0 / abs(z)))
        phase = 0.71 * (math.hypot(abs(z), 75.0) - abs(z))
        nh = min(4000, 200 + int(1.5 * phase))
        sg, wg = _gl_nodes(nh, 0.0, sigma_t)
        path = sg + 1j * rot
        leg_h = np.sum(np.exp(-z * np.cosh(path) - nu * path) * wg)
        second = leg_v + leg_h
    return complex(first - (s / math.pi) * second)


def bessel_i(nu, z, acc: SpecFunAccuracy | None = None, method: str = "auto",
             switch_radius: float = SERIES_SWITCH_RADIUS) -> complex:
    """Modified Bessel function of the first kind, real order nu >= 0, complex z.

    Principal branch for non-integer nu (cut along the negative real axis).
    The quadrature branch serves Re z >= 0; arguments with Re z < 0 are folded
    back with I_nu(z) = e^{+- i nu pi} I_nu(-z).
    """
    acc = acc or DEFAULT_ACCURACY
    nu = _check_order(nu)
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("bessel_i argument must be finite")

    if method == "series" or (method == "auto" and (abs(z) <= switch_radius or nu >= abs(z))):
        return _series_i(nu, z, acc)
    if method not in ("auto", "integral"):
        raise DomainError(f"unknown method {method!r}")
    if z.real < 0.0:
        sgn = 1.0 if z.imag >= 0.0 else -1.0
        return np.exp(sgn * 1j * nu * math.pi) * bessel_i(nu, -z, acc, method, switch_radius)
    return _integral_i(nu, z)


def bessel_i_scaled(nu, x, acc: SpecFunAccuracy | None = None,
                    switch_radius: float = SERIES_SWITCH_RADIUS) -> float:
    """e^{-x} I_nu(x) for real x >= 0; overflow-free for large x.

    The heat kernel combines this with exp(-(r-r')^2/(4 tau)) so that no
    intermediate exceeds floating-point range.
    """
    acc = acc or DEFAULT_ACCURACY
    nu = _check_order(nu)
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError("bessel_i_scaled requires finite x >= 0")
    if x <= switch_radius or nu >= x:
        return float((_series_i(nu, complex(x), acc) * math.exp(-x)).real)
    # first piece of the integral representation, damped in place
    n1 = 128
    t, w = _gl_nodes(n1, 0.0, math.pi)
    first = np.sum(np.exp(-x * (1.0 - np.cos(t))) * np.cos(nu * t) * w) / math.pi
    s = math.sin(nu * math.pi)
    if s == 0.0:
        return float(first)
    L = math.sqrt(2.0 / x)
    v, wv = _gl_nodes(96, 0.0, 10.0)
    tt = L * v
    second = L * np.sum(np.exp(-x * (np.cosh(tt) + 1.0) - nu * tt) * wv)
    return float(first - (s / math.pi) * second)
