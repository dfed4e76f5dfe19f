"""Macdonald functions and the zero-coupling Gram element of the 6-D example.

The positive Gram entry of the two-particle example is available in closed
form and as an ``r -> 0`` limit of a mixed second derivative of
``u K_2(r sqrt(-u))``.  Both are computed here so they can be checked against
each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import digamma

from .operator_model import SingularFamily, SpectralOperator, TailRule, classify_order

SERIES_CROSSOVER = 2.0
_EPS = 1e-17
_MAXIT = 500
PREFACTOR_DENOM = (2 * math.pi) ** 3 * 16


class CancellationAlarm(ArithmeticError):
    """Successive ``r`` estimates disagree by more than the allowed fraction."""


@dataclass(frozen=True)
class RashbaParams:
    N_sigma: float
    a1: float
    a2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError("a1 and a2 must be positive")
        if not self.N_sigma > 0:
            raise ValueError("N_sigma must be positive")

    @property
    def z(self):
        return -self.a1, -self.a2


# --------------------------------------------------------------------------
# K_0, K_1, K_2


def _series_k01(x):
    """Small-argument series for ``K_0`` and ``K_1`` (accurate for ``x <= 2``)."""
    y = x * x / 4
    lg = math.log(x / 2)
    # K0 = -(ln(x/2) + gamma) I0 + sum y^k/(k!)^2 H_k
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum [psi(k+1) + psi(k+2)] y^k / (k!(k+1)!)
    term0 = 1.0  # y^k/(k!)^2
    term1 = 1.0  # y^k/(k!(k+1)!)
    psi_k1 = -np.euler_gamma  # psi(k+1)
    i0 = i1 = 0.0
    s0 = s1 = 0.0
    for k in range(_MAXIT):
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        i0 += term0
        i1 += term1
        s0 += term0 * (psi_k1 + np.euler_gamma)
        s1 += term1 * (psi_k1 + psi_k2)
        if term0 < _EPS * i0 and term1 < _EPS * i1:
            break
        term0 *= y / ((k + 1) ** 2)
        term1 *= y / ((k + 1) * (k + 2))
        psi_k1 = psi_k2
    k0 = -(lg + np.euler_gamma) * i0 + s0
    k1 = 1.0 / x + lg * (x / 2) * i1 - (x / 4) * s1
    return k0, k1


def _steed_k01(x):
    """Continued fraction of Steed's type for ``K_0`` and ``K_1`` (``x > 2``)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError(f"continued fraction did not converge at x={x}")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k01(x):
    return _series_k01(x) if x <= SERIES_CROSSOVER else _steed_k01(x)


def besselK(nu: int, x: float) -> float:
    """Modified Bessel function of the second kind ``K_nu(x)``, ``nu`` in 0, 1, 2."""
    if nu not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    x = float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    k0, k1 = _k01(x)
    if nu == 0:
        return k0
    if nu == 1:
        return k1
    return k0 + (2.0 / x) * k1


def besselK2_regular(x: float) -> float:
    """``K_2(x) - 2/x**2 + 1/2``, evaluated without cancellation for small ``x``.

    The subtracted terms are a constant and a multiple of ``1/x**2``; in
    ``u K_2(r sqrt(-u))`` they become affine in ``u`` and drop out of every
    mixed second derivative of the divided difference.
    """
    x = float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    if x > 1.0:
        return besselK(2, x) - 2.0 / (x * x) + 0.5
    y = x * x / 4
    term = 0.5  # y^k/(k!(k+2)!) at k=0
    i2 = s = 0.0
    for k in range(_MAXIT):
        i2 += term
        s += term * (digamma(k + 1) + digamma(k + 3))
        if term < _EPS * i2:
            break
        term *= y / ((k + 1) * (k + 3))
    return -math.log(x / 2) * y * i2 + (x * x / 8) * s


def besselK_quadrature(nu: int, x: float, dps: int = 30) -> float:
    """Independent oracle: ``int_0^inf exp(-x cosh t) cosh(nu t) dt``."""
    if not x > 0:
        raise ValueError("x must be positive")
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        # beyond x cosh t = 90 the tail is below exp(-90) relative to the value
        tmax = mpmath.acosh(max(mpmath.mpf(2), 90 / xm))
        pts = mpmath.linspace(0, tmax, 9)
        val = mpmath.quad(lambda t: mpmath.exp(-xm * mpmath.cosh(t)) * mpmath.cosh(nu * t), pts)
        return float(val)


# --------------------------------------------------------------------------
# Gram element


def _coincidence_series(eps, terms=24):
    """``(1/3 - eps/6 + eps^2/10 - ...)`` so that the ratio equals ``series / a1``."""
    total = 0.0
    for k in range(3, 3 + terms):
        total += -2.0 * (-1) ** k * eps ** (k - 3) / (k * (k - 1))
    return total


def gram_element_closed(p: RashbaParams, *, switch=1e-2) -> float:
    """Closed-form Gram entry; a series branch takes over when ``a2 ~ a1``."""
    a1, a2 = p.a1, p.a2
    pref = p.N_sigma ** 2 / PREFACTOR_DENOM
    eps = a2 / a1 - 1.0
    if abs(eps) < switch:
        return pref * _coincidence_series(eps) / a1
    num = 2 * a1 * a2 * math.log(a1 / a2) - a1 * a1 + a2 * a2
    return pref * num / (a2 - a1) ** 3


def _g(u, r):
    """``u * K2_regular(r sqrt(-u))`` for ``u < 0``."""
    return u * besselK2_regular(r * math.sqrt(-u))


def mixed_partial(u, v, r, fd_step=1e-4) -> float:
    """Central 4-point estimate of the mixed derivative of the divided difference."""
    if u == v:
        raise ValueError("divided difference needs u != v")
    hu, hv = fd_step * abs(u), fd_step * abs(v)

    def f(a, b):
        return (_g(a, r) - _g(b, r)) / (a - b)

    return (f(u + hu, v + hv) - f(u + hu, v - hv) - f(u - hu, v + hv) + f(u - hu, v - hv)) / (4 * hu * hv)


def limit_estimates(p: RashbaParams, r_seq=(1e-2, 5e-3, 2.5e-3), fd_step=1e-4) -> np.ndarray:
    """Scaled mixed partial ``-N^2/((2 pi)^3 r^2) d_u d_v [...]`` at each ``r``."""
    u, v = p.z
    pref = -p.N_sigma ** 2 / (2 * math.pi) ** 3
    return np.array([pref * mixed_partial(u, v, r, fd_step) / r ** 2 for r in r_seq])


def extrapolate(r_seq, values) -> float:
    """Value at ``r = 0`` of the fit ``c0 + c1 r^2 + c2 r^2 log r``.

    The error after the ``1/r**2`` scaling carries a ``r^2 log r`` term as well
    as the plain ``r^2`` one; with two points only ``{1, r^2}`` is used.
    """
    r = np.asarray(r_seq, dtype=float)
    values = np.asarray(values, dtype=float)
    cols = [np.ones_like(r), r ** 2, r ** 2 * np.log(r)][: max(1, min(3, r.size))]
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return float(coef[0])


def gram_element_limit(p: RashbaParams, r_seq=(1e-2, 5e-3, 2.5e-3), fd_step=1e-4, *, alarm=0.10) -> float:
    r_seq = tuple(float(r) for r in r_seq)
    if len(r_seq) < 1 or any(r <= 0 for r in r_seq):
        raise ValueError("r_seq must contain positive values")
    if any(b >= a for a, b in zip(r_seq, r_seq[1:])):
        raise ValueError("r_seq must be strictly decreasing")
    est = limit_estimates(p, r_seq, fd_step)
    for a, b in zip(est, est[1:]):
        if abs(a - b) > alarm * max(abs(a), abs(b)):
            raise CancellationAlarm(f"neighbouring estimates {a:.6e} and {b:.6e} differ by more than {alarm:.0%}")
    return extrapolate(r_seq, est)


def convergence_slope(p: RashbaParams, r_seq=(1e-2, 5e-3, 2.5e-3), fd_step=1e-4) -> float:
    """Log-log slope of ``|estimate(r) - closed|`` against ``r``."""
    est = limit_estimates(p, r_seq, fd_step)
    err = np.abs(est - gram_element_closed(p))
    slope, _ = np.polyfit(np.log(r_seq), np.log(err), 1)
    return float(slope)


# --------------------------------------------------------------------------
# finite surrogate


SURROGATE_TAIL = TailRule(2.0, 0.0)
WEYL_TAIL_6D = TailRule(1.0 / 3.0, 0.0)


def build_discretized_example(N: int, m: int = 2, d: int = 4, *, N_sigma=1.0, z1=-1.0):
    """Finite stand-in for the 6-D two-particle operator tensored with ``C^d``.

    Levels ``(k+1)**2`` each appear ``d`` times; coordinate ``k*d + s`` is level
    ``k`` in spin slot ``s``.  ``phi_s`` puts ``N_sigma`` on every coordinate of
    slot ``s``.  When ``N`` is not a multiple of ``d`` the trailing remainder is
    dropped, so the dimension is ``d * (N // d)``.
    """
    if N < m * d:
        raise ValueError(f"need N >= m*d = {m * d}")
    K = N // d
    lam = np.repeat((np.arange(K) + 1.0) ** 2, d)
    op = SpectralOperator(lam, z1)
    phi = np.zeros((d, K * d), dtype=complex)
    for s in range(d):
        phi[s, s::d] = N_sigma
    return op, SingularFamily(phi, m)


def example_order_reports() -> dict:
    """Order classification for the surrogate ramp and for the 6-D Weyl law."""
    return {"surrogate": classify_order(SURROGATE_TAIL), "weyl_6d": classify_order(WEYL_TAIL_6D)}


def spin_split_blocks(op: SpectralOperator, d: int = 4, k: int = 1):
    """Index sets of a ``C^k (+) C^(d-k)`` split of the spin factor."""
    lower = [i for i in range(op.dim) if i % d < k]
    return lower
