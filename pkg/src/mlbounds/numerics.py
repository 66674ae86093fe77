"""Scalar kernels shared by the bound evaluators."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special


class BracketError(ValueError):
    """Raised when a root-finding bracket does not straddle the target."""


_SQRT2_LD = np.sqrt(np.longdouble(2.0))


def q_function(x):
    """Gaussian tail probability ``Q(x) = P(N(0, 1) > x)``.

    With ``t = x / √2``, ``Q = erfc(t) / 2``.  In the upper tail this is
    evaluated as ``erfcx(t) · exp(-t²) / 2`` with ``t²`` and the
    exponential in extended precision: plain ``erfc`` loses about
    ``t² ε`` relative accuracy there.  Accepts scalars and arrays.
    """
    tl = np.asarray(x, dtype=np.longdouble) / _SQRT2_LD
    t = tl.astype(float)
    with np.errstate(over="ignore", invalid="ignore"):
        tail = 0.5 * special.erfcx(t) * np.exp(-(tl * tl)).astype(float)
    out = np.where(t > 0.5, np.where(np.isfinite(t), tail, 0.0), 0.5 * special.erfc(t))
    return float(out) if np.ndim(out) == 0 else out


def _cap(n: int, c: np.ndarray, s2: np.ndarray):
    # half-cap 1/2 * I_{1-c^2}((n-1)/2, 1/2), with 1-c^2 supplied by the
    # caller so that it carries no cancellation near the pole
    s2 = np.asarray(s2, dtype=float)
    half = np.where(np.isnan(s2), np.nan, 0.0)
    # at the poles the half-cap is exactly 0; skip betainc there
    inside = s2 > 0.0
    half[inside] = 0.5 * special.betainc(0.5 * (n - 1), 0.5, s2[inside])
    out = np.where(c >= 0.0, half, 1.0 - half)
    return float(out) if np.ndim(out) == 0 else out


def cap_ratio_cos(n: int, c):
    """Fraction of the surface of a sphere in ``R^n`` within angle ``arccos(c)`` of a pole.

    ``c`` is clipped to ``[-1, 1]``.  For ``c >= 0`` the fraction is
    ``I_{1-c²}((n-1)/2, 1/2) / 2``; negative ``c`` uses the reflection
    ``1 - cap(-c)``.
    """
    if n < 2:
        raise ValueError(f"cap ratio needs n >= 2, got {n}")
    c = np.clip(np.asarray(c, dtype=float), -1.0, 1.0)
    a = np.abs(c)
    return _cap(n, c, (1.0 - a) * (1.0 + a))


def cap_ratio(n: int, theta):
    """Ratio of the area of a spherical cap of half-angle ``theta`` to the whole sphere.

    Equals ``Γ(n/2) / (√π Γ((n-1)/2)) ∫_0^θ sin^{n-2} φ dφ`` for
    ``theta`` in ``[0, π]``.
    """
    if n < 2:
        raise ValueError(f"cap ratio needs n >= 2, got {n}")
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0.0) | (theta > math.pi)):
        raise ValueError("theta must lie in [0, pi]")
    # cos(pi/2) is 6e-17, not 0; pin the hemisphere exactly
    c = np.where(theta == 0.5 * math.pi, 0.0, np.cos(theta))
    s = np.where(theta == math.pi, 0.0, np.sin(theta))
    return _cap(n, c, s * s)


def chi_sf(x, dof: int, scale: float):
    """Survival function of ``scale * chi(dof)``."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0) / scale
    out = special.gammaincc(0.5 * dof, 0.5 * x * x)
    return float(out) if np.ndim(out) == 0 else out


def chi_cdf(x, dof: int, scale: float):
    x = np.maximum(np.asarray(x, dtype=float), 0.0) / scale
    out = special.gammainc(0.5 * dof, 0.5 * x * x)
    return float(out) if np.ndim(out) == 0 else out


def chi_pdf(x, dof: int, scale: float):
    """Density of ``scale * chi(dof)``: the norm of ``dof`` i.i.d. N(0, scale²) samples."""
    x = np.asarray(x, dtype=float)
    pos = x > 0.0
    xs = np.where(pos, x, 1.0) / scale
    logp = (
        (dof - 1) * np.log(xs)
        - 0.5 * xs * xs
        - (0.5 * dof - 1.0) * math.log(2.0)
        - special.gammaln(0.5 * dof)
        - math.log(scale)
    )
    out = np.where(pos, np.exp(logp), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def chi_quantiles(dof: int, scale: float, tail: float) -> tuple[float, float]:
    """Radii ``(lo, hi)`` with ``P(R < lo) = P(R > hi) = tail`` for ``R ~ scale * chi(dof)``."""
    lo = scale * math.sqrt(2.0 * special.gammaincinv(0.5 * dof, tail))
    hi = scale * math.sqrt(2.0 * special.gammainccinv(0.5 * dof, tail))
    return lo, hi


def gauss_pdf(x, sigma: float):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def gauss_quantile(tail: float, sigma: float) -> float:
    """``z`` with ``P(N(0, σ²) > z) = tail``."""
    return -sigma * float(special.ndtri(tail))


def solve_threshold(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    level: float = 1.0,
    rtol: float = 1e-12,
) -> float:
    """Bisect for the point where a nondecreasing ``f`` crosses ``level``.

    Requires ``f(lo) < level < f(hi)``.  Iterates until the bracket is
    narrower than ``rtol * (hi - lo)`` and returns its midpoint.  For a
    monotone ``f`` with a jump across ``level`` the jump location is returned.
    """
    if not (lo < hi):
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < level < f_hi):
        raise BracketError(
            f"f({lo})={f_lo} and f({hi})={f_hi} do not bracket the level {level}"
        )
    tol = rtol * (hi - lo)
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if f(mid) < level:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
