"""Union, sphere, tangential and tangential-sphere bounds for general codes.

Every bound has the form ``∫ min{f_u(r), 1} g(r) dr``, where ``g`` is the
density of a scalar statistic of the noise (the noise radius for the
sphere bound, its radial component for the tangential bounds) and ``f_u``
is a conditional union bound.  The general-code versions are driven by the
Euclidean spectrum (sphere bound) or the triangle spectrum (tangential and
tangential-sphere bounds) and integrate the ``min`` form directly.

The ``binary_*`` functions take the weight distribution of a binary linear
code under BPSK and evaluate the equivalent split form
``∫_{-∞}^{t} f_u g + P(statistic > t)`` at the optimal threshold ``t``,
found by bisection on ``f_u = 1``.

Infinite integration ranges are cut at quantiles of ``g``; the probability
mass that is cut off is added to the result so it stays an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from . import numerics as nx
from .quadrature import integrate
from .spectrum import DistanceSpectrum, TriangleSpectrum

# arccos arguments further than this outside [-1, 1] mean a corrupt spectrum
ARCCOS_SLACK = 1e-9
_CHUNK = 2**21
_MAX_BREAKPOINTS = 48


class BoundError(ValueError):
    """Raised for inputs a bound cannot be evaluated on."""


@dataclass(frozen=True)
class ChannelParams:
    """AWGN channel seen by a code of length ``n``.

    ``snr`` is the mean codeword energy per dimension over the noise
    variance, ``avg_codeword_energy / (n * sigma**2)``.
    """

    sigma: float
    n: int
    avg_codeword_energy: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise BoundError(f"sigma must be positive, got {self.sigma}")
        if self.n < 1:
            raise BoundError(f"n must be positive, got {self.n}")
        if not self.avg_codeword_energy > 0:
            raise BoundError("average codeword energy must be positive")

    @property
    def snr(self) -> float:
        return self.avg_codeword_energy / (self.n * self.sigma**2)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @classmethod
    def from_snr_db(cls, snr_db: float, n: int, avg_codeword_energy: float) -> "ChannelParams":
        snr = 10.0 ** (snr_db / 10.0)
        return cls(math.sqrt(avg_codeword_energy / (n * snr)), n, avg_codeword_energy)


@dataclass(frozen=True)
class QuadratureConfig:
    relative_tolerance: float = 1e-8
    tail_mass_cutoff: float = 1e-12
    max_nodes: int = 4000

    def __post_init__(self) -> None:
        if not 0 < self.relative_tolerance <= 1e-3:
            raise BoundError("relative_tolerance must lie in (0, 1e-3]")
        if not 0 < self.tail_mass_cutoff <= 1e-6:
            raise BoundError("tail_mass_cutoff must lie in (0, 1e-6]")
        if self.max_nodes < 1:
            raise BoundError("max_nodes must be positive")


@dataclass(frozen=True)
class BoundResult:
    """A bound value with its numerical bookkeeping.

    ``value`` already contains ``truncation_tail_added``.  ``clamped`` is
    set when the raw sum exceeded 1 and was cut back.
    """

    value: float
    optimal_parameter: float | None = None
    truncation_tail_added: float = 0.0
    quadrature_error_estimate: float = 0.0
    clamped: bool = False


def _result(value, parameter=None, tail=0.0, err=0.0) -> BoundResult:
    clamped = value > 1.0
    return BoundResult(
        min(max(float(value), 0.0), 1.0),
        None if parameter is None else float(parameter),
        float(tail),
        float(err),
        bool(clamped),
    )


def _check_n(spectrum, ch: ChannelParams) -> None:
    if spectrum.n != ch.n:
        raise BoundError(f"spectrum is for n={spectrum.n}, channel for n={ch.n}")


def _entry_sum(x: np.ndarray, mult: np.ndarray, term: Callable) -> np.ndarray:
    """``Σ_e mult[e] * term(x[:, None], e-slice)`` without materializing huge arrays."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.size)
    step = max(1, _CHUNK // max(mult.size, 1))
    for i in range(0, x.size, step):
        out[i : i + step] = term(x[i : i + step, None]) @ mult
    return out


def _pick_breakpoints(points, a: float, b: float, cap: int = _MAX_BREAKPOINTS) -> list[float]:
    pts = np.unique(np.asarray(points, dtype=float))
    pts = pts[(pts > a) & (pts < b)]
    if pts.size > cap:
        pts = pts[np.linspace(0, pts.size - 1, cap).astype(int)]
    return pts.tolist()


def _saturation_points(f: Callable, a: float, b: float, known, samples: int = 48) -> list[float]:
    """Points in ``(a, b)`` where ``f`` crosses 1, located on a sample grid.

    ``min{f, 1}`` has a kink there; handing it to the integrator as a panel
    edge saves a long run of bisections around it.
    """
    grid = np.union1d(np.linspace(a, b, samples), known)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = f(grid) - 1.0
    flips = np.flatnonzero(gap[:-1] * gap[1:] < 0.0)

    def h(r: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(f(np.array([r]))[0]) - 1.0

    return [brentq(h, grid[i], grid[i + 1], xtol=1e-13 * grid[i + 1]) for i in flips]


# ---------------------------------------------------------------------------
# union bound


def union_bound(spectrum: DistanceSpectrum, ch: ChannelParams) -> BoundResult:
    """``Σ_{D>0} A_D Q(√D / 2σ)``, clamped to ``[0, 1]``."""
    _check_n(spectrum, ch)
    keys, mult = spectrum.positive()
    total = math.fsum(mult * nx.q_function(np.sqrt(keys) / (2.0 * ch.sigma)))
    return _result(total)


# ---------------------------------------------------------------------------
# sphere bound


def sphere_bound_general(
    spectrum: DistanceSpectrum, ch: ChannelParams, q: QuadratureConfig = QuadratureConfig()
) -> BoundResult:
    """Sphere bound from the Euclidean distance spectrum.

    The conditional union bound on the sphere of radius ``r`` around the
    transmitted codeword is ``f_u(r) = Σ_D A_D cap_n(arccos(√D / 2r))``;
    ``g`` is the density of ``σ·chi(n)``.
    """
    _check_n(spectrum, ch)
    n = ch.n
    if n < 2:
        raise BoundError("the sphere bound needs n >= 2")
    keys, mult = spectrum.positive()
    if keys.size == 0:
        if spectrum.entries:
            raise BoundError("degenerate code: the spectrum has no pair at positive distance")
        return _result(q.tail_mass_cutoff, tail=q.tail_mass_cutoff)
    half = 0.5 * np.sqrt(keys)
    sigma = ch.sigma

    def f_u(r):
        with np.errstate(divide="ignore"):
            return _entry_sum(r, mult, lambda rr: nx.cap_ratio_cos(n, half / rr))

    def integrand(r):
        return np.minimum(f_u(r), 1.0) * nx.chi_pdf(r, n, sigma)

    lo, hi = nx.chi_quantiles(n, sigma, 0.5 * q.tail_mass_cutoff)
    tail = nx.chi_sf(hi, n, sigma)
    start = float(half.min())
    if lo > start:
        tail += nx.chi_cdf(lo, n, sigma)
        start = lo
    res = integrate(
        integrand,
        start,
        hi,
        rtol=q.relative_tolerance,
        max_panels=q.max_nodes,
        breakpoints=_pick_breakpoints(half, start, hi),
        edge_singular=True,
    )
    return _result(res.value + tail, tail=tail, err=res.error)


def _binary_weights(weights: Mapping[int, float], n: int, need: int) -> tuple[np.ndarray, np.ndarray]:
    if n < need:
        raise BoundError(f"this bound needs n >= {need}, got n={n}")
    items = sorted((int(d), float(a)) for d, a in weights.items() if int(d) != 0 and a != 0)
    if not items:
        raise BoundError("weight distribution has no nonzero weight")
    d, a = (np.array(v) for v in zip(*items))
    if d.min() < 1 or d.max() > n:
        raise BoundError(f"weights must lie in [1, {n}]")
    return d.astype(float), a


def _upper_bracket(f: Callable[[float], float], start: float, step: float) -> float | None:
    """Smallest tried point ``start + step * (2**k - 1)`` with ``f > 1``, or None."""
    x, s = start, step
    for _ in range(200):
        if f(x) > 1.0:
            return x
        x += s
        s *= 2.0
        if not math.isfinite(x):
            break
    return None


def sphere_radius_threshold(d: np.ndarray, a: np.ndarray, n: int) -> float:
    """Radius ``r₁`` solving ``Σ A_d cap_n(arccos(√d / r)) = 1``; ``inf`` when the
    sum never reaches 1.  Depends only on the weight distribution."""
    root_d = np.sqrt(d)

    def f_u(r: float) -> float:
        return float(np.dot(a, nx.cap_ratio_cos(n, root_d / r)))

    if 0.5 * a.sum() <= 1.0:
        return math.inf
    lo = float(root_d.min())
    hi = _upper_bracket(f_u, 2.0 * lo, lo)
    if hi is None:
        return math.inf
    return nx.solve_threshold(f_u, lo, hi)


def binary_sphere_bound(
    weights: Mapping[int, float],
    n: int,
    ch: ChannelParams,
    q: QuadratureConfig = QuadratureConfig(),
) -> BoundResult:
    """Sphere bound of a BPSK-modulated binary linear code.

    ``∫_0^{r₁} f_u(r) g(r) dr + P(R > r₁)`` with
    ``f_u(r) = Σ_d A_d cap_n(arccos(√d / r))`` and the radius ``r₁`` at which
    ``f_u`` reaches 1.  ``r₁`` does not depend on ``σ``.
    """
    if ch.n != n:
        raise BoundError(f"weights are for n={n}, channel for n={ch.n}")
    d, a = _binary_weights(weights, n, 2)
    sigma = ch.sigma
    r1 = sphere_radius_threshold(d, a, n)
    root_d = np.sqrt(d)

    def integrand(r):
        return _entry_sum(r, a, lambda rr: nx.cap_ratio_cos(n, root_d / rr)) * nx.chi_pdf(
            r, n, sigma
        )

    lo, hi = nx.chi_quantiles(n, sigma, 0.5 * q.tail_mass_cutoff)
    start = float(root_d.min())
    lower = 0.0
    if lo > start:
        lower = nx.chi_cdf(lo, n, sigma)
        start = lo
    stop = min(r1, hi)
    # P(R > stop): the second term of the bound, or a cut-off tail when r1 > hi
    outside = nx.chi_sf(stop, n, sigma)
    res = integrate(
        integrand,
        start,
        stop,
        rtol=q.relative_tolerance,
        max_panels=q.max_nodes,
        breakpoints=_pick_breakpoints(root_d, start, stop),
        edge_singular=True,
    )
    tail = lower + (outside if r1 > hi else 0.0)
    return _result(res.value + outside + lower, r1, tail, res.error)


# ---------------------------------------------------------------------------
# tangential geometry


@dataclass(frozen=True)
class _Geometry:
    """Per-entry plane geometry of a triangle spectrum (``D > 0`` rows)."""

    delta: np.ndarray  # distance between the pair
    cos: np.ndarray  # cosine of the angle at the transmitted codeword
    sin: np.ndarray
    mult: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.sin == 0.0

    def beta(self, z: np.ndarray) -> np.ndarray:
        """Distance from the tangential axis to the pair's bisector plane at
        radial coordinate ``z``; shape ``z.shape + (entries,)``.  Degenerate
        entries give ``±inf`` so that they act as steps."""
        z = np.asarray(z, dtype=float)[..., None]
        num = self.delta - 2.0 * z * self.cos
        with np.errstate(divide="ignore", invalid="ignore"):
            b = num / (2.0 * self.sin)
        # collinear pair: error iff 2 z cos >= delta
        step = np.where(num <= 0.0, -np.inf, np.inf)
        return np.where(self.degenerate, step, b)

    def steps(self) -> np.ndarray:
        """Radial coordinates where a collinear entry switches on or off.

        A regular entry enters through ``Q(β/σ)`` or a cap of ``β/r``, both
        smooth where ``β`` crosses zero, so only the steps are kinks."""
        ok = self.degenerate & (self.cos != 0.0)
        return self.delta[ok] / (2.0 * self.cos[ok])


def _geometry(tspec: TriangleSpectrum) -> _Geometry:
    rows, mult = tspec.positive()
    if rows.shape[0] == 0:
        return _Geometry(np.empty(0), np.empty(0), np.empty(0), np.empty(0))
    e1, e2, d = rows.T
    bad = np.flatnonzero(e1 <= 0.0)
    if bad.size:
        i = bad[0]
        raise BoundError(
            f"entry (E1={e1[i]}, E2={e2[i]}, D={d[i]}) has a transmitted codeword at "
            "the origin; the radial direction is undefined"
        )
    d1, delta = np.sqrt(e1), np.sqrt(d)
    arg = (e1 + d - e2) / (2.0 * d1 * delta)
    over = np.flatnonzero(np.abs(arg) - 1.0 > ARCCOS_SLACK)
    if over.size:
        i = over[0]
        raise BoundError(
            f"entry (E1={e1[i]}, E2={e2[i]}, D={d[i]}) violates the triangle inequality"
        )
    cos = np.clip(arg, -1.0, 1.0)
    sin = np.sqrt(np.maximum(1.0 - cos * cos, 0.0))
    return _Geometry(delta, cos, sin, mult)


def tangential_bound_general(
    tspec: TriangleSpectrum, ch: ChannelParams, q: QuadratureConfig = QuadratureConfig()
) -> BoundResult:
    """Tangential bound from the triangle spectrum.

    Conditioned on the radial noise component ``z``, a competitor wins with
    probability ``Q(β(z)/σ)``.  ``g`` is the ``N(0, σ²)`` density.
    """
    _check_n(tspec, ch)
    geo = _geometry(tspec)
    sigma = ch.sigma
    zq = nx.gauss_quantile(0.5 * q.tail_mass_cutoff, sigma)
    tail = 2.0 * nx.q_function(zq / sigma)
    if geo.mult.size == 0:
        return _result(tail, tail=tail)

    def integrand(z):
        beta = geo.beta(z)
        f = (nx.q_function(beta / sigma) @ geo.mult) if beta.size else np.zeros(np.size(z))
        return np.minimum(f, 1.0) * nx.gauss_pdf(z, sigma)

    res = integrate(
        integrand,
        -zq,
        zq,
        rtol=q.relative_tolerance,
        max_panels=q.max_nodes,
        breakpoints=_pick_breakpoints(geo.steps(), -zq, zq),
    )
    return _result(res.value + tail, tail=tail, err=res.error)


def tangential_sphere_bound_general(
    tspec: TriangleSpectrum, ch: ChannelParams, q: QuadratureConfig = QuadratureConfig()
) -> BoundResult:
    """Tangential-sphere bound from the triangle spectrum.

    For each radial component ``z`` the conditional error probability is
    itself bounded by a sphere bound in the ``(n-1)``-dimensional
    tangential hyperplane: ``∫ min{f_s(z, r), 1} g_s(r) dr`` with
    ``f_s(z, r) = Σ B · cap_{n-1}(arccos(β(z)/r))`` (complement form when
    ``β ≤ 0``) and ``g_s`` the density of ``σ·chi(n-1)``.
    """
    _check_n(tspec, ch)
    n = ch.n
    if n < 3:
        raise BoundError("the tangential-sphere bound needs n >= 3")
    geo = _geometry(tspec)
    sigma = ch.sigma
    # the outer and inner truncations share the tail budget
    cut = 0.5 * q.tail_mass_cutoff
    zq = nx.gauss_quantile(0.5 * cut, sigma)
    outer_tail = 2.0 * nx.q_function(zq / sigma)
    if geo.mult.size == 0:
        return _result(outer_tail, tail=outer_tail)

    r_lo, r_hi = nx.chi_quantiles(n - 1, sigma, 0.5 * cut)
    inner_tail = nx.chi_cdf(r_lo, n - 1, sigma) + nx.chi_sf(r_hi, n - 1, sigma)
    rtol = q.relative_tolerance
    mult = geo.mult
    regular = ~geo.degenerate
    worst_inner_err = 0.0

    def inner(beta_row: np.ndarray) -> float:
        nonlocal worst_inner_err
        # over [r_lo, r_hi] a plane beyond r_hi is never reached and one
        # beyond -r_hi always is; only the rest needs the cap function
        always = (beta_row <= -r_hi) | (~regular & (beta_row == -np.inf))
        step_mass = float(mult[always].sum())
        if step_mass >= 1.0:
            return 1.0
        live = regular & (np.abs(beta_row) < r_hi)
        b = beta_row[live]
        m = mult[live]
        if b.size == 0:
            return step_mass * (1.0 - inner_tail) + inner_tail

        def f_s(r):
            with np.errstate(divide="ignore", invalid="ignore"):
                return _entry_sum(r, m, lambda rr: nx.cap_ratio_cos(n - 1, b / rr)) + step_mass

        def integrand(r):
            return np.minimum(f_s(r), 1.0) * nx.chi_pdf(r, n - 1, sigma)

        edges = _pick_breakpoints(np.abs(b), r_lo, r_hi, 100000)
        edges += _saturation_points(f_s, r_lo, r_hi, edges)
        res = integrate(
            integrand,
            r_lo,
            r_hi,
            rtol=rtol,
            max_panels=q.max_nodes,
            breakpoints=edges,
            edge_singular=True,
        )
        worst_inner_err = max(worst_inner_err, res.error)
        return res.value + inner_tail

    def outer(z):
        z = np.asarray(z, dtype=float)
        betas = geo.beta(z)
        vals = np.array([inner(row) for row in betas])
        return np.minimum(vals, 1.0) * nx.gauss_pdf(z, sigma)

    res = integrate(
        outer,
        -zq,
        zq,
        rtol=rtol,
        max_panels=q.max_nodes,
        breakpoints=_pick_breakpoints(geo.steps(), -zq, zq),
    )
    tail = outer_tail + inner_tail
    return _result(res.value + outer_tail, tail=tail, err=res.error + worst_inner_err)


# ---------------------------------------------------------------------------
# binary tangential bounds


def binary_tangential_bound(
    weights: Mapping[int, float],
    n: int,
    ch: ChannelParams,
    q: QuadratureConfig = QuadratureConfig(),
) -> BoundResult:
    """Tangential bound of a BPSK-modulated binary linear code.

    ``∫_{-∞}^{z*} f_u(z) φ_σ(z) dz + Q(z*/σ)`` with
    ``f_u(z) = Σ_d A_d Q(√d (√n - z) / (σ √(n-d)))``.  The antipodal word
    ``d = n`` contributes the step ``z ≥ √n``.  ``z*`` solves ``f_u = 1`` and
    depends on ``σ``; it is ``inf`` when ``f_u`` stays below 1.
    """
    if ch.n != n:
        raise BoundError(f"weights are for n={n}, channel for n={ch.n}")
    d, a = _binary_weights(weights, n, 2)
    sigma = ch.sigma
    sqn = math.sqrt(n)
    reg = d < n
    scale = np.sqrt(d[reg]) / np.sqrt(n - d[reg])
    a_reg = a[reg]
    a_anti = float(a[~reg].sum())

    def f_vec(z):
        z = np.asarray(z, dtype=float)
        f = nx.q_function((sqn - z[:, None]) * scale / sigma) @ a_reg
        return f + np.where(z >= sqn, a_anti, 0.0)

    def f_u(z: float) -> float:
        return float(f_vec(np.array([z]))[0])

    z_star = math.inf
    if a.sum() > 1.0:
        hi = _upper_bracket(f_u, sqn, sigma)
        if hi is not None:
            lo = min(hi, sqn) - sigma
            step = sigma
            while f_u(lo) >= 1.0:
                step *= 2.0
                lo -= step
            z_star = nx.solve_threshold(f_u, lo, hi)

    zq = nx.gauss_quantile(0.5 * q.tail_mass_cutoff, sigma)
    lower = nx.q_function(zq / sigma)
    stop = min(z_star, zq)
    outside = nx.q_function(stop / sigma)
    tail = lower + (outside if z_star > zq else 0.0)
    res = integrate(
        lambda z: f_vec(z) * nx.gauss_pdf(z, sigma),
        -zq,
        stop,
        rtol=q.relative_tolerance,
        max_panels=q.max_nodes,
        breakpoints=[sqn] if -zq < sqn < stop else [],
    )
    return _result(res.value + outside + lower, z_star, tail, res.error)


def tsb_inner_threshold(d: np.ndarray, a: np.ndarray, n: int) -> float:
    """Radius ``r₁`` of the conditional sphere bound inside the tangential-sphere
    bound: the root of ``Σ_{d<n} A_d cap_{n-1}(arccos(√(nd/(n-d)) / r)) = 1``.

    Contains no ``σ``; ``inf`` when the sum never reaches 1.
    """
    reg = d < n
    rho = np.sqrt(n * d[reg] / (n - d[reg]))
    a = a[reg]
    if rho.size == 0 or 0.5 * a.sum() <= 1.0:
        return math.inf

    def f_s(r: float) -> float:
        return float(np.dot(a, nx.cap_ratio_cos(n - 1, rho / r)))

    lo = float(rho.min())
    hi = _upper_bracket(f_s, 2.0 * lo, lo)
    if hi is None:
        return math.inf
    return nx.solve_threshold(f_s, lo, hi)


def binary_tsb(
    weights: Mapping[int, float],
    n: int,
    ch: ChannelParams,
    q: QuadratureConfig = QuadratureConfig(),
) -> BoundResult:
    """Tangential-sphere bound of a BPSK-modulated binary linear code.

    Below the radial coordinate ``√n`` the conditional sphere bound is
    evaluated on the scaled problem with noise ``σ̃ = √n σ / (√n - z)``,
    where its radius ``r₁`` is fixed; above ``√n`` it is the trivial bound 1:

    ``∫_{-∞}^{√n} f_u(z) φ_σ(z) dz + Q(√n / σ)``.

    ``optimal_parameter`` is ``r₁``.
    """
    if ch.n != n:
        raise BoundError(f"weights are for n={n}, channel for n={ch.n}")
    d, a = _binary_weights(weights, n, 3)
    sigma = ch.sigma
    sqn = math.sqrt(n)
    # the outer and inner truncations share the tail budget
    cut = 0.5 * q.tail_mass_cutoff
    rtol = q.relative_tolerance
    r1 = tsb_inner_threshold(d, a, n)
    reg = d < n
    rho = np.sqrt(n * d[reg] / (n - d[reg]))
    a_reg = a[reg]
    worst_inner_err = 0.0

    def h(r):
        with np.errstate(divide="ignore"):
            return _entry_sum(r, a_reg, lambda rr: nx.cap_ratio_cos(n - 1, rho / rr))

    def f_u(z: float) -> float:
        nonlocal worst_inner_err
        if rho.size == 0:
            return 0.0
        st = sqn * sigma / (sqn - z)
        lo, hi = nx.chi_quantiles(n - 1, st, 0.5 * cut)
        start = float(rho.min())
        extra = 0.0
        if lo > start:
            extra += nx.chi_cdf(lo, n - 1, st)
            start = lo
        stop = min(r1, hi)
        extra += nx.chi_sf(stop, n - 1, st)
        if not stop > start:
            return min(extra, 1.0)
        res = integrate(
            lambda r: h(r) * nx.chi_pdf(r, n - 1, st),
            start,
            stop,
            rtol=rtol,
            max_panels=q.max_nodes,
            breakpoints=_pick_breakpoints(rho, start, stop),
            edge_singular=True,
        )
        worst_inner_err = max(worst_inner_err, res.error)
        return res.value + extra

    zq = nx.gauss_quantile(0.5 * cut, sigma)
    lower_tail = nx.q_function(zq / sigma)
    stop = min(sqn, zq)
    upper = nx.q_function(stop / sigma)
    tail = lower_tail + (upper if zq < sqn else 0.0)
    res = integrate(
        lambda z: np.array([min(f_u(v), 1.0) for v in np.atleast_1d(z)]) * nx.gauss_pdf(z, sigma),
        -zq,
        stop,
        rtol=rtol,
        max_panels=q.max_nodes,
    )
    return _result(res.value + upper + lower_tail, r1, tail, res.error + worst_inner_err)
