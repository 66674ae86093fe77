import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from oracles import cap_ratio_quad, q_exact, q_inverse
from mlbounds.numerics import (
    BracketError,
    cap_ratio,
    cap_ratio_cos,
    chi_cdf,
    chi_pdf,
    chi_quantiles,
    chi_sf,
    gauss_quantile,
    q_function,
    solve_threshold,
)
from mlbounds.quadrature import integrate

# -- Q -----------------------------------------------------------------------


def test_q_fixed_points():
    assert q_function(0.0) == 0.5
    assert q_function(math.inf) == 0.0
    assert q_function(-math.inf) == 1.0


def test_q_five_percent_point():
    x = 1.6448536269514722
    assert q_inverse(0.05) == pytest.approx(x, abs=1e-15)
    assert abs(q_function(x) - 0.05) <= 1e-12


@given(st.floats(-8.0, 37.0))
def test_q_relative_accuracy(x):
    assert q_function(x) == pytest.approx(q_exact(x), rel=1e-14, abs=0)


def test_q_vectorized():
    x = np.array([-1.0, 0.0, 1.0])
    assert np.allclose(q_function(x), [q_exact(v) for v in x], rtol=1e-15)


# -- cap ratio ---------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 7, 100, 10**5])
def test_cap_ratio_boundaries(n):
    assert cap_ratio(n, 0.0) == 0.0
    assert cap_ratio(n, math.pi / 2) == 0.5
    assert cap_ratio(n, math.pi) == 1.0


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4, math.pi / 3])
def test_cap_ratio_n3_closed_form(theta):
    assert abs(cap_ratio(3, theta) - (1.0 - math.cos(theta)) / 2.0) <= 1e-12


@given(st.integers(2, 40), st.floats(0.0, math.pi))
def test_cap_ratio_matches_direct_quadrature(n, theta):
    ref = cap_ratio_quad(n, theta)
    assert cap_ratio(n, theta) == pytest.approx(ref, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("n", [1000, 10**4, 10**5])
@pytest.mark.parametrize("offset", [-3.0, -0.5, 0.5, 3.0])
def test_cap_ratio_large_dimension(n, offset):
    # caps a few standard deviations (1/√n) away from the equator
    theta = math.pi / 2 + offset / math.sqrt(n)
    with mp.workdps(40):
        c = mp.cos(mpf(theta))
        half = mp.betainc(mpf(1) / 2, mpf(n - 1) / 2, 0, c * c, regularized=True) / 2
        ref = float(0.5 - half if c >= 0 else 0.5 + half)
    assert cap_ratio(n, theta) == pytest.approx(ref, rel=1e-10)


@given(st.integers(2, 50), st.floats(-1.0, 1.0))
def test_cap_ratio_reflection(n, c):
    assert cap_ratio_cos(n, c) + cap_ratio_cos(n, -c) == pytest.approx(1.0, abs=1e-14)


def test_cap_ratio_clips_and_complement_is_exactly_one():
    # a cosine below -1 means the whole sphere: p2 is exactly 1
    assert cap_ratio_cos(5, -1.5) == 1.0
    assert cap_ratio_cos(5, 1.0 + 1e-16) == 0.0


def test_cap_ratio_domain():
    with pytest.raises(ValueError):
        cap_ratio(3, -0.1)
    with pytest.raises(ValueError):
        cap_ratio(1, 0.3)


# -- chi and Gaussian helpers -----------------------------------------------


@pytest.mark.parametrize("dof", [1, 2, 6, 22])
def test_chi_helpers_consistent(dof):
    sigma = 0.7
    lo, hi = chi_quantiles(dof, sigma, 1e-12)
    assert chi_cdf(lo, dof, sigma) == pytest.approx(1e-12, rel=1e-6)
    assert chi_sf(hi, dof, sigma) == pytest.approx(1e-12, rel=1e-6)
    res = integrate(lambda r: chi_pdf(r, dof, sigma), 0.0, hi, rtol=1e-12)
    assert res.value == pytest.approx(1.0 - 1e-12, abs=1e-11)


def test_gauss_quantile():
    assert gauss_quantile(0.05, 2.0) == pytest.approx(2.0 * 1.6448536269514722, rel=1e-14)


# -- threshold solver --------------------------------------------------------


def test_solve_identity_and_cube():
    assert solve_threshold(lambda r: r, 0.0, 2.0) == pytest.approx(1.0, abs=2e-12)
    assert solve_threshold(lambda r: r**3, 0.0, 2.0) == pytest.approx(1.0, abs=2e-12)


def test_solve_bracket_violation():
    with pytest.raises(BracketError):
        solve_threshold(lambda r: r, 2.0, 3.0)
    with pytest.raises(BracketError):
        solve_threshold(lambda r: r, 1.0, 1.0)


def test_solve_jump():
    assert solve_threshold(lambda r: 2.0 if r >= 0.3 else 0.0, 0.0, 1.0) == pytest.approx(0.3, abs=1e-11)


@given(st.floats(0.01, 10.0), st.floats(0.1, 5.0))
def test_solve_monotone_root(root, power):
    f = lambda r: (r / root) ** power
    got = solve_threshold(f, 0.0, 2.0 * root)
    assert abs(got - root) <= 1e-12 * 2.0 * root * 1.0001


# -- quadrature --------------------------------------------------------------


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (lambda x: x**2, 0.0, 1.0, 1.0 / 3.0),
        (np.exp, -1.0, 2.0, math.e**2 - math.exp(-1.0)),
        (lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -10.0, 10.0, 1.0 - 2 * q_exact(10.0)),
        (lambda x: np.sqrt(x), 0.0, 1.0, 2.0 / 3.0),
        (lambda x: 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0, 0.4 * math.atan(5.0)),
    ],
)
def test_integrate_known(f, a, b, exact):
    res = integrate(f, a, b, rtol=1e-11)
    assert res.converged
    assert res.value == pytest.approx(exact, rel=1e-10)
    assert res.error <= 1e-11 * abs(res.value)


def test_integrate_breakpoints_at_kink():
    f = lambda x: np.abs(x - 0.3)
    res = integrate(f, 0.0, 1.0, rtol=1e-13, breakpoints=[0.3])
    assert res.panels == 2
    assert res.value == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, rel=1e-14)


def test_integrate_step_function_converges_anyway():
    f = lambda x: (x > 1 / 3).astype(float)
    res = integrate(f, 0.0, 1.0, rtol=1e-9, max_panels=5000)
    assert res.value == pytest.approx(2.0 / 3.0, rel=1e-8)


def test_integrate_reports_nonconvergence():
    res = integrate(lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, rtol=1e-14, max_panels=4)
    assert not res.converged and res.panels <= 4


def test_integrate_empty_interval():
    assert integrate(np.exp, 1.0, 1.0).value == 0.0
