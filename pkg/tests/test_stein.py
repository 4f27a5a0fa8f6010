import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svgstein.distribution import SvgParams, svg_cdf
from svgstein.errors import DomainError
from svgstein.stein import (
    SteinSolution,
    apply_t_r,
    indicator,
    lipschitz,
    residual,
    sign,
    sine,
    smoothed_indicator,
    solution_bound_constants,
    solve,
    solve_d1,
    solve_d2,
    verify_solution_bounds,
)

mp.mp.dps = 20


def _kernel(nu, t):
    return abs(t) ** nu * mp.besselk(nu, abs(t))


def mp_solution(r, htilde, x, breaks=()):
    """Standard-form solution (sigma = 1, mu = 0) at x > 0 from the representation
    that integrates h~ over (-inf, x) instead of (x, inf); the two agree because
    h~ has mean zero under the target."""
    nu = mp.mpf(r - 1) / 2
    x = mp.mpf(x)
    inner = [b for b in breaks if 0 < b < x]
    a = mp.quad(lambda t: t ** nu * mp.besseli(nu, t) * htilde(t), [0] + inner + [x])
    left = [b for b in breaks if b < x and b != 0]
    pts = sorted(set([-mp.inf, -40, -10, -1] + left + [0, x]))
    pts = [p for p in pts if p <= x]
    b = mp.quad(lambda t: _kernel(nu, t) * htilde(t), pts)
    return -mp.besselk(nu, x) / x ** nu * a + mp.besseli(nu, x) / x ** nu * b


# ---------------------------------------------------------------------------
# representation and oracle agreement

@pytest.mark.parametrize("r", [0.6, 2.0, 4.5])
def test_matches_other_side_representation_indicator(r):
    z = 0.7
    p = SvgParams(r)
    m = svg_cdf(p, z)
    ht = lambda t: (1 if t <= z else 0) - m
    s = SteinSolution(p, indicator(z))
    for x in (0.3, 1.5, 4.0):
        ref = float(mp_solution(r, ht, x, breaks=(z,)))
        assert solve(s, x) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_matches_other_side_representation_negative_x():
    # reflect: f_h(-x) = -f_{h(-.)}(x)
    r, z = 1.5, -0.4
    p = SvgParams(r)
    m = svg_cdf(p, z)
    ht_reflected = lambda t: (1 if -t <= z else 0) - m
    s = SteinSolution(p, indicator(z))
    for x in (0.2, 2.5):
        ref = -float(mp_solution(r, ht_reflected, x, breaks=(-z,)))
        assert solve(s, -x) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_general_parameters_by_change_of_variables():
    r, sigma, mu = 2.5, 1.7, -0.8
    z = 0.5
    s = SteinSolution(SvgParams(r, sigma, mu), indicator(z))
    s0 = SteinSolution(SvgParams(r), indicator((z - mu) / sigma))
    for x in (-3.0, 0.1, 2.0):
        assert solve(s, x) == pytest.approx(solve(s0, (x - mu) / sigma) / sigma, rel=1e-10)
        assert solve_d1(s, x) == pytest.approx(solve_d1(s0, (x - mu) / sigma) / sigma ** 2, rel=1e-9)


# ---------------------------------------------------------------------------
# equation residual and derivatives

@pytest.mark.parametrize("r,sigma,mu", [(0.5, 1.0, 0.0), (1.0, 0.6, 1.0), (3.0, 2.0, -1.0), (20.0, 1.0, 0.0)])
def test_ode_residual(r, sigma, mu):
    p = SvgParams(r, sigma, mu)
    for h in (sign(mu), indicator(mu + 0.4), smoothed_indicator(mu, 0.3), sine(1.3)):
        s = SteinSolution(p, h)
        for x in np.linspace(mu - 8 * sigma, mu + 8 * sigma, 17) + 0.0123:
            assert residual(s, x) <= 1e-6 * (1 + abs(s.htilde(x)))


def test_equation_form_of_second_derivative():
    p = SvgParams(2.5, 1.3, 0.2)
    s = SteinSolution(p, sine(0.8))
    for x in (-2.0, 0.9, 5.0):
        f, f1, f2 = solve(s, x), solve_d1(s, x), solve_d2(s, x)
        d = x - p.mu
        lhs = p.sigma ** 2 * d * f2 + p.sigma ** 2 * p.r * f1 - d * f
        assert lhs == pytest.approx(s.htilde(x), abs=1e-12)
        assert f2 == pytest.approx(s.evaluate(x).f2_direct, rel=1e-7, abs=1e-10)


def test_first_derivative_matches_finite_differences():
    for r in (0.7, 2.0, 6.0):
        s = SteinSolution(SvgParams(r), indicator(0.5))
        for x in (-1.5, 0.2, 1.1, 3.0):
            h = 1e-5
            fd = (solve(s, x + h) - solve(s, x - h)) / (2 * h)
            assert solve_d1(s, x) == pytest.approx(fd, abs=1e-5)


def test_second_derivative_undefined_at_centre():
    s = SteinSolution(SvgParams(2.0), sign())
    with pytest.raises(DomainError):
        solve_d2(s, 0.0)
    with pytest.raises(DomainError):
        s.evaluate(0.0)


def test_constant_test_function_gives_zero_solution():
    h = lipschitz(lambda x: np.full_like(np.asarray(x, dtype=float), 3.0), 0.0, bounded=True, label="const")
    s = SteinSolution(SvgParams(1.5), h)
    assert s.h_mean == pytest.approx(3.0, abs=1e-12)
    for x in (-2.0, 0.5, 4.0):
        pt = s.evaluate(x)
        assert max(abs(pt.f), abs(pt.f1), abs(pt.f2)) < 1e-10
        assert abs(apply_t_r(s, x)) < 1e-10
    assert abs(solve_d1(s, 0.0)) < 1e-10


# ---------------------------------------------------------------------------
# characteristic values

@pytest.mark.parametrize("r,sigma", [(0.5, 1.0), (1.0, 1.0), (2.5, 1.0), (2.5, 2.0), (7.0, 0.5)])
def test_sign_value_at_centre(r, sigma):
    # f(0+) = -sqrt(pi) Gamma(r/2) / (2 sigma Gamma((r+1)/2)): negative, scaling as 1/sigma
    s = SteinSolution(SvgParams(r, sigma), sign())
    ref = -math.sqrt(math.pi) * math.gamma(r / 2) / (2 * sigma * math.gamma((r + 1) / 2))
    assert solve(s, 1e-9 * sigma) == pytest.approx(ref, abs=1e-6)
    assert solve(s, 0.0) == pytest.approx(ref, rel=1e-9)
    if r == 1.0 and sigma == 1.0:
        assert ref == pytest.approx(-math.pi / 2)


@pytest.mark.parametrize("r,sigma,mu", [(0.5, 1.0, 0.0), (2.0, 0.7, 1.0), (5.0, 2.0, -1.0)])
def test_derivative_at_centre(r, sigma, mu):
    p = SvgParams(r, sigma, mu)
    s = SteinSolution(p, smoothed_indicator(mu + 0.03, 0.1))
    expect = s.htilde(mu) / (sigma ** 2 * r)
    assert solve_d1(s, mu) == pytest.approx(expect, rel=1e-14)
    # the limit from both sides, by the symmetric average of one-sided values
    h = 1e-7 * sigma
    limit = 0.5 * (s.evaluate(mu + h).f1 + s.evaluate(mu - h).f1)
    assert limit == pytest.approx(expect, abs=1e-8)


@pytest.mark.parametrize("r", [0.5, 1.0, 3.0, 20.0])
def test_indicator_derivative_jump(r):
    s = SteinSolution(SvgParams(r), indicator(0.0))
    right = s.evaluate(1e-8).f1
    left = s.evaluate(-1e-8).f1
    assert left - right == pytest.approx(1 / r, abs=1e-6)
    assert solve_d1(s, 0.0, side=1) == pytest.approx(-1 / (2 * r), rel=1e-12)
    assert solve_d1(s, 0.0, side=-1) == pytest.approx(1 / (2 * r), rel=1e-12)
    if r == 3.0:
        assert right == pytest.approx(-1 / 6, abs=1e-6)
        assert left == pytest.approx(1 / 6, abs=1e-6)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 3.5])
def test_x_f_limit(r):
    for sigma in (1.0, 2.0):
        s = SteinSolution(SvgParams(r, sigma), sign())
        x = 50 * sigma
        assert x * solve(s, x) == pytest.approx(-1.0, abs=1e-3)
        assert -x * solve(s, -x) == pytest.approx(1.0, abs=1e-3)


def test_x_f_limit_correction_for_larger_r():
    # x f(x) + 1 ~ (r - 2)/x^2 (x in units of sigma), so r = 5 needs a larger x
    s = SteinSolution(SvgParams(5.0), sign())
    assert 50 * solve(s, 50.0) + 1 == pytest.approx(3 / 2500, rel=0.05)
    s1 = SteinSolution(SvgParams(1.0), sign())
    assert 50 * solve(s1, 50.0) + 1 == pytest.approx(-1 / 2500, rel=0.05)
    assert 200 * solve(s, 200.0) == pytest.approx(-1.0, abs=1e-3)


# ---------------------------------------------------------------------------
# the operator T_r

@pytest.mark.parametrize("r,sigma", [(0.5, 1.0), (1.0, 0.5), (2.0, 1.0), (6.0, 1.7)])
def test_t_r_identity(r, sigma):
    rng = np.random.default_rng(int(10 * r))
    for h in (indicator(0.3), sine(2.0)):
        s = SteinSolution(SvgParams(r, sigma), h)
        for x in rng.uniform(-6 * sigma, 6 * sigma, 20):
            lhs = sigma ** 2 * apply_t_r(s, x)
            assert lhs == pytest.approx(s.htilde(x) + x * solve(s, x), abs=1e-6)


def test_t_r_value_from_oracle():
    # T_r f'(x) = x f''(x) + r f'(x); f' and f'' of the oracle by numerical differentiation
    r, z, x = 2.0, 1.0, 0.5
    m = svg_cdf(SvgParams(r), z)
    ht = lambda t: (1 if t <= z else 0) - m
    f = lambda u: mp_solution(r, ht, u, breaks=(z,))
    f1 = mp.diff(f, x)
    f2 = mp.diff(f, x, 2)
    ref = float(x * f2 + r * f1)
    s = SteinSolution(SvgParams(r), indicator(z))
    assert apply_t_r(s, x) == pytest.approx(ref, rel=1e-6)


def test_t_r_requires_centred_target():
    with pytest.raises(DomainError):
        apply_t_r(SteinSolution(SvgParams(2.0, 1.0, 1.0), sign(1.0)), 0.5)


# ---------------------------------------------------------------------------
# test-function metadata

def test_test_function_metadata():
    p = SvgParams(2.0)
    assert sign().htilde_sup(p) == 1.0
    assert indicator(0.0).htilde_sup(p) == pytest.approx(0.5)
    assert smoothed_indicator(0.0, 0.1).lip_const == pytest.approx(10.0)
    assert sine(3.0).lip_const == 1.0
    with pytest.raises(DomainError):
        smoothed_indicator(0.0, 0.0)
    with pytest.raises(DomainError):
        sine(-1.0)
    with pytest.raises(DomainError):
        indicator(0.0).derivative(1.0)


def test_generic_mean_matches_closed_forms():
    p = SvgParams(1.7, 1.2, 0.3)
    for h in (sine(0.9), smoothed_indicator(0.5, 0.4)):
        generic = lipschitz(h.func, h.lip_const, h.deriv, kinks=h.kinks, bounded=True)
        assert generic.mean(p) == pytest.approx(h.mean(p), abs=1e-9)


# ---------------------------------------------------------------------------
# bound verification

def test_sup_f_sign_example():
    reps = verify_solution_bounds(SvgParams(1.0), [sign()], np.linspace(-5, 5, 21))
    rep = next(r for r in reps if r.bound_id == "sup_f_bounded")
    assert rep.empirical == pytest.approx(math.pi / 2, rel=1e-8)
    assert rep.bound_value == pytest.approx(1 + math.pi * math.sqrt(math.pi) / 2, rel=1e-12)
    assert rep.ratio < 1


def test_bound_constants_catalogue():
    c = solution_bound_constants(2.0, 1.0)
    assert c["sup_xf_bounded"][2] == pytest.approx(1.75)
    assert c["sup_tr_f1_bounded"][2] == pytest.approx(2.75)
    assert c["sup_tr_f1_deriv_lipschitz"][2] == pytest.approx(2.25 * (5 + 1 / 3))
    assert len([k for k in c if k.startswith("indicator_")]) == 6


@settings(max_examples=8, deadline=None)
@given(st.floats(0.3, 15.0), st.floats(0.3, 3.0), st.floats(-3.0, 3.0))
def test_bounds_hold_randomised(r, sigma, z):
    p = SvgParams(r, sigma)
    grid = sigma * np.array([-20, -4, -1, -0.2, -0.01, 0.01, 0.2, 1, 4, 20])
    reps = verify_solution_bounds(p, [indicator(z * sigma), sine(1.0 / sigma)], grid)
    assert all(r.holds for r in reps)
