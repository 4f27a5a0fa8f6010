import csv
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svgstein.errors import DomainError
from svgstein.special import (
    SOLUTION_INEQUALITIES,
    ScaledValue,
    bessel_i,
    bessel_k,
    inequality_suite,
    int_i_lower,
    int_k_tail,
    log_gamma,
    log_iv,
    log_kv,
)

DATA = Path(__file__).parent / "data" / "bessel_oracle.csv"


def _oracle_rows():
    with open(DATA) as fh:
        return [(float(r["nu"]), float(r["x"]), mp.mpf(r["I_value"]), mp.mpf(r["K_value"]))
                for r in csv.DictReader(fh)]


ROWS = _oracle_rows()


def _rel(sv, ref):
    return float(abs(mp.e ** (mp.mpf(sv.log()) - mp.log(ref)) - 1))


def test_fixture_shape():
    assert len(ROWS) == 9 * 60


def test_bessel_i_matches_oracle():
    worst = 0.0
    for nu, x, iv, _ in ROWS:
        worst = max(worst, _rel(bessel_i(nu, x), iv))
    assert worst <= 1e-10


def test_bessel_k_matches_oracle():
    worst = 0.0
    for nu, x, _, kv in ROWS:
        worst = max(worst, _rel(bessel_k(nu, x), kv))
    assert worst <= 1e-10


def test_log_arrays_match_oracle():
    for nu in sorted({r[0] for r in ROWS}):
        rows = [r for r in ROWS if r[0] == nu]
        xs = np.array([r[1] for r in rows])
        li = log_iv(nu, xs)
        lk = log_kv(nu, xs)
        for (_, _, iv, kv), a, b in zip(rows, li, lk):
            assert abs(a - float(mp.log(iv))) <= 1e-10 * max(1.0, abs(a))
            assert abs(b - float(mp.log(kv))) <= 1e-10 * max(1.0, abs(b))


@pytest.mark.parametrize("nu", [-0.3, 0.0, 0.5, 2.5, 12.0, 40.0])
@pytest.mark.parametrize("x", [1e-5, 0.3, 4.0, 80.0, 900.0])
def test_wronskian(nu, x):
    # I_nu K_(nu+1) + I_(nu+1) K_nu = 1/x
    a = bessel_i(nu, x, scaled=True) * bessel_k(nu + 1, x, scaled=True)
    b = bessel_i(nu + 1, x, scaled=True) * bessel_k(nu, x, scaled=True)
    assert (float(a) + float(b)) * x == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("nu", [0.0, 0.5, 3.0])
@pytest.mark.parametrize("x", [0.7, 5.0, 60.0])
def test_scaled_consistency(nu, x):
    assert float(bessel_i(nu, x, scaled=True)) == pytest.approx(float(bessel_i(nu, x)) * math.exp(-x), rel=1e-13)
    assert float(bessel_k(nu, x, scaled=True)) == pytest.approx(float(bessel_k(nu, x)) * math.exp(x), rel=1e-13)


@pytest.mark.parametrize("nu", [0.0, 0.8, 4.0])
@pytest.mark.parametrize("x", [0.5, 2.0, 15.0])
def test_derivative_identities(nu, x):
    # d/dx [x^nu I_nu] = x^nu I_(nu-1); d/dx [x^nu K_nu] = -x^nu K_(nu-1)
    h = 1e-5 * x
    fi = lambda t: t ** nu * float(bessel_i(nu, t))
    fk = lambda t: t ** nu * float(bessel_k(nu, t))
    di = (fi(x + h) - fi(x - h)) / (2 * h)
    dk = (fk(x + h) - fk(x - h)) / (2 * h)
    assert di == pytest.approx(x ** nu * float(bessel_i(nu - 1, x)), rel=1e-7)
    assert dk == pytest.approx(-x ** nu * float(bessel_k(nu - 1, x)), rel=1e-7)


def test_limits_and_special_orders():
    assert float(bessel_i(0, 0.0)) == 1.0
    assert float(bessel_i(2, 0.0)) == 0.0
    x = 1.0
    assert float(bessel_i(0.5, x)) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sinh(x), rel=1e-14)
    assert float(bessel_k(0.5, x)) == pytest.approx(math.sqrt(math.pi / (2 * x)) * math.exp(-x), rel=1e-14)
    # negative integer order folds to |nu|
    assert float(bessel_i(-2, 1.3)) == pytest.approx(float(bessel_i(2, 1.3)), rel=1e-15)
    assert float(bessel_k(-1.7, 1.3)) == float(bessel_k(1.7, 1.3))


def test_huge_and_tiny_values_are_finite_in_log():
    big = bessel_i(0.5, 2000.0, scaled=True)
    assert math.isfinite(big.log())
    with pytest.raises(OverflowError):
        bessel_i(0.5, 2000.0)
    tiny = bessel_k(0.0, 2000.0)
    assert tiny.log() == pytest.approx(float(mp.log(mp.besselk(0, 2000))), rel=1e-12)
    assert tiny.value == 0.0


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_i(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_i(-0.7, 1.0)
    with pytest.raises(DomainError):
        bessel_k(0.5, 0.0)
    with pytest.raises(DomainError):
        int_i_lower(-0.6, 1.0)
    with pytest.raises(DomainError):
        int_k_tail(0.5, -1.0)
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_scaled_value_arithmetic():
    a = ScaledValue.from_log(800.0)
    b = ScaledValue.from_log(-790.0)
    assert float(a * b) == pytest.approx(math.exp(10.0), rel=1e-13)
    assert 1.0 <= a.mantissa < math.e
    assert float(ScaledValue.zero() * a) == 0.0


def test_monotonic_in_x():
    xs = np.geomspace(1e-3, 300, 200)
    for nu in (0.0, 1.5, 7.0):
        li = log_iv(nu, xs)
        lk = log_kv(nu, xs)
        assert np.all(np.diff(li) > 0)
        assert np.all(np.diff(lk) < 0)


def test_log_gamma():
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-15)
    assert log_gamma(171.5) == pytest.approx(float(mp.loggamma(171.5)), rel=1e-14)


# ---------------------------------------------------------------------------
# weighted integrals


INTEGRALS = Path(__file__).parent / "data" / "bessel_integrals.csv"


def _integral_rows():
    with open(INTEGRALS) as fh:
        return [(float(r["nu"]), float(r["x"]), int(r["w"]), mp.mpf(r["I_lower"]), mp.mpf(r["K_tail"]))
                for r in csv.DictReader(fh)]


def test_int_i_lower_known_value():
    assert float(int_i_lower(0.5, 1.0, 0)) == pytest.approx(0.433315653795, rel=1e-10)


def test_int_k_tail_known_value():
    assert float(int_k_tail(0.5, 10.0, 0)) == pytest.approx(5.69003738e-05, rel=1e-8)


def test_integrals_match_oracle():
    rows = _integral_rows()
    assert len(rows) == 60
    for nu, x, w, ri, rk in rows:
        if x > 0:
            assert _rel(int_i_lower(nu, x, w), ri) <= 1e-10, (nu, x, w)
        else:
            assert float(int_i_lower(nu, x, w)) == 0.0
        # x = 0 exercises the closed form of the full Mellin integral
        assert _rel(int_k_tail(nu, x, w), rk) <= 1e-10, (nu, x, w)


def test_integrals_at_zero():
    assert float(int_i_lower(1.0, 0.0)) == 0.0
    # tail from 0 of t^(nu+1) K_nu is 2^nu Gamma(nu+1)
    assert float(int_k_tail(2.0, 0.0, 1)) == pytest.approx(4 * 2.0, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(-0.45, 20.0), x=st.floats(1e-3, 200.0))
def test_integral_antiderivative_property(nu, x):
    # d/dx of the weight-1 lower integral is x^(nu+1) I_nu(x)
    h = 1e-6 * x
    lo = int_i_lower(nu, x - h, 1).log()
    hi = int_i_lower(nu, x + h, 1).log()
    deriv = (math.exp(hi) - math.exp(lo)) / (2 * h)
    target = math.exp((nu + 1) * math.log(x) + float(log_iv(nu, x)))
    assert deriv == pytest.approx(target, rel=1e-5)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(-0.45, 20.0), x=st.floats(1e-2, 100.0))
def test_integrals_positive_and_monotone(nu, x):
    a = int_i_lower(nu, x, 0)
    b = int_k_tail(nu, x, 0)
    assert a.mantissa > 0 and b.mantissa > 0
    assert int_i_lower(nu, x * 1.1, 0).log() > a.log()
    assert int_k_tail(nu, x * 1.1, 0).log() < b.log()


# ---------------------------------------------------------------------------
# inequality catalogue


def test_inequality_catalogue_holds():
    nus = [-0.45, -0.25, 0.0, 0.5, 1.0, 2.5, 5.0, 12.0, 24.5]
    xs = np.geomspace(1e-6, 500.0, 120)
    res = inequality_suite(nus, xs)
    assert len(SOLUTION_INEQUALITIES) == 8
    for key, r in res.items():
        assert r.points > 0, key
        assert r.holds, (key, r.min_slack, r.worst_nu, r.worst_x)


def test_inequality_suite_rejects_bad_order():
    with pytest.raises(DomainError):
        inequality_suite([-0.5], [1.0])


@pytest.mark.parametrize("nu", [-0.45, 0.0, 2.0, 17.22, 24.5])
@pytest.mark.parametrize("x", [1e-6, 1e-2, 1.0, 1.999, 3.0, 50.0])
def test_double_integral_slack_against_series(nu, x):
    # 1 - lhs/rhs with lhs = int_0^x (x - t) t^nu I_nu(t) dt from its power series
    from svgstein.special import _double_int_slack, _scalar_log_iv
    with mp.workdps(60):
        n, z = mp.mpf(nu), mp.mpf(x)
        lhs = mp.nsum(lambda k: z ** (2 * k + 2 * n + 2) / (2 ** (2 * k + n) * mp.factorial(k) * mp.gamma(k + n + 1)
                                                           * (2 * k + 2 * n + 1) * (2 * k + 2 * n + 2)), [0, mp.inf])
        rhs = 2 * (n + 2) / (2 * n + 1) * z ** n * mp.besseli(n + 2, z)
        ref = float(1 - lhs / rhs)
    rhs_log = math.log(2 * (nu + 2) / (2 * nu + 1)) + nu * math.log(x) + _scalar_log_iv(nu + 2, x)
    got = _double_int_slack(nu, x, rhs_log)
    assert got > 0
    assert got == pytest.approx(ref, rel=1e-8)
