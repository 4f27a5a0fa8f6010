"""Modified Bessel functions, weighted Bessel integrals and the gamma function.

Values that can overflow are returned as :class:`ScaledValue` objects, which
store ``mantissa * exp(log_scale)``. The array helpers :func:`log_iv` and
:func:`log_kv` are what the rest of the package uses internally.

The evaluators wrap the exponentially scaled AMOS routines in
``scipy.special`` (``ive``/``kve``). A leading-order series takes over in the
corners where those routines underflow or overflow.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from ._quad import quad
from .errors import DomainError

_LOG_MAX = math.log(np.finfo(float).max)
_TINY = 1e-290
_HUGE = 1e290


@dataclass(frozen=True)
class ScaledValue:
    """A positive (or zero) number stored as ``mantissa * exp(log_scale)``.

    The mantissa lies in ``[1, e)`` unless the value is zero, in which case
    both fields are zero.
    """

    mantissa: float
    log_scale: float

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0)

    @classmethod
    def from_log(cls, logv):
        """Build from the natural logarithm of the value."""
        if logv == -math.inf:
            return cls.zero()
        if not math.isfinite(logv):
            raise OverflowError("value is not finite")
        k = math.floor(logv)
        return cls._normalise(math.exp(logv - k), float(k))

    @classmethod
    def from_parts(cls, m, log_scale):
        """Build from an unnormalised positive mantissa and a log scale."""
        if m == 0.0:
            return cls.zero()
        if not (m > 0.0 and math.isfinite(m)):
            raise ValueError("mantissa must be positive and finite")
        return cls._normalise(m, float(log_scale))

    @classmethod
    def _normalise(cls, m, s):
        j = math.floor(math.log(m))
        if j != 0:
            m = m * math.exp(-j)
            s += j
        # guard the half-open interval against rounding at the ends
        while m >= math.e:
            m /= math.e
            s += 1.0
        while m < 1.0:
            m *= math.e
            s -= 1.0
        return cls(m, s)

    def log(self):
        """Natural logarithm of the represented value."""
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(self.mantissa) + self.log_scale

    @property
    def value(self):
        """The value as a float; raises OverflowError above the float range and
        underflows to 0 below it."""
        if self.mantissa == 0.0:
            return 0.0
        if self.log_scale + 1.0 > _LOG_MAX:
            raise OverflowError("value exceeds the floating point range")
        return self.mantissa * math.exp(self.log_scale)

    def __float__(self):
        return self.value

    def __mul__(self, other):
        if isinstance(other, ScaledValue):
            if self.mantissa == 0.0 or other.mantissa == 0.0:
                return ScaledValue.zero()
            return ScaledValue._normalise(self.mantissa * other.mantissa,
                                          self.log_scale + other.log_scale)
        other = float(other)
        if other < 0:
            raise ValueError("ScaledValue holds nonnegative numbers only")
        if other == 0.0 or self.mantissa == 0.0:
            return ScaledValue.zero()
        return ScaledValue.from_log(self.log() + math.log(other))

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# array helpers

def _check_i_order(nu):
    if nu < -0.5 and nu != math.floor(nu):
        raise DomainError(f"I_nu is only supported for nu >= -1/2 or integer nu (got {nu})")
    if nu < 0 and nu == math.floor(nu):
        return -nu
    return nu


def _log_iv_series(nu, x):
    # log I_nu(x) from the power series; used where ive underflows
    x = np.asarray(x, dtype=float)
    k = np.arange(40.0)
    lq = np.log(x * x / 4.0)[..., None]
    terms = k * lq - sc.gammaln(k + 1.0) - sc.gammaln(nu + k + 1.0)
    return nu * np.log(x / 2.0) + sc.logsumexp(terms, axis=-1)


def log_iv(nu, x):
    """Natural logarithm of I_nu(x) for x >= 0 (array aware).

    Parameters
    ----------
    nu : float
        Order, at least -1/2 unless an integer.
    x : array_like
        Nonnegative arguments.

    Returns
    -------
    ndarray or float
    """
    nu = _check_i_order(float(nu))
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("I_nu requires x >= 0")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        v = sc.ive(nu, xa)
        out = np.log(v) + xa
        bad = ~(v > _TINY) & (xa > 0)
        if np.any(bad):
            out = np.where(bad, _log_iv_series(nu, np.where(bad, xa, 1.0)), out)
        zero = xa == 0
        if np.any(zero):
            z = 0.0 if nu == 0 else (-math.inf if nu > 0 else math.inf)
            out = np.where(zero, z, out)
    return out if out.ndim else float(out)


def log_kv(nu, x):
    """Natural logarithm of K_nu(x) for x > 0 (array aware).

    The order enters through |nu|, so K_{-nu} and K_nu agree exactly.
    """
    nu = abs(float(nu))
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("K_nu requires x > 0")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        v = sc.kve(nu, xa)
        out = np.log(v) - xa
        bad = ~(v < _HUGE)
        if np.any(bad):
            # leading small-x behaviour; only reached for large nu and tiny x
            corr = np.log1p(-xa * xa / (4.0 * (nu - 1.0))) if nu > 1 else 0.0
            lead = sc.gammaln(nu) + (nu - 1.0) * math.log(2.0) - nu * np.log(xa) + corr
            out = np.where(bad, lead, out)
    return out if out.ndim else float(out)


def iv_scaled(nu, x):
    """exp(-x) I_nu(x), vectorised."""
    return sc.ive(_check_i_order(float(nu)), x)


def kv_scaled(nu, x):
    """exp(x) K_nu(x), vectorised."""
    return sc.kve(abs(float(nu)), x)


# ---------------------------------------------------------------------------
# public evaluators

def bessel_i(nu, x, scaled=False):
    """Modified Bessel function of the first kind.

    Parameters
    ----------
    nu : float
        Order (>= -1/2, or any integer).
    x : float
        Argument, x >= 0.
    scaled : bool
        If true, return exp(-x) I_nu(x).

    Returns
    -------
    ScaledValue

    Raises
    ------
    DomainError
        For x < 0 or an unsupported order.
    OverflowError
        If ``scaled`` is false and I_nu(x) exceeds the float range.
    """
    x = float(x)
    if x < 0:
        raise DomainError("bessel_i requires x >= 0")
    nu = _check_i_order(float(nu))
    if x == 0.0:
        if nu == 0:
            return ScaledValue.from_parts(1.0, 0.0)
        if nu > 0:
            return ScaledValue.zero()
        raise OverflowError("I_nu(0) is infinite for negative nu")
    v = float(sc.ive(nu, x))
    if v > _TINY:
        if scaled:
            return ScaledValue.from_parts(v, 0.0)
        k = math.floor(x)
        sv = ScaledValue.from_parts(v * math.exp(x - k), float(k))
    else:
        lv = float(_log_iv_series(nu, x))
        sv = ScaledValue.from_log(lv - x if scaled else lv)
        if scaled:
            return sv
    if sv.log() > _LOG_MAX:
        raise OverflowError(f"I_{nu}({x}) overflows; request scaled=True")
    return sv


def bessel_k(nu, x, scaled=False):
    """Modified Bessel function of the second kind.

    Parameters
    ----------
    nu : float
        Order; only |nu| is used.
    x : float
        Argument, x > 0.
    scaled : bool
        If true, return exp(x) K_nu(x).

    Returns
    -------
    ScaledValue
    """
    x = float(x)
    if not x > 0:
        raise DomainError("bessel_k requires x > 0")
    nu = abs(float(nu))
    v = float(sc.kve(nu, x))
    if v < _HUGE:
        if scaled:
            return ScaledValue.from_parts(v, 0.0)
        k = math.floor(x)
        return ScaledValue.from_parts(v * math.exp(k - x), -float(k))
    lv = float(log_kv(nu, x))
    return ScaledValue.from_log(lv + x if scaled else lv)


def log_gamma(x):
    """log Gamma(x) for x > 0."""
    x = float(x)
    if not x > 0:
        raise DomainError("log_gamma requires x > 0")
    return float(sc.gammaln(x))


# ---------------------------------------------------------------------------
# weighted integrals

def _check_integral_args(nu, x, w):
    if not nu > -0.5:
        raise DomainError("Bessel integrals require nu > -1/2")
    if x < 0:
        raise DomainError("Bessel integrals require x >= 0")
    if w not in (0, 1):
        raise DomainError("weight_power must be 0 or 1")


def _scalar_log_iv(nu, y):
    v = sc.ive(nu, y)
    if v > _TINY:
        return math.log(v) + y
    return float(_log_iv_series(nu, y))


def _scalar_log_kv(nu, y):
    v = sc.kve(nu, y)
    if v < _HUGE:
        return math.log(v) - y
    return float(log_kv(nu, y))


def _log_i_lower0(nu, x):
    # log of int_0^x t^nu I_nu(t) dt, written as x^(nu+1) I_nu(x) J with
    # J = int_0^1 s^(2 nu) [s^-nu I_nu(xs) / I_nu(x)] ds; the bracket is smooth
    lix = _scalar_log_iv(nu, x)
    at0 = nu * math.log(x / 2.0) - math.lgamma(nu + 1.0) - lix

    def g(s):
        if s <= 0.0:
            return math.exp(at0)
        return math.exp(_scalar_log_iv(nu, x * s) - nu * math.log(s) - lix)

    if x <= 4.0:
        j = quad(g, 0.0, 1.0, weight="alg", wvar=(2.0 * nu, 0.0))
    else:
        a = 0.5
        j = quad(g, 0.0, a, weight="alg", wvar=(2.0 * nu, 0.0), floor=1e-300)
        pts = [1.0 - c / x for c in (1.0, 4.0, 16.0, 64.0) if 1.0 - c / x > a]
        j += quad(lambda s: s ** (2.0 * nu) * g(s), a, 1.0, points=pts)
    return (nu + 1.0) * math.log(x) + lix + math.log(j)


def tail_cutoff(nu):
    """Truncation length used for the K-tail integrals."""
    return 60.0 + 5.0 * math.log1p(nu * nu) + 2.0 * abs(nu)


def _log_k_tail0(nu, x):
    # log of int_x^inf t^nu K_nu(t) dt = x^nu K_nu(x) J with
    # J = int_0^U (1 + u/x)^nu K_nu(x+u) / K_nu(x) du
    anu = abs(nu)
    lkx = _scalar_log_kv(anu, x)

    def g(u):
        return math.exp(nu * math.log1p(u / x) + _scalar_log_kv(anu, x + u) - lkx)

    cut = tail_cutoff(nu)
    pts = []
    p = x
    while p < 1.0:
        pts.append(p)
        p *= 8.0
    pts += [1.0, 3.0, 10.0, 30.0]
    j = quad(g, 0.0, cut, points=pts)
    return nu * math.log(x) + lkx + math.log(j)


def int_i_lower(nu, x, weight_power=0):
    """Integral of t^(nu+w) I_nu(t) over [0, x].

    Parameters
    ----------
    nu : float
        Order, nu > -1/2.
    x : float
        Upper limit, x >= 0.
    weight_power : {0, 1}
        Extra power w of t in the integrand.

    Returns
    -------
    ScaledValue

    Notes
    -----
    The w = 1 case uses the antiderivative x^(nu+1) I_(nu+1)(x).
    """
    nu, x = float(nu), float(x)
    _check_integral_args(nu, x, weight_power)
    if x == 0.0:
        return ScaledValue.zero()
    if weight_power == 1:
        return ScaledValue.from_log((nu + 1.0) * math.log(x) + _scalar_log_iv(nu + 1.0, x))
    return ScaledValue.from_log(_log_i_lower0(nu, x))


def int_k_tail(nu, x, weight_power=0):
    """Integral of t^(nu+w) K_nu(t) over [x, infinity).

    Parameters
    ----------
    nu : float
        Order, nu > -1/2.
    x : float
        Lower limit, x >= 0.
    weight_power : {0, 1}
        Extra power w of t in the integrand.

    Returns
    -------
    ScaledValue

    Notes
    -----
    At x = 0 the Mellin transform of K_nu gives the closed form
    2^(nu+w-1) Gamma((w+1)/2) Gamma(nu + (w+1)/2). The w = 1 case uses the
    antiderivative -x^(nu+1) K_(nu+1)(x).
    """
    nu, x = float(nu), float(x)
    _check_integral_args(nu, x, weight_power)
    w = weight_power
    if x == 0.0:
        return ScaledValue.from_log((nu + w - 1.0) * math.log(2.0)
                                    + math.lgamma((w + 1.0) / 2.0)
                                    + math.lgamma(nu + (w + 1.0) / 2.0))
    if w == 1:
        return ScaledValue.from_log((nu + 1.0) * math.log(x) + _scalar_log_kv(nu + 1.0, x))
    return ScaledValue.from_log(_log_k_tail0(nu, x))


# ---------------------------------------------------------------------------
# inequality catalogue

@dataclass
class InequalityResult:
    """Worst case of one inequality over a grid.

    ``min_slack`` is (rhs - lhs) / rhs at the worst point; positive means the
    inequality holds there.
    """

    ident: str
    statement: str
    strict: bool
    min_slack: float = math.inf
    worst_nu: float = math.nan
    worst_x: float = math.nan
    points: int = 0
    violations: list = field(default_factory=list)

    @property
    def holds(self):
        return not self.violations

    def update(self, nu, x, slack, tol):
        self.points += 1
        if slack < self.min_slack:
            self.min_slack, self.worst_nu, self.worst_x = slack, nu, x
        bad = slack <= 0.0 if self.strict else slack < -tol
        if bad:
            self.violations.append((nu, x, slack))


INEQUALITIES = {
    "kv_int_t1_iv": ("K_nu(x)/x^nu * int_0^x t^(nu+1) I_nu < 1/2", True),
    "iv_int_t1_kv_tail": ("I_nu(x)/x^nu * int_x^inf t^(nu+1) K_nu < 1", True),
    "kv_int_iv": ("K_nu(x)/x^nu * int_0^x t^nu I_nu <= 1/(2nu+1)", True),
    "iv_int_kv_tail": ("I_nu(x)/x^nu * int_x^inf t^nu K_nu <= sqrt(pi) G(nu+1/2)/(2 G(nu+1))", True),
    "x_kv_int_iv": ("K_nu(x)/x^(nu-1) * int_0^x t^nu I_nu < (nu+1)/(2nu+1)", True),
    "x_iv_int_kv_tail": ("I_nu(x)/x^(nu-1) * int_x^inf t^nu K_nu < 1", True),
    "x_kv1_int_iv": ("K_(nu+1)(x)/x^(nu-1) * int_0^x t^nu I_nu < (nu+1)/(2nu+1)", True),
    "x_iv1_int_kv_tail": ("I_(nu+1)(x)/x^(nu-1) * int_x^inf t^nu K_nu < 1/2", True),
    "xk_bounded": ("x^nu K_nu(x) < 2^(nu-1) G(nu), nu > 0", True),
    "k0_log": ("K_0(x) < -2 log x, 0 < x < 0.729", True),
    "iv_order": ("I_(nu+1)(x) < I_nu(x)", True),
    "third_derivative": ("(d/dx)^3 [I_nu(x)/x^nu] < I_nu(x)/x^nu", True),
    "double_int_iv": ("int_0^x int_0^u t^nu I_nu <= 2(nu+2)/(2nu+1) x^nu I_(nu+2)(x)", False),
}

#: identifiers of the eight solution-bounding inequalities
SOLUTION_INEQUALITIES = tuple(list(INEQUALITIES)[:8])


def _log_double_int(nu, x):
    # int_0^x (x - t) t^nu I_nu(t) dt in the same scaled form as _log_i_lower0
    lix = _scalar_log_iv(nu, x)
    at0 = nu * math.log(x / 2.0) - math.lgamma(nu + 1.0) - lix

    def g(s):
        if s <= 0.0:
            return math.exp(at0)
        return math.exp(_scalar_log_iv(nu, x * s) - nu * math.log(s) - lix)

    if x <= 4.0:
        j = quad(g, 0.0, 1.0, weight="alg", wvar=(2.0 * nu, 1.0))
    else:
        a = 0.5
        j = quad(lambda s: (1.0 - s) * g(s), 0.0, a, weight="alg", wvar=(2.0 * nu, 0.0),
                 floor=1e-300)
        pts = [1.0 - c / x for c in (1.0, 4.0, 16.0, 64.0) if 1.0 - c / x > a]
        j += quad(lambda s: (1.0 - s) * s ** (2.0 * nu) * g(s), a, 1.0, points=pts)
    return (nu + 2.0) * math.log(x) + lix + math.log(j)


def _double_int_slack(nu, x, rhs_log):
    # relative slack of the double-integral bound; below x = 2 the difference
    # of the two power series is summed directly (the leading terms cancel and
    # every remaining coefficient is positive), avoiding 1 - lhs/rhs cancellation
    if x > 2.0:
        return -math.expm1(_log_double_int(nu, x) - rhs_log)
    lx, l2 = math.log(x), math.log(2.0)
    logs = []
    for k in range(1, 200):
        a = k + nu
        t = (math.log(3.0 * k) + (2 * k + 2 * nu + 2) * lx - (2 * k + nu) * l2 - math.lgamma(k + 1.0)
             - math.lgamma(a + 1.0) - math.log(2.0 * (2 * nu + 1) * (a + 1) * (a + 2) * (2 * a + 1)))
        logs.append(t)
        if t < logs[0] - 40.0:
            break
    top = max(logs)
    return math.exp(top + math.log(math.fsum(math.exp(v - top) for v in logs)) - rhs_log)


def _xk_slack(nu, x, lk0):
    # (2^(nu-1) G(nu) - x^nu K_nu(x)) / 2^(nu-1) G(nu); for small x the
    # difference is evaluated as int_0^x t^nu K_(nu-1)(t) dt to avoid cancellation
    lb = (nu - 1.0) * math.log(2.0) + math.lgamma(nu)
    direct = 1.0 - math.exp(nu * math.log(x) + lk0 - lb)
    if direct > 1e-3:
        return direct
    m = abs(nu - 1.0)
    val = quad(lambda t: math.exp(nu * math.log(t) + _scalar_log_kv(m, t) - lb)
               if t > 0 else 0.0, 0.0, x, floor=1e-300)
    return val


def inequality_suite(nu_grid, x_grid, tol=1e-10):
    """Evaluate the Bessel inequality catalogue on a grid.

    Parameters
    ----------
    nu_grid : sequence of float
        Orders, each > -1/2.
    x_grid : sequence of float
        Positive arguments.
    tol : float
        Allowed relative excess for the non-strict entries.

    Returns
    -------
    dict
        Maps inequality id to :class:`InequalityResult`.
    """
    res = {k: InequalityResult(k, *v) for k, v in INEQUALITIES.items()}
    for nu in nu_grid:
        nu = float(nu)
        if not nu > -0.5:
            raise DomainError(f"inequality suite requires nu > -1/2 (got {nu})")
        b_rnmt1 = math.sqrt(math.pi) * math.exp(math.lgamma(nu + 0.5) - math.lgamma(nu + 1.0)) / 2
        b_ratio = (nu + 1.0) / (2.0 * nu + 1.0)
        for x in x_grid:
            x = float(x)
            if not x > 0:
                raise DomainError("inequality suite requires x > 0")
            lx = math.log(x)
            li0 = _scalar_log_iv(nu, x)
            li1 = _scalar_log_iv(nu + 1.0, x)
            lk0 = _scalar_log_kv(abs(nu), x)
            lk1 = _scalar_log_kv(nu + 1.0, x)
            a0 = _log_i_lower0(nu, x)
            t0 = _log_k_tail0(nu, x)

            def upd(key, lhs_log, bound):
                res[key].update(nu, x, 1.0 - math.exp(lhs_log) / bound, tol)

            upd("kv_int_t1_iv", lk0 + lx + li1, 0.5)
            # 1 - x I_nu K_(nu+1) equals x I_(nu+1) K_nu exactly
            res["iv_int_t1_kv_tail"].update(nu, x, math.exp(lx + li1 + lk0), tol)
            upd("kv_int_iv", lk0 - nu * lx + a0, 1.0 / (2.0 * nu + 1.0))
            upd("iv_int_kv_tail", li0 - nu * lx + t0, b_rnmt1)
            upd("x_kv_int_iv", lk0 - (nu - 1.0) * lx + a0, b_ratio)
            upd("x_iv_int_kv_tail", li0 - (nu - 1.0) * lx + t0, 1.0)
            upd("x_kv1_int_iv", lk1 - (nu - 1.0) * lx + a0, b_ratio)
            upd("x_iv1_int_kv_tail", li1 - (nu - 1.0) * lx + t0, 0.5)
            if nu > 0:
                res["xk_bounded"].update(nu, x, _xk_slack(nu, x, lk0), tol)
            if nu == 0 and x < 0.729:
                res["k0_log"].update(nu, x, 1.0 - math.exp(lk0) / (-2.0 * lx), tol)
            res["iv_order"].update(nu, x, -math.expm1(li1 - li0), tol)
            li2 = _scalar_log_iv(nu + 2.0, x)
            li3 = _scalar_log_iv(nu + 3.0, x)
            third = 3.0 * math.exp(li2 - lx - li0) + math.exp(li3 - li0)
            res["third_derivative"].update(nu, x, 1.0 - third, tol)
            rhs = math.log(2.0 * (nu + 2.0) / (2.0 * nu + 1.0)) + nu * lx + li2
            res["double_int_iv"].update(nu, x, _double_int_slack(nu, x, rhs), tol)
    return res
