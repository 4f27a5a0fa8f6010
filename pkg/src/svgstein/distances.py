"""Empirical probability metrics and the SVG metric-conversion formulas.

Distances are one-dimensional: the Kolmogorov distance is the supremum of
|F_n - F| and the Wasserstein distance is the integral of |F_n - F|. Against an
SVG target the latter is evaluated exactly between order statistics using the
integrated distribution function Phi(t) = E(t - Z)^+.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from ._quad import gl_nodes
from .distribution import (SvgParams, VgParams, density_at_center, svg_cdf, svg_integrated_cdf,
                           svg_pdf, vg_cdf)
from .errors import BoundValidityError, DomainError

# largest sigma^-1 d_W for the r = 1 conversion: it keeps alpha/sigma below 0.729,
# where K_0(y) <= -2 log(y) stops holding
R1_CONVERSION_LIMIT = 0.676
# y below which K_0(y) <= -2 log(y) holds (used by the r = 1 concentration constant)
_K0_LOG_LIMIT = 0.729


@dataclass(frozen=True)
class MetricValue:
    """An estimated distance.

    Attributes
    ----------
    metric : {"kolmogorov", "wasserstein", "bounded_wasserstein"}
    value : float
    n : int
        Sample size.
    se_hint : float
        Bootstrap standard error of the estimate (nan when not computed).
    """

    metric: str
    value: float
    n: int
    se_hint: float = math.nan

    def __float__(self):
        return float(self.value)


def _sorted_sample(sample):
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("the sample is empty")
    if not np.all(np.isfinite(x)):
        raise DomainError("the sample contains non-finite values")
    return x


def _cdf_of(target):
    if isinstance(target, SvgParams):
        return lambda t: svg_cdf(target, t)
    if isinstance(target, VgParams):
        return lambda t: vg_cdf(target, t)
    if callable(target):
        return target
    raise DomainError("target must be SvgParams, VgParams or a callable distribution function")


def _ks_from_counts(cum, n, fx):
    # cum[i] = #{sample <= x_i}; fx = F(x_i); left limits use the previous count
    upper = np.max(cum / n - fx)
    prev = np.concatenate([[0.0], cum[:-1]])
    lower = np.max(fx - prev / n)
    return max(upper, lower, 0.0)


def kolmogorov_empirical(sample, target, n_boot=20, seed=0):
    """One-sample Kolmogorov distance sup_x |F_n(x) - F(x)|.

    The supremum is attained at a jump of F_n, so it is computed exactly from
    the two one-sided differences at every distinct sample point.

    Parameters
    ----------
    sample : array_like
    target : SvgParams, VgParams or callable
        Target law or its (vectorised, continuous) distribution function.
    n_boot : int
        Bootstrap replicates for ``se_hint``; they reuse the target values at
        the original points, so each costs O(n).
    seed : int

    Returns
    -------
    MetricValue
    """
    x = _sorted_sample(sample)
    n = x.size
    ux, counts = np.unique(x, return_counts=True)
    fx = np.asarray(_cdf_of(target)(ux), dtype=float)
    value = _ks_from_counts(np.cumsum(counts), n, fx)
    se = math.nan
    if n_boot > 0:
        rng = np.random.default_rng(seed)
        p = counts / n
        reps = [_ks_from_counts(np.cumsum(rng.multinomial(n, p)), n, fx) for _ in range(n_boot)]
        se = float(np.std(reps, ddof=1)) if n_boot > 1 else math.nan
    return MetricValue("kolmogorov", float(value), n, se)


def kolmogorov_two_sample(a, b):
    """Two-sample Kolmogorov distance sup |F_a - F_b|."""
    return MetricValue("kolmogorov", float(stats.ks_2samp(a, b).statistic), min(len(a), len(b)))


def _wasserstein_pieces(x, c, fx, phi, crossing):
    """Sum of integrals of |c_j - F| over [x_j, x_(j+1)] plus both tails.

    ``c`` holds the empirical level on each gap (length n - 1); ``crossing``
    maps (j, level) to the point where F equals the level inside gap j.
    """
    a, b = x[:-1], x[1:]
    fa, fb = fx[:-1], fx[1:]
    pa, pb = phi[:-1], phi[1:]
    length = b - a
    integ = pb - pa  # integral of F over the gap
    total = np.where(fa >= c, integ - c * length, 0.0)
    total = total + np.where(fb <= c, c * length - integ, 0.0)
    mixed = np.nonzero((fa < c) & (fb > c) & (length > 0))[0]
    if mixed.size:
        q, pq = crossing(mixed, c[mixed])
        left = c[mixed] * (q - a[mixed]) - (pq - pa[mixed])
        right = (pb[mixed] - pq) - c[mixed] * (b[mixed] - q)
        total[mixed] = left + right
    return float(np.sum(np.maximum(total, 0.0)))


def _svg_tails(p, x, phi):
    # integral of F below x_1 and of 1 - F above x_n
    return phi[0] + (phi[-1] - x[-1] + p.mu)


def wasserstein_empirical(sample, target, n_boot=20, seed=0):
    """One-sample Wasserstein distance, the integral of |F_n - F|.

    Parameters
    ----------
    sample : array_like
    target : SvgParams or callable
        For SvgParams the integral is exact between order statistics (the
        crossing points of F with the empirical levels are found by Newton
        steps to 1e-13 in F) and the tails use Phi(x_1) and Phi(x_n) - x_n + mu. A callable
        is treated as a quantile function Q and the distance is
        sum_i int_{(i-1)/n}^{i/n} |x_(i) - Q(u)| du by 8-point Gauss-Legendre
        panels (approximate near u = 0 and 1 if Q is unbounded).
    n_boot : int
        Bootstrap replicates for ``se_hint``; they reuse the target values at
        the sample points and locate crossings by linear interpolation.
    seed : int

    Returns
    -------
    MetricValue
    """
    x = _sorted_sample(sample)
    n = x.size
    if not isinstance(target, SvgParams):
        if not callable(target):
            raise DomainError("target must be SvgParams or a quantile function")
        return MetricValue("wasserstein", _wasserstein_quantile(x, target), n)
    p = target
    fx = np.asarray(svg_cdf(p, x), dtype=float)
    phi = np.asarray(svg_integrated_cdf(p, x), dtype=float)
    tails = _svg_tails(p, x, phi)
    levels = np.arange(1, n) / n

    def exact_crossing(idx, lev):
        # safeguarded Newton from the linear guess, root search for stragglers
        a, b = x[idx], x[idx + 1]
        q = a + (lev - fx[idx]) / (fx[idx + 1] - fx[idx]) * (b - a)
        for _ in range(3):
            away = q != p.mu
            dens = np.full(q.shape, np.inf)
            dens[away] = svg_pdf(p, q[away])
            q = np.clip(q - (np.asarray(svg_cdf(p, q)) - lev) / dens, a, b)
        bad = np.nonzero(np.abs(np.asarray(svg_cdf(p, q)) - lev) > 1e-13)[0]
        for k in bad:
            c, lo, hi = lev[k], a[k], b[k]
            ga, gb = svg_cdf(p, lo) - c, svg_cdf(p, hi) - c
            if ga < 0 < gb:
                q[k] = optimize.brentq(lambda t: svg_cdf(p, t) - c, lo, hi, xtol=1e-15, rtol=1e-15)
            else:
                # the level sits within rounding of an end point
                q[k] = lo if abs(ga) <= abs(gb) else hi
        return q, np.asarray(svg_integrated_cdf(p, q), dtype=float)

    def linear_crossing(idx, lev):
        a, b = x[idx], x[idx + 1]
        fa, fb = fx[idx], fx[idx + 1]
        q = a + (lev - fa) / (fb - fa) * (b - a)
        # trapezoid for Phi(q) - Phi(a); F(q) = level
        return q, phi[idx] + 0.5 * (fa + lev) * (q - a)

    value = tails + _wasserstein_pieces(x, levels, fx, phi, exact_crossing)
    se = math.nan
    if n_boot > 1:
        rng = np.random.default_rng(seed)
        reps = []
        for _ in range(n_boot):
            cum = np.cumsum(rng.multinomial(n, np.full(n, 1.0 / n)))
            # the resampled law still lives on [x_1, x_n], so the tails are unchanged
            reps.append(tails + _wasserstein_pieces(x, cum[:-1] / n, fx, phi, linear_crossing))
        se = float(np.std(reps, ddof=1))
    return MetricValue("wasserstein", float(value), n, se)


def _wasserstein_quantile(x, qf):
    n = x.size
    s, w = gl_nodes(8)
    u = (np.arange(n)[:, None] + s[None, :]) / n
    vals = np.abs(x[:, None] - np.asarray(qf(u), dtype=float))
    return float(np.sum(vals * w[None, :]) / n)


def wasserstein_two_sample(a, b):
    """Two-sample Wasserstein distance (scipy)."""
    return MetricValue("wasserstein", float(stats.wasserstein_distance(a, b)), min(len(a), len(b)))


def bounded_wasserstein_proxy(d_w, d_k):
    """Reporting proxy min(d_W, 2 d_K) for the bounded Wasserstein distance.

    Only the first argument is a guaranteed upper bound (every test function
    of the bounded class is 1-Lipschitz); the 2 d_K cap is a heuristic used for
    side-by-side tables and never for acceptance decisions.
    """
    dw, dk = float(d_w), float(d_k)
    return MetricValue("bounded_wasserstein", min(dw, 2.0 * dk), 0)


def distance_between_laws(cdf_a, cdf_b, lo, hi, points=(), n_grid=20001):
    """Kolmogorov and Wasserstein distances between two continuous laws.

    Both distribution functions are evaluated on a dense grid over [lo, hi]
    (which must carry all but a negligible amount of both laws); the
    Wasserstein integral uses the trapezoid rule on |F_a - F_b|.

    Returns
    -------
    tuple of MetricValue
        (kolmogorov, wasserstein), with ``n`` set to 0.
    """
    grid = np.union1d(np.linspace(lo, hi, n_grid), np.asarray(points, dtype=float))
    d = np.abs(np.asarray(cdf_a(grid), dtype=float) - np.asarray(cdf_b(grid), dtype=float))
    dk = float(np.max(d))
    dw = float(np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(grid)))
    return MetricValue("kolmogorov", dk, 0), MetricValue("wasserstein", dw, 0)


# ---------------------------------------------------------------------------
# conversions

def _check_constants(constants):
    if constants not in ("exact", "printed"):
        raise DomainError("constants must be 'exact' or 'printed'")


def kolmogorov_from_wasserstein(p, d_w, constants="exact"):
    """Upper bound on d_K(W, Z) from d_W(W, Z) for Z ~ SVG(r, sigma, mu).

    Three cases:

    * r > 1: sqrt(2 M d_W), M the density maximum;
    * r = 1: {2 + log(2/sqrt(pi)) + log(sigma/d_W)/2} sqrt(d_W/(pi sigma)),
      valid for d_W/sigma <= 0.676 (at the end point the bandwidth ratio is
      0.7287, still inside the range of the logarithmic majorant of K_0);
    * 0 < r < 1: K A^(1/(r+1)) (d_W/sigma)^(r/(r+1)) with
      A = Gamma((1-r)/2)/(sqrt(pi) 2^(r-1) Gamma(r/2)). With ``constants="exact"``
      K = (r+1)/(2r), the value of the smoothing argument at its optimal
      bandwidth; ``"printed"`` uses K = 2, which is smaller than the proven
      value when r < 1/3.

    Parameters
    ----------
    p : SvgParams
    d_w : float
        Wasserstein distance, >= 0.
    constants : {"exact", "printed"}

    Returns
    -------
    float

    Raises
    ------
    BoundValidityError
        r = 1 and d_W/sigma > 0.676.
    """
    _check_constants(constants)
    d = float(d_w)
    if not d >= 0:
        raise DomainError("d_W must be nonnegative")
    r, s = p.r, p.sigma
    if r > 1:
        return math.sqrt(2.0 * density_at_center(p) * d)
    if d == 0:
        return 0.0
    if r == 1:
        if d / s > R1_CONVERSION_LIMIT:
            raise BoundValidityError(f"the r = 1 conversion needs d_W/sigma <= {R1_CONVERSION_LIMIT}")
        return (2 + math.log(2 / math.sqrt(math.pi)) + 0.5 * math.log(s / d)) * math.sqrt(d / (math.pi * s))
    a = math.exp(math.lgamma((1 - r) / 2) - math.lgamma(r / 2)) / (math.sqrt(math.pi) * 2 ** (r - 1))
    k = (r + 1) / (2 * r) if constants == "exact" else 2.0
    return k * a ** (1 / (r + 1)) * (d / s) ** (r / (r + 1))


def concentration_bound(p, alpha, constants="exact"):
    """Constant C with P(a <= W <= b) <= C_{r,sigma,b-a} + 2 d_K(W, Z).

    C bounds P(|Z| <= alpha/2) for Z ~ SVG(r, sigma, 0), the largest mass an
    interval of length alpha can carry under the unimodal target.

    * r > 1: alpha M with M the density maximum;
    * r = 1: (2 alpha/(pi sigma)) [1 + log(2 sigma/alpha)] for alpha/(2 sigma) < 0.729
      and 1 otherwise (the logarithmic majorant of K_0 fails beyond);
    * 0 < r < 1: Gamma((1-r)/2)/(sqrt(pi) 4^r Gamma(r/2 + 1)) (alpha/sigma)^r.

    ``constants="printed"`` returns the alternative constants
    (alpha/(pi sigma))[1 + log(2 sigma/alpha)] for r = 1, which is smaller than
    P(|Z| <= alpha/2) itself, and a 2^r larger constant for r < 1.

    Parameters
    ----------
    p : SvgParams
        Only r and sigma are used.
    alpha : float
        Interval length, > 0.
    constants : {"exact", "printed"}

    Returns
    -------
    float
    """
    _check_constants(constants)
    a = float(alpha)
    if not a > 0:
        raise DomainError("alpha must be positive")
    r, s = p.r, p.sigma
    if r > 1:
        return a * density_at_center(p)
    if r == 1:
        base = a / (math.pi * s) * (1 + math.log(2 * s / a))
        if constants == "printed":
            return base
        return 2.0 * base if a / (2 * s) < _K0_LOG_LIMIT else 1.0
    c = math.exp(math.lgamma((1 - r) / 2) - math.lgamma(r / 2 + 1)) / math.sqrt(math.pi)
    c /= 4.0 ** r if constants == "exact" else 2.0 ** r
    return c * (a / s) ** r
