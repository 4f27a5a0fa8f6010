"""Symmetric variance-gamma (SVG) and variance-gamma (VG) distributions.

SVG(r, sigma, mu) has density

    p(x) = (|x - mu| / (2 sigma))^nu K_nu(|x - mu| / sigma) / (sigma sqrt(pi) Gamma(r/2))

with nu = (r - 1)/2. Equivalently Z = mu + sigma sqrt(X) Y with
X ~ Gamma(r/2, rate 1/2) and Y ~ N(0, 1). VG(r, theta, sigma, mu) adds an
exponential tilt: Z = mu + theta X + sigma sqrt(X) Y.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy import special as sc

from ._quad import gl_integrate, quad
from .errors import DomainError, SingularityError
from .special import int_k_tail, log_kv


@dataclass(frozen=True)
class SvgParams:
    """Parameters of SVG(r, sigma, mu)."""

    r: float
    sigma: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("r", "sigma", "mu"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not self.r > 0:
            raise DomainError("r must be positive")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    @property
    def nu(self):
        return (self.r - 1.0) / 2.0

    @property
    def variance(self):
        return self.r * self.sigma ** 2


@dataclass(frozen=True)
class VgParams:
    """Parameters of VG(r, theta, sigma, mu)."""

    r: float
    theta: float = 0.0
    sigma: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("r", "theta", "sigma", "mu"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not self.r > 0:
            raise DomainError("r must be positive")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    @property
    def nu(self):
        return (self.r - 1.0) / 2.0

    @property
    def mean(self):
        return self.mu + self.r * self.theta

    @property
    def variance(self):
        return self.r * self.sigma ** 2 + 2.0 * self.r * self.theta ** 2


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _log_norm(r):
    # log of 1 / (sqrt(pi) Gamma(r/2) 2^nu), the standard density constant
    nu = (r - 1.0) / 2.0
    return -0.5 * math.log(math.pi) - math.lgamma(r / 2.0) - nu * math.log(2.0)


def std_pdf(r, y):
    """Density of SVG(r, 1, 0) at y > 0 (vectorised, no checks)."""
    nu = (r - 1.0) / 2.0
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(nu * np.log(y) + log_kv(nu, y) + _log_norm(r))


def density_at_center(p):
    """Limit of the SVG density at x = mu for r > 1.

    Equal to Gamma((r-1)/2) / (2 sigma sqrt(pi) Gamma(r/2)); ``inf`` for r <= 1,
    where the density is unbounded (it is then the supremum of the density).
    """
    if p.r <= 1:
        return math.inf
    return math.exp(math.lgamma(p.nu) - math.lgamma(p.r / 2.0)) / (2.0 * p.sigma * math.sqrt(math.pi))


def svg_pdf(p, x):
    """SVG(r, sigma, mu) density.

    Parameters
    ----------
    p : SvgParams
    x : float or array_like

    Returns
    -------
    float or ndarray

    Raises
    ------
    SingularityError
        If r <= 1 and some x equals mu, where the density is infinite.
    """
    xa = np.asarray(x, dtype=float)
    y = np.abs(xa - p.mu) / p.sigma
    at0 = y == 0
    if np.any(at0) and p.r <= 1:
        raise SingularityError("the SVG density is infinite at x = mu when r <= 1")
    out = np.empty_like(y)
    pos = ~at0
    out[pos] = std_pdf(p.r, y[pos]) / p.sigma
    out[at0] = density_at_center(p)
    return out if out.ndim else float(out)


def std_upper_tail(r, y):
    """P(Z > y) for Z ~ SVG(r, 1, 0) and scalar y >= 0."""
    nu = (r - 1.0) / 2.0
    if y == 0:
        return 0.5
    return math.exp(int_k_tail(nu, y, 0).log() + _log_norm(r))


def _refine_knots(ys, step=0.25, ratio=1.25):
    lo, hi = ys[0], ys[-1]
    geo = lo * ratio ** np.arange(1, max(1, int(math.ceil(math.log(max(hi, lo) / lo) / math.log(ratio)))) + 1)
    geo = geo[geo < min(hi, 1.0)]
    lin = np.arange(1.0, hi, step) if hi > 1.0 else np.empty(0)
    lin = lin[lin > lo]
    return np.unique(np.concatenate([ys, geo, lin]))


def accumulate_from_center(g, ys, head, step=0.25):
    """Cumulative integrals of ``g`` from 0 to each point of ``ys``.

    Parameters
    ----------
    g : callable
        Vectorised integrand on (0, inf).
    ys : ndarray
        Sorted, unique, positive evaluation points.
    head : float
        Integral of ``g`` over [0, ys[0]].
    step : float
        Largest panel width away from the origin.

    Returns
    -------
    ndarray
    """
    knots = _refine_knots(ys, step=step)
    inc = gl_integrate(g, knots[:-1], knots[1:])
    cum = head + np.concatenate([[0.0], np.cumsum(inc)])
    return cum[np.searchsorted(knots, ys)]


def _std_half_mass(r, ys):
    # P(0 < Z <= y) for sorted unique positive ys, Z ~ SVG(r, 1, 0)
    head = 0.5 - std_upper_tail(r, ys[0])
    return accumulate_from_center(lambda t: std_pdf(r, t), ys, head)


def svg_cdf(p, x):
    """SVG(r, sigma, mu) distribution function.

    Scalars go through the tail integral of the Bessel function directly.
    Arrays are handled by accumulating Gauss-Legendre panels outward from mu,
    seeded by one tail integral, which keeps large samples cheap.

    Parameters
    ----------
    p : SvgParams
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    xa = np.asarray(x, dtype=float)
    if xa.ndim == 0:
        xv = float(xa)
        if math.isinf(xv):
            return 1.0 if xv > 0 else 0.0
        y = (xv - p.mu) / p.sigma
        t = std_upper_tail(p.r, abs(y))
        return 1.0 - t if y > 0 else t
    y = (xa - p.mu) / p.sigma
    out = np.full(y.shape, 0.5)
    ay = np.abs(y)
    fin = np.isfinite(ay) & (ay > 0)
    if np.any(fin):
        ys, inv = np.unique(ay[fin], return_inverse=True)
        half = _std_half_mass(p.r, ys)[inv]
        out[fin] = np.where(y[fin] > 0, 0.5 + half, 0.5 - half)
    out[np.isinf(y)] = (y[np.isinf(y)] > 0).astype(float)
    return np.clip(out, 0.0, 1.0)


def svg_ppf(p, q):
    """Quantile function of SVG(r, sigma, mu) by bracketing root search."""
    qa = np.asarray(q, dtype=float)
    if np.any((qa < 0) | (qa > 1)):
        raise DomainError("quantile levels must lie in [0, 1]")

    def one(u):
        if u == 0.5:
            return p.mu
        if u in (0.0, 1.0):
            return -math.inf if u == 0.0 else math.inf
        s = 1.0 if u > 0.5 else -1.0
        tail = 1.0 - u if u > 0.5 else u
        hi = 1.0
        while std_upper_tail(p.r, hi) > tail:
            hi *= 2.0
        y = optimize.brentq(lambda t: std_upper_tail(p.r, t) - tail, 0.0, hi, xtol=1e-14, rtol=1e-13)
        return p.mu + s * p.sigma * y

    out = np.vectorize(one, otypes=[float])(qa)
    return out if out.ndim else float(out)


def std_partial_mean(r, y):
    """E[Z 1(Z > y)] for Z ~ SVG(r, 1, 0) and y >= 0 (vectorised).

    Uses the antiderivative t^(nu+1) K_(nu+1)(t) of t^(nu+1) K_nu(t).
    """
    nu = (r - 1.0) / 2.0
    y = np.asarray(y, dtype=float)
    at0 = math.exp(math.lgamma(r / 2.0 + 0.5) - math.lgamma(r / 2.0)) / math.sqrt(math.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.exp((nu + 1.0) * np.log(y) + log_kv(nu + 1.0, np.where(y > 0, y, 1.0)) + _log_norm(r))
    out = np.where(y > 0, val, at0)
    return out if out.ndim else float(out)


def svg_integrated_cdf(p, x):
    """Integral of the distribution function up to x, i.e. E[(x - Z)^+].

    Parameters
    ----------
    p : SvgParams
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    xa = np.asarray(x, dtype=float)
    y = (xa - p.mu) / p.sigma
    f = svg_cdf(SvgParams(p.r), y)
    out = p.sigma * (y * f + std_partial_mean(p.r, np.abs(y)))
    return out if np.ndim(out) else float(out)


def svg_sample(p, n, seed=None):
    """Draw n variates of SVG(r, sigma, mu) from the gamma-normal mixture.

    Parameters
    ----------
    p : SvgParams
    n : int
    seed : int, SeedSequence or Generator, optional

    Returns
    -------
    ndarray
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = _rng(seed)
    x = rng.gamma(p.r / 2.0, 2.0, size=n)
    y = rng.standard_normal(n)
    return p.mu + p.sigma * np.sqrt(x) * y


def svg_absolute_moment(p, k):
    """E|Z - mu|^k for Z ~ SVG(r, sigma, mu).

    From the mixture: sigma^k E[X^(k/2)] E|Y|^k with
    E[X^s] = 2^s Gamma(r/2 + s) / Gamma(r/2) and
    E|Y|^k = 2^(k/2) Gamma((k+1)/2) / sqrt(pi), giving
    (2 sigma)^k (r/2)_(k/2) (1/2)_(k/2) in Pochhammer notation.

    Parameters
    ----------
    p : SvgParams
    k : float
        Positive order.

    Returns
    -------
    float

    See Also
    --------
    svg_absolute_moment_printed : the variant with constant 2^(k/2).
    """
    k = float(k)
    if not k > 0:
        raise DomainError("k must be positive")
    c = 2.0 ** k * sc.poch(p.r / 2.0, k / 2.0) * sc.poch(0.5, k / 2.0)
    return p.sigma ** k * c


def svg_absolute_moment_printed(p, k):
    """The absolute-moment expression with leading constant 2^(k/2).

    Kept for comparison only: it equals r sigma^2 / 2 at k = 2, half the
    variance, because it uses the rate-one gamma moments for a rate-1/2
    mixing variable. Use :func:`svg_absolute_moment` for actual values.
    """
    k = float(k)
    return svg_absolute_moment(p, k) * 2.0 ** (-k / 2.0)


def svg_cumulants(p):
    """(kappa_2, kappa_4, kappa_6) of SVG(r, sigma, 0)."""
    s2 = p.sigma ** 2
    return (p.r * s2, 6.0 * p.r * s2 ** 2, 120.0 * p.r * s2 ** 3)


def svg_moments(p):
    """(E Y^2, E Y^4, E Y^6) of Y ~ SVG(r, sigma, 0)."""
    r, s2 = p.r, p.sigma ** 2
    return (r * s2, 3.0 * s2 ** 2 * r * (r + 2.0), 15.0 * s2 ** 3 * r * (r + 2.0) * (r + 4.0))


# ---------------------------------------------------------------------------
# variance-gamma

def _vg_log_pdf(p, d):
    # log density at offset d = x - mu (d != 0); offsets avoid rounding x back onto mu
    c = math.hypot(p.theta, p.sigma)
    s2 = p.sigma ** 2
    nu = p.nu
    d = np.asarray(d, dtype=float)
    a = np.abs(d)
    with np.errstate(divide="ignore"):
        return (p.theta * d / s2 + nu * np.log(a / (2.0 * c)) + log_kv(nu, c * a / s2)
                - math.log(p.sigma) - 0.5 * math.log(math.pi) - math.lgamma(p.r / 2.0))


def vg_pdf(p, x):
    """VG(r, theta, sigma, mu) density.

    Parameters
    ----------
    p : VgParams
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    xa = np.asarray(x, dtype=float)
    at0 = xa == p.mu
    if np.any(at0) and p.r <= 1:
        raise SingularityError("the VG density is infinite at x = mu when r <= 1")
    out = np.empty(xa.shape)
    pos = ~at0
    out[pos] = np.exp(_vg_log_pdf(p, xa[pos] - p.mu))
    if np.any(at0):
        c2 = p.theta ** 2 + p.sigma ** 2
        nu = p.nu
        out[at0] = math.exp(math.lgamma(nu) + nu * math.log(p.sigma ** 2 / c2) - math.lgamma(p.r / 2.0)) / (
            2.0 * p.sigma * math.sqrt(math.pi))
    return out if out.ndim else float(out)


def _vg_scale(p):
    c = math.hypot(p.theta, p.sigma)
    return p.sigma ** 2 / (c - abs(p.theta))


def _vg_side_mass(p, side, y):
    # integral of the density over mu + side*(0, y]
    g = lambda u: float(np.exp(_vg_log_pdf(p, side * u)))
    return quad(g, 0.0, y, floor=1e-300, rtol=1e-11, accept=1e-8)


def _vg_tail_len(p):
    return _vg_scale(p) * (60.0 + 2.0 * abs(p.nu)) + 10.0 * p.sigma


def vg_cdf(p, x):
    """VG(r, theta, sigma, mu) distribution function by quadrature.

    Parameters
    ----------
    p : VgParams
    x : float or array_like

    Returns
    -------
    float or ndarray
    """
    xa = np.asarray(x, dtype=float)
    scale = _vg_scale(p)
    length = _vg_tail_len(p)
    left = _vg_side_mass(p, -1.0, length)
    if xa.ndim == 0:
        d = float(xa) - p.mu
        if d == 0:
            return left
        if d < 0:
            return left - _vg_side_mass(p, -1.0, -d)
        return left + _vg_side_mass(p, 1.0, d)
    d = xa - p.mu
    out = np.full(d.shape, left)
    for side in (1.0, -1.0):
        m = (side * d > 0) & np.isfinite(d)
        if not np.any(m):
            continue
        ys, inv = np.unique(side * d[m], return_inverse=True)
        head = _vg_side_mass(p, side, ys[0])
        g = lambda u, side=side: np.exp(_vg_log_pdf(p, side * u))
        mass = accumulate_from_center(g, ys / 1.0, head, step=0.25 * min(scale, p.sigma))[inv]
        out[m] = left + side * mass
    out[np.isinf(d)] = (d[np.isinf(d)] > 0).astype(float)
    return np.clip(out, 0.0, 1.0)


def vg_sample(p, n, seed=None):
    """Draw n variates of VG(r, theta, sigma, mu) from the mean-variance mixture.

    Parameters
    ----------
    p : VgParams
    n : int
    seed : int, SeedSequence or Generator, optional

    Returns
    -------
    ndarray
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = _rng(seed)
    v = rng.gamma(p.r / 2.0, 2.0, size=n)
    z = rng.standard_normal(n)
    return p.mu + p.theta * v + p.sigma * np.sqrt(v) * z
