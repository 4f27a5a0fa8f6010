"""Zero-bias, square-bias and centered equilibrium (order r) transformations.

For mean-zero W with variance r sigma^2:

* the zero-bias law W* has density E[W 1(W > w)] / Var(W);
* the square-bias law W^sq has density w^2 p(w) / E W^2, and W* = U W^sq;
* the centered equilibrium law of order r is W^{V_r} = B_r W* with
  B_r ~ Beta(r, 1), characterised by E W f(W) = sigma^2 E[T_r f'(W^{V_r})],
  T_r f(x) = x f'(x) + r f(x).

Exchanging the order of integration in its density gives, for w != 0,

    f_{V_r}(w) = sigma^-2 E[ |W| psi_r(|W|/|w|) 1(W beyond w) ],
    psi_r(q) = (q^(1-r) - 1)/(1 - r)   (log q when r = 1),

where "beyond w" means W > w for w > 0 and W < w for w < 0. This is exact for
discrete W and needs only one quadrature for densities.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._quad import gl_integrate, quad
from .distribution import SvgParams, std_partial_mean, svg_cdf, svg_pdf, svg_sample
from .errors import DomainError, SingularityError

_MEAN_TOL = 1e-9


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class DistributionSpec:
    """A law of W given by atoms, by a density, or by a sampler.

    Build instances with :func:`finite_discrete`, :func:`analytic_density`,
    :func:`svg_spec` or :func:`sampler_spec`.

    Attributes
    ----------
    kind : {"discrete", "density", "sampler"}
    mean, variance : float
    atoms, probs : ndarray or None
        Support points (sorted) and probabilities of a discrete law.
    pdf : callable or None
        Vectorised density.
    support : tuple of float
        Closed interval carrying the law (may be infinite).
    sampler : callable or None
        ``sampler(rng, n)`` returning n draws.
    svg : SvgParams or None
        Set when the law is SVG, enabling closed forms.
    """

    kind: str
    mean: float
    variance: float
    atoms: np.ndarray = field(default=None, repr=False)
    probs: np.ndarray = field(default=None, repr=False)
    pdf: object = field(default=None, repr=False)
    support: tuple = (-math.inf, math.inf)
    sampler: object = field(default=None, repr=False)
    svg: SvgParams = None
    _table: dict = field(default_factory=dict, repr=False, compare=False)

    # basic functionals ---------------------------------------------------

    def sample(self, n, seed=None):
        """Draw n variates."""
        rng = _rng(seed)
        if self.kind == "discrete":
            return rng.choice(self.atoms, size=n, p=self.probs)
        if self.svg is not None:
            return svg_sample(self.svg, n, rng)
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, n), dtype=float)
        u = rng.random(n)
        grid, cdf = self._cdf_table()
        return np.interp(u, cdf, grid)

    def moment(self, k, absolute=False):
        """E W^k, or E|W|^k when ``absolute``."""
        if self.kind == "discrete":
            a = np.abs(self.atoms) if absolute else self.atoms
            return float(np.sum(self.probs * a ** k))
        if self.kind == "density":
            fn = (lambda t: abs(t) ** k) if absolute else (lambda t: t ** k)
            return self._integrate(lambda t: fn(t) * float(self.pdf(t)))
        raise DomainError("moments of a sampler spec are not available exactly")

    def upper_partial(self, w):
        """E[W 1(W > w)]."""
        w = float(w)
        if self.kind == "discrete":
            m = self.atoms > w
            return float(np.sum(self.atoms[m] * self.probs[m]))
        if self.svg is not None:
            p = self.svg
            y = (w - p.mu) / p.sigma
            # the centred part is even in y; add mu P(Z > w)
            part = p.sigma * std_partial_mean(p.r, abs(y))
            return float(part + p.mu * (1.0 - svg_cdf(p, w)))
        if self.kind == "density":
            a, b = self.support
            if w >= b:
                return 0.0
            if w <= a:
                return self.mean
            return self._integrate(lambda t: t * float(self.pdf(t)), lo=w)
        raise DomainError("partial moments of a sampler spec are not available")

    def _bounds(self):
        a, b = self.support
        if math.isfinite(a) and math.isfinite(b):
            return a, b
        # truncate infinite supports where the density is negligible
        s = math.sqrt(self.variance)
        lo = a if math.isfinite(a) else self.mean - 80.0 * s
        hi = b if math.isfinite(b) else self.mean + 80.0 * s
        return lo, hi

    def _integrate(self, fn, lo=None, hi=None):
        a, b = self._bounds()
        lo = a if lo is None else max(lo, a)
        hi = b if hi is None else min(hi, b)
        pts = [0.0, self.mean] + list(np.linspace(lo, hi, 9)[1:-1])
        return quad(fn, lo, hi, points=pts, rtol=1e-11, atol=1e-14, accept=1e-7)

    def _cdf_table(self):
        if "cdf" not in self._table:
            lo, hi = self._bounds()
            grid = np.linspace(lo, hi, 20001)
            inc = gl_integrate(lambda t: np.asarray(self.pdf(t), dtype=float), grid[:-1], grid[1:])
            cdf = np.concatenate([[0.0], np.cumsum(inc)])
            self._table["cdf"] = (grid, cdf / cdf[-1])
        return self._table["cdf"]


def finite_discrete(values, probs):
    """Discrete law on finitely many atoms."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    if v.shape != p.shape or v.ndim != 1 or v.size == 0:
        raise DomainError("values and probs must be matching 1-D arrays")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise DomainError("probabilities must be nonnegative and sum to 1")
    order = np.argsort(v)
    v, p = v[order], p[order]
    mean = float(np.sum(v * p))
    var = float(np.sum(p * (v - mean) ** 2))
    return DistributionSpec("discrete", mean, var, atoms=v, probs=p,
                            support=(float(v[0]), float(v[-1])))


def rademacher():
    """W = +/-1 with probability 1/2 each."""
    return finite_discrete([-1.0, 1.0], [0.5, 0.5])


def analytic_density(pdf, support, mean=None, variance=None, tol=1e-6):
    """Law given by a density on ``support``.

    Declared moments are checked against quadrature; missing ones are computed.
    """
    a, b = (float(support[0]), float(support[1]))
    if not a < b:
        raise DomainError("support must be a nondegenerate interval")
    base = DistributionSpec("density", 0.0, 1.0, pdf=pdf, support=(a, b))
    mass = base._integrate(lambda t: float(pdf(t)))
    if abs(mass - 1.0) > tol:
        raise DomainError(f"density integrates to {mass:.8g}, not 1")
    m = base._integrate(lambda t: t * float(pdf(t)))
    v = base._integrate(lambda t: (t - m) ** 2 * float(pdf(t)))
    if mean is not None and abs(mean - m) > tol * max(1.0, math.sqrt(v)):
        raise DomainError(f"declared mean {mean} but quadrature gives {m}")
    if variance is not None and abs(variance - v) > tol * max(1.0, v):
        raise DomainError(f"declared variance {variance} but quadrature gives {v}")
    return DistributionSpec("density", m if mean is None else float(mean),
                            v if variance is None else float(variance), pdf=pdf, support=(a, b))


def svg_spec(p):
    """SVG(r, sigma, mu) as a DistributionSpec."""
    return DistributionSpec("density", p.mu, p.variance, pdf=lambda x: svg_pdf(p, x), svg=p)


def sampler_spec(sampler, mean, variance):
    """Law known only through ``sampler(rng, n)`` and its first two moments."""
    if not variance > 0:
        raise DomainError("variance must be positive")
    return DistributionSpec("sampler", float(mean), float(variance), sampler=sampler)


def _require_centered(W):
    if abs(W.mean) > _MEAN_TOL * max(1.0, math.sqrt(W.variance)):
        raise DomainError("the transformation requires E W = 0")
    if not (W.variance > 0 and math.isfinite(W.variance)):
        raise DomainError("the transformation requires 0 < Var W < inf")


# ---------------------------------------------------------------------------
# zero bias and square bias

def zero_bias_density(W, w):
    """Density of the zero-bias law, E[W 1(W > w)] / Var(W).

    Parameters
    ----------
    W : DistributionSpec
        Mean-zero law.
    w : float or array_like

    Returns
    -------
    float or ndarray
    """
    _require_centered(W)
    wa = np.asarray(w, dtype=float)
    lo, hi = W.support

    def one(t):
        # exact zero off the convex hull (E W itself is only zero to rounding)
        if t < lo or t > hi:
            return 0.0
        return max(W.upper_partial(t), 0.0) / W.variance

    out = np.vectorize(one, otypes=[float])(wa)
    return out if out.ndim else float(out)


def square_bias_density(W, w):
    """Density of the square-bias law, w^2 p(w) / E W^2 (density specs only)."""
    if W.kind != "density":
        raise DomainError("square_bias_density needs a density spec; use square_bias_sample")
    m2 = W.variance + W.mean ** 2
    wa = np.asarray(w, dtype=float)
    out = wa ** 2 * np.asarray(W.pdf(wa), dtype=float) / m2
    return out if out.ndim else float(out)


def square_bias_sample(W, n, seed=None):
    """Draw n variates of the square-bias law.

    Exact for discrete laws (atoms reweighted by a^2); tabulated inversion for
    densities; weighted resampling of a pool of 20 n draws for samplers.
    """
    rng = _rng(seed)
    if W.kind == "discrete":
        w = W.probs * W.atoms ** 2
        return rng.choice(W.atoms, size=n, p=w / w.sum())
    if W.kind == "density":
        if "sq" not in W._table:
            lo, hi = W._bounds()
            grid = np.linspace(lo, hi, 20001)
            f = lambda t: square_bias_density(W, t)
            inc = gl_integrate(f, grid[:-1], grid[1:])
            cdf = np.concatenate([[0.0], np.cumsum(inc)])
            W._table["sq"] = (grid, cdf / cdf[-1])
        grid, cdf = W._table["sq"]
        return np.interp(rng.random(n), cdf, grid)
    pool = W.sample(20 * n, rng)
    w = pool ** 2
    return rng.choice(pool, size=n, p=w / w.sum())


def zero_bias_sample(W, n, seed=None):
    """Draw n variates of the zero-bias law W*.

    Discrete laws are sampled exactly (W* is a mixture of uniforms between
    consecutive atoms); SVG(r, sigma, 0) maps exactly to SVG(r + 2, sigma, 0);
    other densities are inverted from a tabulated distribution function; sampler
    specs use W* = U W^sq with resampled square-bias draws.
    """
    _require_centered(W)
    rng = _rng(seed)
    if W.kind == "discrete":
        a = W.atoms
        if a.size < 2:
            raise DomainError("a centred law needs at least two atoms")
        part = np.array([W.upper_partial(t) for t in a[:-1]])
        mass = np.diff(a) * part / W.variance
        k = rng.choice(a.size - 1, size=n, p=mass / mass.sum())
        return a[k] + rng.random(n) * (a[k + 1] - a[k])
    if W.svg is not None:
        p = W.svg
        return svg_sample(SvgParams(p.r + 2.0, p.sigma, p.mu), n, rng)
    if W.kind == "density":
        if "zb" not in W._table:
            lo, hi = W._bounds()
            grid = np.linspace(lo, hi, 4001)
            dens = zero_bias_density(W, grid)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
            W._table["zb"] = (grid, cdf / cdf[-1])
        grid, cdf = W._table["zb"]
        return np.interp(rng.random(n), cdf, grid)
    return rng.random(n) * square_bias_sample(W, n, rng)


# ---------------------------------------------------------------------------
# centered equilibrium of order r

def _psi(r, q):
    # (q^(1-r) - 1)/(1 - r), continuous at r = 1
    lq = np.log(q)
    if r == 1.0:
        return lq
    return np.expm1((1.0 - r) * lq) / (1.0 - r)


def centered_equilibrium_density(W, r, w):
    """Density of W^{V_r} at w.

    Parameters
    ----------
    W : DistributionSpec
        Mean-zero law with variance r sigma^2 (sigma^2 = Var W / r).
    r : float
        Order, r > 0.
    w : float

    Returns
    -------
    float

    Raises
    ------
    SingularityError
        At w = 0 when r <= 1 and W has mass on both sides of zero.
    """
    _require_centered(W)
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")
    s2 = W.variance / r
    w = float(w)
    lo, hi = W.support
    if w < lo or w > hi:
        return 0.0
    if w == 0.0:
        g0 = W.upper_partial(0.0)
        if g0 == 0.0:
            return 0.0
        if r <= 1.0:
            raise SingularityError("the centered equilibrium density is infinite at 0 for r <= 1")
        return g0 / (s2 * (r - 1.0))
    aw = abs(w)
    if W.kind == "discrete":
        a = W.atoms
        m = a > w if w > 0 else a < w
        if not np.any(m):
            return 0.0
        return float(np.sum(W.probs[m] * np.abs(a[m]) * _psi(r, np.abs(a[m]) / aw))) / s2
    if W.kind != "density":
        raise DomainError("centered_equilibrium_density needs a discrete or density spec")
    fn = lambda t: abs(t) * float(_psi(r, abs(t) / aw)) * float(W.pdf(t))
    val = W._integrate(fn, lo=w) if w > 0 else W._integrate(fn, hi=w)
    return val / s2


def centered_equilibrium_sample(W, r, n, seed=None):
    """Draw n variates of W^{V_r} = B_r W*, B_r ~ Beta(r, 1).

    Parameters
    ----------
    W : DistributionSpec
        Mean-zero law.
    r : float
    n : int
    seed : int, SeedSequence or Generator, optional

    Returns
    -------
    ndarray
    """
    _require_centered(W)
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")
    rng = _rng(seed)
    ws = zero_bias_sample(W, n, rng)
    b = rng.random(n) ** (1.0 / r)
    return b * ws


def transform_moment(w_moment, variance, r, p):
    """Moment of W^{V_r} from a moment of W.

    Uses E[(W^{V_r})^p] = E[W^(p+2)] / (sigma^2 (p+1)(p+r)) with
    sigma^2 = Var(W)/r, obtained by taking f(x) = x^(p+1)/((p+1)(p+r)) in the
    characterising identity. Passing E|W|^(p+2) gives E|W^{V_r}|^p instead.

    Parameters
    ----------
    w_moment : float
        E W^(p+2) (or E|W|^(p+2)).
    variance : float
        Var W = r sigma^2.
    r : float
    p : float
        p >= 0; p = 0 returns 1 for any mean-zero W.

    Returns
    -------
    float
    """
    r, p = float(r), float(p)
    if not r > 0 or p < 0 or not variance > 0:
        raise DomainError("need r > 0, p >= 0 and a positive variance")
    s2 = variance / r
    return float(w_moment) / (s2 * (p + 1.0) * (p + r))


def transform_moment_printed(w_moment, variance, r, p):
    """The variant with r sigma^2 in the denominator, kept for comparison.

    It returns 1/r instead of 1 at p = 0 and disagrees with the SVG fixed point
    (E[(Z^{V_r})^2] must equal r sigma^2), so it is not used elsewhere.
    """
    r, p = float(r), float(p)
    return float(w_moment) / (variance * (p + 1.0) * (p + r))


def g_r_apply(f, r, x):
    """G_r f(x) = (x/r) E f(x U B_r), the right inverse of T_r D.

    The product V = U B_r has density r (1 - v^(r-1))/(r - 1) on (0, 1)
    (-log v when r = 1), which reduces the double integral to one.

    Parameters
    ----------
    f : callable
        Scalar function, integrable on [0, x].
    r : float
    x : float

    Returns
    -------
    float
    """
    r, x = float(r), float(x)
    if not r > 0:
        raise DomainError("r must be positive")
    if x == 0.0:
        return 0.0

    def kern(v):
        if v <= 0.0:
            return 0.0 if r < 1.0 else (1.0 / (r - 1.0) if r > 1.0 else 0.0)
        if r == 1.0:
            return -math.log(v)
        return -math.expm1((r - 1.0) * math.log(v)) / (r - 1.0)

    val = quad(lambda v: f(x * v) * kern(v), 0.0, 1.0, rtol=1e-12, atol=1e-15, accept=1e-8)
    return x * val
