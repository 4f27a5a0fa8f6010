"""Seeded Monte Carlo experiments comparing empirical distances with the bounds.

Random streams: a run with master seed ``s`` draws its variates in chunks of
``CHUNK`` values; chunk ``i`` uses ``Generator(PCG64(SeedSequence(s).spawn(k)[i]))``.
Results therefore depend only on (config, seed), not on how chunks are scheduled.
"""

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .bounds import product_clt_bounds, random_sum_bounds, vg_svg_bounds
from .distances import distance_between_laws, kolmogorov_empirical, kolmogorov_two_sample, wasserstein_empirical
from .distribution import SvgParams, VgParams, svg_cdf, vg_cdf, vg_sample
from .errors import DomainError
from .special import inequality_suite
from .transforms import centered_equilibrium_sample, rademacher, svg_spec

SCHEMA = "svgstein-results/1"
CHUNK = 1 << 16


def chunk_generators(seed, total):
    """Independent generators for consecutive chunks of ``total`` draws."""
    k = max(1, math.ceil(total / CHUNK))
    children = np.random.SeedSequence(seed).spawn(k)
    sizes = [CHUNK] * (k - 1) + [total - CHUNK * (k - 1)]
    return [(np.random.Generator(np.random.PCG64(c)), n) for c, n in zip(children, sizes)]


def _draw(seed, total, fn):
    return np.concatenate([fn(rng, n) for rng, n in chunk_generators(seed, total)])


@dataclass
class ResultRow:
    """One experiment outcome.

    ``ratio_*`` is empirical/bound when the bound is positive. ``violation``
    is set when an empirical distance exceeds its bound by more than three
    bootstrap standard errors.
    """

    experiment: str
    seed: int
    n: int
    params: dict = field(default_factory=dict)
    empirical_dK: float = math.nan
    empirical_dK_se: float = math.nan
    empirical_dW: float = math.nan
    empirical_dW_se: float = math.nan
    bound_dK: float = math.nan
    bound_dW: float = math.nan
    ratio_dK: float = math.nan
    ratio_dW: float = math.nan
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def finish(self):
        for emp, bnd, attr in (("empirical_dK", "bound_dK", "ratio_dK"), ("empirical_dW", "bound_dW", "ratio_dW")):
            e, b = getattr(self, emp), getattr(self, bnd)
            if math.isfinite(e) and math.isfinite(b) and b > 0:
                setattr(self, attr, e / b)
        return self

    @property
    def violation(self):
        for emp, se, bnd in (("empirical_dK", "empirical_dK_se", "bound_dK"),
                             ("empirical_dW", "empirical_dW_se", "bound_dW")):
            e, s, b = getattr(self, emp), getattr(self, se), getattr(self, bnd)
            if math.isfinite(e) and math.isfinite(b):
                tol = 3.0 * s if math.isfinite(s) else 0.0
                if e - tol > b * (1.0 + 1e-9):
                    return True
        return False

    def flat(self):
        """Ordered flat mapping used for CSV and JSON output (wall_time last)."""
        d = {"experiment": self.experiment, "seed": self.seed, "n": self.n}
        d.update({f"param_{k}": v for k, v in sorted(self.params.items())})
        for k in ("empirical_dK", "empirical_dK_se", "empirical_dW", "empirical_dW_se",
                  "bound_dK", "bound_dW", "ratio_dK", "ratio_dW"):
            d[k] = getattr(self, k)
        d.update({f"extra_{k}": v for k, v in sorted(self.extras.items())})
        d["violation"] = self.violation
        d["wall_time"] = self.wall_time
        return d


def _metrics(row, w, target, n_boot=20):
    k = kolmogorov_empirical(w, target, n_boot=n_boot, seed=row.seed)
    d = wasserstein_empirical(w, target, n_boot=n_boot, seed=row.seed)
    row.empirical_dK, row.empirical_dK_se = k.value, k.se_hint
    row.empirical_dW, row.empirical_dW_se = d.value, d.se_hint


# ---------------------------------------------------------------------------
# binary sequence comparison

def d2_sample(m, n, size, seed):
    """Standardised D2 statistic for uniform binary sequences of lengths m and n."""
    def gen(rng, k):
        x = rng.binomial(m, 0.5, k)
        y = rng.binomial(n, 0.5, k)
        return ((x - m / 2.0) / math.sqrt(m / 4.0)) * ((y - n / 2.0) / math.sqrt(n / 4.0))
    return _draw(seed, size, gen)


def run_d2(m, n, trials=100_000, seed=0, n_boot=20):
    """Standardised D2 statistic against SVG(1, 1, 0).

    Parameters
    ----------
    m, n : int
        Sequence lengths, >= 2.
    trials : int
        Number of simulated statistics.
    seed : int

    Returns
    -------
    ResultRow
        Bounds are the product-of-sums bounds with unit moments.
    """
    if m < 2 or n < 2:
        raise DomainError("m and n must be at least 2")
    t0 = time.perf_counter()
    row = ResultRow("d2", seed, trials, dict(m=m, n=n))
    w = d2_sample(m, n, trials, seed)
    _metrics(row, w, SvgParams(1.0), n_boot)
    bw, bk = product_clt_bounds(m, n, 1.0, 1.0, 1.0, 1.0, third_moments_vanish=True)
    row.bound_dW, row.bound_dK = bw.bound_value, bk.bound_value
    row.extras = dict(bound_dW_printed=bw.printed_value, bound_dK_printed=bk.printed_value,
                      mean=float(np.mean(w)), mean_se=float(np.std(w) / math.sqrt(trials)),
                      second_moment=float(np.mean(w ** 2)),
                      second_moment_se=float(np.std(w ** 2) / math.sqrt(trials)))
    row.wall_time = time.perf_counter() - t0
    return row.finish()


# ---------------------------------------------------------------------------
# geometric random sums

def random_sum_sample(p, x_spec, size, seed, max_draws=50_000_000):
    """W = sqrt(p) sum_{i <= N} X_i with N ~ Geo(p) on {1, 2, ...}.

    Discrete summands use multinomial counts per sum (exact and O(atoms) per
    sum); other specs draw every summand and are limited to ``max_draws``.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")

    def gen(rng, k):
        nn = rng.geometric(p, k)
        if x_spec.kind == "discrete":
            counts = rng.multinomial(nn, x_spec.probs)
            s = counts @ x_spec.atoms
        else:
            if nn.sum() > max_draws:
                raise DomainError("too many summands; use a discrete spec or a larger p")
            draws = x_spec.sample(int(nn.sum()), rng)
            s = np.add.reduceat(draws, np.concatenate([[0], np.cumsum(nn)[:-1]]))
        return math.sqrt(p) * s

    return _draw(seed, size, gen)


def run_random_sum(p, x_spec=None, trials=100_000, seed=0, n_boot=20):
    """Geometric sum of mean-zero summands against Laplace(0, sigma/sqrt(2)).

    Parameters
    ----------
    p : float
        Geometric success probability.
    x_spec : DistributionSpec, optional
        Law of the summands (default Rademacher).
    trials : int
    seed : int

    Returns
    -------
    ResultRow
    """
    x_spec = rademacher() if x_spec is None else x_spec
    if abs(x_spec.mean) > 1e-12:
        raise DomainError("the summands must have mean zero")
    t0 = time.perf_counter()
    sigma = math.sqrt(x_spec.variance)
    row = ResultRow("random_sum", seed, trials, dict(p=p, x_kind=x_spec.kind, sigma=sigma))
    w = random_sum_sample(p, x_spec, trials, seed)
    target = SvgParams(2.0, sigma / math.sqrt(2.0))
    _metrics(row, w, target, n_boot)
    rho = x_spec.moment(3, absolute=True) if x_spec.kind != "sampler" else None
    support = x_spec.support if all(map(math.isfinite, x_spec.support)) else None
    reps = {b.bound_id: b for b in random_sum_bounds(sigma, p_geo=p, rho=rho, support=support)}
    bk, bw = reps["geometric_sum_kolmogorov"], reps["geometric_sum_wasserstein"]
    row.bound_dK = bk.bound_value if bk.valid else math.nan
    row.bound_dW = bw.bound_value if bw.valid else math.nan
    row.extras = dict(bound_dK_printed=bk.printed_value if bk.valid else math.nan,
                      skewness=float(stats.skew(w)))
    row.wall_time = time.perf_counter() - t0
    return row.finish()


def rate_slope(ps, values):
    """Least-squares slope of log(values) against log(ps)."""
    return float(np.polyfit(np.log(ps), np.log(values), 1)[0])


def run_cf_diagnostic(p, x_spec, t_grid):
    """Exact imaginary part of the geometric-sum characteristic function.

    phi_W(t) = p phi_X(s) / (1 - (1 - p) phi_X(s)) with s = sqrt(p) t, evaluated
    with 1 - phi_X(s) = sum_a P(a) (2 sin^2(s a / 2) - i sin(s a)) to avoid
    cancellation. Expanding phi_X to third order gives

        Im phi_W(t) = -(1/6) sqrt(p) t^3 E X^3 / (1 + sigma^2 t^2 / 2)^2 + O(p),

    reported as ``leading``; ``leading_printed`` has the first power of the
    denominator instead, and its ratio tends to 1/(1 + sigma^2 t^2 / 2).

    Returns
    -------
    list of dict
        Keys t, im_phi, leading, ratio (nan when the leading term vanishes),
        leading_printed, ratio_printed.
    """
    if x_spec.kind != "discrete":
        raise DomainError("the characteristic function is evaluated for discrete specs")
    a, w = x_spec.atoms, x_spec.probs
    s2 = x_spec.variance
    m3 = x_spec.moment(3)
    rows = []
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        s = math.sqrt(p) * t
        one_minus = complex(np.sum(w * 2.0 * np.sin(s * a / 2.0) ** 2), -np.sum(w * np.sin(s * a)))
        phi = 1.0 - one_minus
        val = p * phi / (p + (1.0 - p) * one_minus)
        den = 1.0 + s2 * t * t / 2.0
        top = -math.sqrt(p) * t ** 3 * m3 / 6.0
        lead, printed = top / den ** 2, top / den
        rows.append(dict(t=float(t), im_phi=float(val.imag), leading=float(lead),
                         ratio=float(val.imag / lead) if lead != 0 else math.nan,
                         leading_printed=float(printed),
                         ratio_printed=float(val.imag / printed) if printed != 0 else math.nan))
    return rows


# ---------------------------------------------------------------------------
# VG against SVG

def run_vg_compare(p1, p2, trials=100_000, seed=0, n_boot=20):
    """VG(r1, theta1, sigma1, mu1) samples against SVG(r2, sigma2, mu2).

    The empirical columns use a VG sample; ``extras`` also carries the
    distances between the two laws from their distribution functions on a
    dense grid (``law_dK``, ``law_dW``) and the lower bound |E X - E Y|.
    """
    if not isinstance(p1, VgParams) or not isinstance(p2, SvgParams):
        raise DomainError("expected VgParams and SvgParams")
    t0 = time.perf_counter()
    row = ResultRow("vg_compare", seed, trials,
                    dict(r1=p1.r, theta1=p1.theta, sigma1=p1.sigma, mu1=p1.mu, r2=p2.r, sigma2=p2.sigma, mu2=p2.mu))
    x = _draw(seed, trials, lambda rng, k: vg_sample(p1, k, rng))
    _metrics(row, x, p2, n_boot)
    reps = {b.bound_id: b for b in vg_svg_bounds(p1, p2)}
    row.bound_dW = reps["vg_svg_wasserstein"].bound_value
    bk = reps["vg_svg_kolmogorov"]
    row.bound_dK = bk.bound_value if bk.valid else math.nan
    spread = 60.0 * max(math.sqrt(p1.variance), math.sqrt(p2.variance))
    lo = min(p1.mean, p2.mu) - spread
    hi = max(p1.mean, p2.mu) + spread
    lk, lw = distance_between_laws(lambda t: vg_cdf(p1, t), lambda t: svg_cdf(p2, t), lo, hi,
                                   points=[p1.mu, p2.mu], n_grid=40001)
    row.extras = dict(law_dK=lk.value, law_dW=lw.value,
                      lower_dW=reps["vg_svg_wasserstein_lower"].bound_value)
    row.wall_time = time.perf_counter() - t0
    return row.finish()


# ---------------------------------------------------------------------------
# fixed point of the centered equilibrium transformation

def run_fixed_point(r, sigma=1.0, n=100_000, seed=0, spec=None):
    """KS distances between a law and its centered equilibrium transform of order r.

    With ``spec`` None the law is SVG(r, sigma, 0), the fixed point. Columns:
    ``empirical_dK`` is the one-sample KS distance of the transformed sample to
    the SVG(r, sigma, 0) distribution function; ``extras`` holds the two-sample
    KS distance between a sample of the law and its transform (``ks_transform``)
    and between two independent samples of the law (``ks_baseline``).
    """
    if not r > 0:
        raise DomainError("r must be positive")
    t0 = time.perf_counter()
    target = SvgParams(r, sigma)
    law = svg_spec(target) if spec is None else spec
    row = ResultRow("fixed_point", seed, n, dict(r=r, sigma=sigma, law="svg" if spec is None else spec.kind))
    s1, s2, s3 = np.random.SeedSequence(seed).spawn(3)
    a = law.sample(n, np.random.Generator(np.random.PCG64(s1)))
    b = law.sample(n, np.random.Generator(np.random.PCG64(s2)))
    v = centered_equilibrium_sample(law, r, n, np.random.Generator(np.random.PCG64(s3)))
    k = kolmogorov_empirical(v, target, n_boot=20, seed=seed)
    row.empirical_dK, row.empirical_dK_se = k.value, k.se_hint
    base = kolmogorov_two_sample(a, b).value
    trans = kolmogorov_two_sample(a, v).value
    row.extras = dict(ks_transform=trans, ks_baseline=base, ks_ratio=trans / base if base > 0 else math.inf)
    row.wall_time = time.perf_counter() - t0
    return row.finish()


def run_inequality_suite(nu_grid, x_grid):
    """Evaluate the Bessel inequality catalogue; one row per inequality."""
    t0 = time.perf_counter()
    res = inequality_suite(nu_grid, x_grid)
    rows = []
    for key, r in res.items():
        row = ResultRow("inequality_suite", 0, r.points, dict(inequality=key))
        row.extras = dict(min_slack=r.min_slack, worst_nu=r.worst_nu, worst_x=r.worst_x, holds=r.holds)
        rows.append(row)
    dt = time.perf_counter() - t0
    for row in rows:
        row.wall_time = dt / max(1, len(rows))
    return rows


# ---------------------------------------------------------------------------
# output

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, config):
    """CSV text: a versioned comment line with the config, then header and rows."""
    buf = io.StringIO()
    buf.write(f"# {SCHEMA} " + json.dumps(config, sort_keys=True, default=str) + "\n")
    flats = [r.flat() for r in rows]
    cols = []
    for f in flats:
        for k in f:
            if k not in cols:
                cols.append(k)
    # keep wall_time as the final column so reproducibility diffs can drop it
    if "wall_time" in cols:
        cols.remove("wall_time")
        cols.append("wall_time")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for f in flats:
        wr.writerow([_fmt(f.get(c, "")) for c in cols])
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def rows_to_json(rows, config):
    """JSON text mirroring the CSV schema."""
    payload = dict(schema=SCHEMA, config=config,
                   rows=[{k: _json_safe(v) for k, v in r.flat().items()} for r in rows])
    return json.dumps(payload, indent=2, sort_keys=False, default=str)


EXPERIMENTS = {
    "d2": run_d2,
    "random_sum": run_random_sum,
    "vg_compare": run_vg_compare,
    "fixed_point": run_fixed_point,
    "inequality_suite": run_inequality_suite,
    "cf_diagnostic": run_cf_diagnostic,
}

__all__ = [
    "ResultRow", "chunk_generators", "d2_sample", "random_sum_sample", "run_d2", "run_random_sum",
    "run_cf_diagnostic", "run_vg_compare", "run_fixed_point", "run_inequality_suite", "rate_slope",
    "rows_to_csv", "rows_to_json", "EXPERIMENTS",
]
