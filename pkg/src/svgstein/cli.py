"""Command-line interface: ``svgstein <dist|stein|transform|distance|bound|experiment>``.

Exit codes: 0 on success, 2 when a bound is violated beyond tolerance, 1 on error.
"""

import argparse
import csv
import io
import itertools
import json
import math
import sys

import numpy as np

from . import bounds as bd
from . import distances as ds
from . import distribution as dist
from . import experiments as ex
from . import stein as st
from . import transforms as tr
from .reports import BoundReport

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


# ---------------------------------------------------------------------------
# helpers

def _grid(args):
    if args.x:
        return np.asarray([float(v) for v in args.x.split(",")])
    return np.linspace(args.lo, args.hi, args.num)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json(obj):
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (float, np.floating)):
            v = float(v)
            if not math.isfinite(v):
                return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        if isinstance(v, np.integer):
            return int(v)
        return v
    return json.dumps(clean(obj), indent=2)


def _parse_value(text):
    t = text.strip()
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null", ""):
        return None
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment. Values keep their text form."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{num}: expected key = value")
            k, v = line.split("=", 1)
            cfg[k.strip()] = v.strip()
    return cfg


def _named_flags(tokens):
    """Turn ``--key value`` / ``--key=value`` tokens into a dict of strings."""
    out = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--"):
            raise ValueError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            val = next(it, None)
            if val is None:
                raise ValueError(f"missing value for --{key}")
        out[key.replace("-", "_")] = val
    return out


def read_sample(path):
    """One value per line; blank lines and ``#`` comments are ignored."""
    fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    try:
        vals = [float(line.split("#", 1)[0]) for line in fh if line.split("#", 1)[0].strip()]
    finally:
        if fh is not sys.stdin:
            fh.close()
    return np.asarray(vals)


def _svg(args):
    return dist.SvgParams(args.r, args.sigma, args.mu)


def _add_params(p, theta=False):
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    if theta:
        p.add_argument("--theta", type=float, default=0.0)


def _add_grid(p, lo=-5.0, hi=5.0, num=101):
    p.add_argument("--x", help="comma-separated evaluation points (overrides the grid)")
    p.add_argument("--lo", type=float, default=lo)
    p.add_argument("--hi", type=float, default=hi)
    p.add_argument("--num", type=int, default=num)


# ---------------------------------------------------------------------------
# dist

def cmd_dist(args):
    vg = args.theta != 0.0
    if vg:
        p = dist.VgParams(args.r, args.theta, args.sigma, args.mu)
        pdf, cdf, sample = dist.vg_pdf, dist.vg_cdf, dist.vg_sample
    else:
        p = _svg(args)
        pdf, cdf, sample = dist.svg_pdf, dist.svg_cdf, dist.svg_sample
    if args.action in ("pdf", "cdf"):
        xs = _grid(args)
        fn = pdf if args.action == "pdf" else cdf
        vals = []
        for x in xs:
            try:
                vals.append(float(fn(p, x)))
            except dist.SingularityError:
                vals.append(math.inf)
        _emit(_csv(["x", "value"], zip(xs, vals)), args.out)
    elif args.action == "sample":
        xs = sample(p, args.n, args.seed)
        _emit("\n".join(repr(float(v)) for v in xs) + "\n", args.out)
    else:
        if vg:
            raise ValueError("moments are available for the symmetric family (theta = 0)")
        ks = [float(v) for v in args.k.split(",")]
        rows = [(k, dist.svg_absolute_moment(p, k)) for k in ks]
        _emit(_csv(["k", "value"], rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# stein

def _test_function(args):
    kind = args.h
    if kind == "sign":
        return st.sign(args.z if args.z is not None else args.mu)
    if kind == "indicator":
        return st.indicator(args.z if args.z is not None else args.mu)
    if kind == "smoothed_indicator":
        return st.smoothed_indicator(args.z if args.z is not None else args.mu, args.eps)
    if kind == "sine":
        return st.sine(args.a)
    raise ValueError(f"unknown test function {kind!r}")


def cmd_stein(args):
    p = _svg(args)
    h = _test_function(args)
    xs = [x for x in _grid(args) if x != p.mu and x not in h.breaks]
    if args.action == "eval":
        s = st.SteinSolution(p, h)
        rows = []
        for x in xs:
            pt = s.evaluate(x)
            rows.append((x, pt.f, pt.f1, pt.f2, st.residual(s, x)))
        _emit(_csv(["x", "f", "f1", "f2", "residual"], rows), args.out)
        return EXIT_OK
    reps = st.verify_solution_bounds(p, [h], xs)
    payload = [dict(bound_id=r.bound_id, sup_ratio=r.ratio, argmax_x=r.argmax, bound=r.bound_value,
                    observed=r.empirical, h=r.inputs.get("h"), notes=r.notes) for r in reps]
    _emit(_json(payload), args.out)
    return EXIT_OK if all(r.holds for r in reps) else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# transform

def _spec(args):
    if args.spec == "rademacher":
        return tr.rademacher()
    if args.spec == "discrete":
        if not (args.values and args.probs):
            raise ValueError("--values and --probs are required for a discrete spec")
        return tr.finite_discrete([float(v) for v in args.values.split(",")],
                                  [float(v) for v in args.probs.split(",")])
    if args.spec == "svg":
        return tr.svg_spec(dist.SvgParams(args.spec_r, args.spec_sigma, 0.0))
    raise ValueError(f"unknown spec {args.spec!r}")


def cmd_transform(args):
    w = _spec(args)
    kind = args.kind
    if kind == "centered_equilibrium" and args.order is None:
        raise ValueError("--order is required for the centered equilibrium transformation")
    if args.action == "sample":
        if kind == "zero_bias":
            xs = tr.zero_bias_sample(w, args.n, args.seed)
        elif kind == "square_bias":
            xs = tr.square_bias_sample(w, args.n, args.seed)
        else:
            xs = tr.centered_equilibrium_sample(w, args.order, args.n, args.seed)
        _emit("\n".join(repr(float(v)) for v in xs) + "\n", args.out)
        return EXIT_OK
    rows = []
    for x in _grid(args):
        try:
            if kind == "zero_bias":
                v = tr.zero_bias_density(w, x)
            elif kind == "square_bias":
                v = tr.square_bias_density(w, x)
            else:
                v = tr.centered_equilibrium_density(w, args.order, x)
        except dist.SingularityError:
            v = math.inf
        rows.append((x, v))
    _emit(_csv(["x", "density"], rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# distance

def cmd_distance(args):
    a = read_sample(args.sample)
    if args.sample2:
        b = read_sample(args.sample2)
        k = ds.kolmogorov_two_sample(a, b)
        w = ds.wasserstein_two_sample(a, b)
        target = dict(sample2=args.sample2)
    else:
        if args.r is None:
            raise ValueError("give --r (and optionally --sigma, --mu, --theta) or --sample2")
        if args.theta != 0.0:
            law = dist.VgParams(args.r, args.theta, args.sigma, args.mu)
            if args.metric != "kolmogorov":
                raise ValueError("Wasserstein estimates are implemented for SVG targets (theta = 0)")
        else:
            law = dist.SvgParams(args.r, args.sigma, args.mu)
        target = dict(r=args.r, sigma=args.sigma, mu=args.mu, theta=args.theta)
        k = ds.kolmogorov_empirical(a, law, n_boot=args.n_boot, seed=args.seed)
        w = None if args.metric == "kolmogorov" else ds.wasserstein_empirical(a, law, n_boot=args.n_boot,
                                                                                seed=args.seed)
    if args.metric == "kolmogorov":
        m = k
    elif args.metric == "wasserstein":
        m = w
    else:
        m = ds.bounded_wasserstein_proxy(w.value, k.value)
    payload = dict(metric=m.metric, value=m.value, n=m.n, se_hint=m.se_hint, target=target)
    _emit(_json(payload), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound

def _evaluate_bound(bid, kw):
    """Evaluate the formula behind ``bid`` from string-valued named flags."""
    f = lambda k, d=None: float(kw[k]) if k in kw else d
    if bid.startswith("coupling_"):
        reps = bd.general_coupling_bounds(f("r"), f("sigma", 1.0), beta=f("beta"),
                                          p_exceed=f("p_exceed"), mean_abs_delta=f("mean_abs_delta"))
    elif bid.startswith("vg_svg_"):
        reps = bd.vg_svg_bounds(dist.VgParams(f("r1"), f("theta1", 0.0), f("sigma1", 1.0), f("mu1", 0.0)),
                                dist.SvgParams(f("r2"), f("sigma2", 1.0), f("mu2", 0.0)))
    elif bid == "chaos_six_moment_wasserstein":
        reps = [bd.six_moment_bound(f("r"), f("sigma", 1.0), f("k2"), f("k3", 0.0), f("k4"), f("k6"))]
    elif bid.startswith("product_"):
        vanish = str(kw.get("third_moments_vanish", "false")).lower() in ("1", "true", "yes")
        reps = bd.product_clt_bounds(f("m"), f("n"), f("e_abs_x3"), f("e_abs_y3"), f("e_x4"), f("e_y4"),
                                     third_moments_vanish=vanish)
    elif bid.startswith(("random_sum_", "geometric_sum_")):
        support = None
        if "support_a" in kw or "support_b" in kw:
            support = (f("support_a"), f("support_b"))
        reps = bd.random_sum_bounds(f("sigma"), p_geo=f("p_geo"), rho=f("rho"), quantile_gap=f("quantile_gap"),
                                    support=support, mu_n=f("mu_n"),
                                    mean_abs_transform_gap=f("mean_abs_transform_gap"),
                                    sup_sigma=f("sup_sigma"), e_sqrt_abs_nm=f("e_sqrt_abs_nm"),
                                    bound_c=f("bound_c"), bound_k=f("bound_k"))
    elif bid in ("wasserstein_to_kolmogorov", "concentration"):
        p = dist.SvgParams(f("r"), f("sigma", 1.0), 0.0)
        constants = kw.get("constants", "exact")
        if bid == "concentration":
            val = ds.concentration_bound(p, f("alpha"), constants)
            inputs = dict(r=p.r, sigma=p.sigma, alpha=f("alpha"), constants=constants)
        else:
            val = ds.kolmogorov_from_wasserstein(p, f("d_w"), constants)
            inputs = dict(r=p.r, sigma=p.sigma, d_w=f("d_w"), constants=constants)
        reps = [BoundReport(bid, val, inputs)]
    else:
        raise ValueError(f"unknown bound id {bid!r}; choose from {', '.join(sorted(BOUND_CHOICES))}")
    for rep in reps:
        if rep.bound_id == bid:
            return rep
    raise ValueError(f"{bid} was not produced")


BOUND_CHOICES = sorted(list(bd.BOUND_IDS) + ["wasserstein_to_kolmogorov", "concentration"])


def cmd_bound(args, extra):
    kw = _named_flags(extra)
    missing = [k for k, v in kw.items() if v is None]
    if missing:
        raise ValueError(f"missing values for {missing}")
    rep = _evaluate_bound(args.id, kw)
    if args.empirical is not None:
        rep.attach(args.empirical)
    _emit(_json(rep.to_dict()), args.out)
    return EXIT_OK if rep.holds else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# experiment

def _x_spec(cfg):
    kind = str(cfg.pop("x", "rademacher"))
    if kind == "rademacher":
        return tr.rademacher()
    if kind == "discrete":
        vals = [float(v) for v in str(cfg.pop("values")).split(";")]
        probs = [float(v) for v in str(cfg.pop("probs")).split(";")]
        return tr.finite_discrete(vals, probs)
    raise ValueError(f"unknown summand law {kind!r}")


def _run_one(name, cfg):
    cfg = dict(cfg)
    if name == "d2":
        return [ex.run_d2(int(cfg["m"]), int(cfg.get("n", cfg["m"])), int(cfg.get("trials", 100_000)),
                          int(cfg.get("seed", 0)), int(cfg.get("n_boot", 20)))]
    if name == "random_sum":
        spec = _x_spec(cfg)
        return [ex.run_random_sum(float(cfg["p"]), spec, int(cfg.get("trials", 100_000)),
                                  int(cfg.get("seed", 0)), int(cfg.get("n_boot", 20)))]
    if name == "vg_compare":
        g = lambda k, d=None: float(cfg.get(k, d))
        p1 = dist.VgParams(g("r1"), g("theta1", 0.0), g("sigma1", 1.0), g("mu1", 0.0))
        p2 = dist.SvgParams(g("r2", cfg.get("r1")), g("sigma2", 1.0), g("mu2", 0.0))
        return [ex.run_vg_compare(p1, p2, int(cfg.get("trials", 100_000)), int(cfg.get("seed", 0)),
                                  int(cfg.get("n_boot", 20)))]
    if name == "fixed_point":
        law = str(cfg.get("law", "svg"))
        spec = None if law == "svg" else tr.rademacher() if law == "rademacher" else None
        if law not in ("svg", "rademacher"):
            raise ValueError("law must be svg or rademacher")
        return [ex.run_fixed_point(float(cfg["r"]), float(cfg.get("sigma", 1.0)), int(cfg.get("n", 100_000)),
                                   int(cfg.get("seed", 0)), spec)]
    if name == "inequality_suite":
        nus = np.linspace(float(cfg.get("nu_min", -0.45)), float(cfg.get("nu_max", 24.5)), int(cfg.get("nu_num", 40)))
        xs = np.geomspace(float(cfg.get("x_min", 1e-3)), float(cfg.get("x_max", 100.0)), int(cfg.get("x_num", 60)))
        return ex.run_inequality_suite(nus, xs)
    if name == "cf_diagnostic":
        spec = _x_spec(cfg)
        ts = [float(t) for t in str(cfg.get("t", "1")).split(";")]
        rows = []
        for d in ex.run_cf_diagnostic(float(cfg["p"]), spec, ts):
            row = ex.ResultRow("cf_diagnostic", 0, 0, dict(p=float(cfg["p"]), t=d["t"]))
            row.extras = {k: v for k, v in d.items() if k != "t"}
            rows.append(row)
        return rows
    raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(ex.EXPERIMENTS)}")


def _expand(cfg):
    """Cartesian product over comma-separated values."""
    keys = list(cfg)
    lists = [str(cfg[k]).split(",") for k in keys]
    for combo in itertools.product(*lists):
        yield {k: _parse_value(v) for k, v in zip(keys, combo)}


def cmd_experiment(args, extra):
    cfg = read_config(args.config) if args.config else {}
    cfg.update(_named_flags(extra))
    name = args.name or cfg.get("experiment")
    if not name:
        raise ValueError("name the experiment (positional argument or experiment = ... in the config)")
    cfg.pop("experiment", None)
    rows = []
    for combo in _expand(cfg):
        rows.extend(_run_one(name, combo))
    config = dict(experiment=name, **cfg)
    text = ex.rows_to_json(rows, config) if args.format == "json" else ex.rows_to_csv(rows, config)
    _emit(text, args.out)
    bad = any(r.violation or r.extras.get("holds") is False for r in rows)
    return EXIT_VIOLATION if bad else EXIT_OK


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    # usage errors exit with 1 so that 2 keeps meaning "bound violated"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="svgstein", description="Symmetric variance-gamma Stein toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dist", help="density, distribution function, samples and moments")
    p.add_argument("action", choices=["pdf", "cdf", "sample", "moment"])
    _add_params(p, theta=True)
    _add_grid(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", default="1,2", help="comma-separated moment orders")
    p.add_argument("--out")

    p = sub.add_parser("stein", help="Stein solution on a grid or bound verification")
    p.add_argument("action", choices=["eval", "verify"])
    _add_params(p)
    p.add_argument("--h", choices=["sign", "indicator", "smoothed_indicator", "sine"], default="sign")
    p.add_argument("--z", type=float, help="location of the indicator or sign jump (default mu)")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--a", type=float, default=1.0)
    _add_grid(p, num=41)
    p.add_argument("--out")

    p = sub.add_parser("transform", help="zero-bias, square-bias and centered equilibrium transformations")
    p.add_argument("action", choices=["sample", "density"])
    p.add_argument("--spec", choices=["rademacher", "discrete", "svg"], default="rademacher")
    p.add_argument("--values", help="comma-separated atoms of a discrete spec")
    p.add_argument("--probs", help="comma-separated probabilities of a discrete spec")
    p.add_argument("--spec-r", type=float, default=2.0, help="r of an svg spec")
    p.add_argument("--spec-sigma", type=float, default=1.0, help="sigma of an svg spec")
    p.add_argument("--kind", choices=["zero_bias", "square_bias", "centered_equilibrium"],
                   default="centered_equilibrium")
    p.add_argument("--order", type=float, help="order r of the centered equilibrium transformation")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_grid(p)
    p.add_argument("--out")

    p = sub.add_parser("distance", help="distance between a sample file and a target law or second sample")
    p.add_argument("--metric", choices=["kolmogorov", "wasserstein", "bounded_wasserstein"], required=True)
    p.add_argument("--sample", required=True, help="file with one value per line ('-' for stdin)")
    p.add_argument("--sample2")
    p.add_argument("--r", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n-boot", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("bound", help="evaluate an error bound; inputs as named flags (--m 1000 ...)")
    p.add_argument("--id", required=True, choices=BOUND_CHOICES)
    p.add_argument("--empirical", type=float, help="observed value to compare against the bound")
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="Monte Carlo experiments; extra --key value flags override the config")
    p.add_argument("name", nargs="?", choices=list(ex.EXPERIMENTS))
    p.add_argument("--config", help="flat key = value file; comma-separated values form a grid")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    return ap


def main(argv=None):
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    try:
        if args.command in ("bound", "experiment"):
            return {"bound": cmd_bound, "experiment": cmd_experiment}[args.command](args, extra)
        if extra:
            ap.error(f"unrecognized arguments: {' '.join(extra)}")
        return {"dist": cmd_dist, "stein": cmd_stein, "transform": cmd_transform,
                "distance": cmd_distance}[args.command](args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        msg = f"missing parameter {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"svgstein: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
