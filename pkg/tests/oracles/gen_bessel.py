"""Regenerate tests/data/bessel_oracle.csv.

I_nu is summed directly from its power series at 60 digits; K_nu comes from
mpmath.besselk and is spot-checked against the cosh integral representation.
Run from the repository root: ``python3 tests/oracles/gen_bessel.py``.
"""

import csv
from pathlib import Path

import mpmath as mp

mp.mp.dps = 60

NUS = ["-0.45", "-0.25", "0", "0.5", "1", "2.5", "5", "12", "24.5"]
N_X = 60
OUT = Path(__file__).resolve().parents[1] / "data" / "bessel_oracle.csv"


def i_series(nu, x):
    half = x / 2
    term = half ** nu / mp.gamma(nu + 1)
    total = term
    k = 0
    while True:
        k += 1
        term *= half * half / (k * (nu + k))
        total += term
        if term < total * mp.mpf(10) ** (-55):
            return total


def k_integral(nu, x):
    # integrand is below 1e-80 beyond x cosh(t) = 200
    top = mp.acosh(max(200 / x, 2))
    knots = [0] + [top * j / 16 for j in range(1, 17)]
    return mp.quad(lambda t: mp.exp(-x * mp.cosh(t)) * mp.cosh(nu * t), knots)


def main():
    lo, hi = mp.log10(mp.mpf("1e-6")), mp.log10(mp.mpf(500))
    xs = [float(mp.mpf(10) ** (lo + (hi - lo) * j / (N_X - 1))) for j in range(N_X)]
    rows = []
    for s in NUS:
        nu = mp.mpf(s)
        for x in xs:
            xm = mp.mpf(x)
            iv = i_series(nu, xm)
            kv = mp.besselk(nu, xm)
            assert abs(iv / mp.besseli(nu, xm) - 1) < mp.mpf(10) ** -40
            rows.append((s, repr(x), mp.nstr(iv, 25, strip_zeros=False),
                         mp.nstr(kv, 25, strip_zeros=False)))
    for s in ("0", "2.5"):
        for x in ("0.01", "1", "30"):
            a, b = mp.besselk(mp.mpf(s), mp.mpf(x)), k_integral(mp.mpf(s), mp.mpf(x))
            assert abs(a / b - 1) < mp.mpf(10) ** -30
    OUT.parent.mkdir(exist_ok=True)
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "x", "I_value", "K_value"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
