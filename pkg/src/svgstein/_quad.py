"""Thin wrappers around QUADPACK and fixed-order Gauss-Legendre panels."""

import numpy as np
from scipy import integrate

from .errors import QuadratureError

_GL_CACHE = {}


def gl_nodes(order):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def quad(func, a, b, rtol=1e-12, atol=0.0, points=None, weight=None, wvar=None,
         limit=400, accept=1e-9, floor=0.0):
    """Adaptive quadrature that raises instead of warning.

    Parameters
    ----------
    func : callable
        Scalar integrand.
    a, b : float
        Finite limits.
    rtol, atol : float
        Tolerances passed to QUADPACK.
    points : sequence of float, optional
        Interior break points (ignored when a weight is used).
    weight, wvar : optional
        QUADPACK weight specification, e.g. ``weight="alg"``.
    accept : float
        Largest acceptable ratio of the error estimate to ``max(|value|, floor)``.
    floor : float
        Absolute scale below which the relative criterion is not applied.

    Returns
    -------
    float
    """
    if b <= a:
        return 0.0
    kw = dict(epsabs=atol, epsrel=rtol, limit=limit, full_output=1)
    if weight is not None:
        kw["weight"] = weight
        kw["wvar"] = wvar
    elif points is not None:
        pts = sorted({float(p) for p in points if a < p < b})
        if pts:
            kw["points"] = pts
            kw["limit"] = max(limit, 2 * len(pts) + 50)
    out = integrate.quad(func, a, b, **kw)
    val, err = out[0], out[1]
    if not np.isfinite(val) or err > accept * max(abs(val), floor) + atol:
        raise QuadratureError("quadrature did not converge", achieved=err, value=val)
    return val


def gl_integrate(func, left, right, order=16):
    """Integrate a vectorised ``func`` over many panels at once.

    Parameters
    ----------
    func : callable
        Accepts an array of abscissae and returns values of the same shape.
    left, right : ndarray
        Panel end points (same shape).

    Returns
    -------
    ndarray
        Integral over each panel.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    s, w = gl_nodes(order)
    width = right - left
    pts = left[..., None] + width[..., None] * s
    vals = func(pts)
    return width * (vals @ w)
