"""Quadrature helpers.

Adaptive integration is delegated to QUADPACK through :func:`scipy.integrate.quad`
(Gauss-Kronrod 21-point rule with interval bisection). Fixed rules for nested
integrals use Gauss-Legendre nodes mapped to the relevant interval.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

__all__ = [
    "adaptive",
    "gauss_legendre",
    "mapped_semi_infinite_rule",
    "mapped_real_line_rule",
    "tensor_gauss_legendre",
]

DEFAULT_EPSABS = 1e-9
DEFAULT_LIMIT = 200


def adaptive(f, a, b, epsabs=DEFAULT_EPSABS, epsrel=1e-9, limit=DEFAULT_LIMIT, points=None):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    Infinite endpoints are accepted. Returns ``(value, abserr)``.

    Raises
    ------
    QuadratureFailure
        If QUADPACK reports a problem and the error estimate is not small, or
        if the result is not finite.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
            if points is not None and np.isfinite(a) and np.isfinite(b):
                kw["points"] = points
            val, err = integrate.quad(f, a, b, **kw)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=4 * limit)
            if not np.isfinite(val) or err > max(1e3 * epsabs, 1e-6 * abs(val)):
                raise QuadratureFailure(f"adaptive quadrature did not converge: {exc}") from exc
    if not np.isfinite(val):
        raise QuadratureFailure("adaptive quadrature returned a non-finite value")
    return val, err


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def mapped_semi_infinite_rule(n, lower=0.0, scale=1.0):
    """Rule for ``∫_lower^∞ f(u) du`` using ``u = lower + scale·s/(1−s)``.

    Returns nodes and weights that already include the Jacobian.
    """
    s, w = gauss_legendre(n, 0.0, 1.0)
    u = lower + scale * s / (1.0 - s)
    return u, w * scale / (1.0 - s) ** 2


def mapped_real_line_rule(n, center=0.0, scale=1.0):
    """Rule for ``∫_{-∞}^{∞} f(u) du`` using ``u = center + scale·tan(πs/2)``."""
    s, w = gauss_legendre(n, -1.0, 1.0)
    u = center + scale * np.tan(0.5 * np.pi * s)
    return u, w * scale * 0.5 * np.pi / np.cos(0.5 * np.pi * s) ** 2


def tensor_gauss_legendre(n, lo=0.0, hi=1.0, cluster=0.0):
    """Two-dimensional tensor rule on ``[lo, hi]²``.

    Parameters
    ----------
    n : int
        Nodes per axis.
    cluster : float
        When positive, nodes are pushed toward both edges with the map
        ``x = ½(1 + tanh(c·s)/tanh(c))``, ``s ∈ [−1, 1]``.

    Returns
    -------
    X1, X2, W : ndarray
        Flattened node coordinates and product weights.
    """
    s, w = gauss_legendre(n, -1.0, 1.0)
    if cluster > 0:
        c = float(cluster)
        x = 0.5 * (1.0 + np.tanh(c * s) / np.tanh(c))
        w = w * 0.5 * c / (np.tanh(c) * np.cosh(c * s) ** 2)
    else:
        x = 0.5 * (1.0 + s)
        w = 0.5 * w
    x = lo + (hi - lo) * x
    w = (hi - lo) * w
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return X1.ravel(), X2.ravel(), W.ravel()
