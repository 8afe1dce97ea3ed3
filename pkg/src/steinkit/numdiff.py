"""Central finite differences."""

from __future__ import annotations

import numpy as np

__all__ = ["default_step", "gradient", "hessian", "jacobian"]

_CBRT_EPS = np.cbrt(np.finfo(float).eps)


def default_step(x):
    """``cbrt(eps)·(1+‖x‖)``: balances truncation and rounding for first derivatives."""
    return _CBRT_EPS * (1.0 + float(np.linalg.norm(x)))


def gradient(f, x, h=None):
    """Central-difference gradient of a scalar function at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = default_step(x) if h is None else h
    g = np.empty(x.size)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def jacobian(f, x, h=None):
    """Central-difference Jacobian; column ``j`` is ``∂f/∂x_j``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = default_step(x) if h is None else h
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def hessian(f, x, h=None):
    """Hessian by the four-point central formula (symmetric by construction)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if h is None:
        h = np.finfo(float).eps ** 0.25 * (1.0 + float(np.linalg.norm(x)))
    d = x.size
    H = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
            H[i, j] = H[j, i] = v
    return H
