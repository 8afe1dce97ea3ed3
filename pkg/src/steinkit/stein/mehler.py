"""Monte Carlo solution of the Gaussian Stein equation.

The equation ``∇ᵀΣ∇f(w) − wᵀ∇f(w) = h(w) − E h(Σ^{1/2}Z)`` is solved by

``f(w) = −∫_0^1 (1/(2t)) (E h(√t w + √(1−t)Σ^{1/2}Z) − E h(Σ^{1/2}Z)) dt``.

The leading minus sign is fixed by the linear case: for ``h(w) = ⟨c, w⟩``
the exact solution is ``f = −⟨c, w⟩``, whereas the integral without the sign
returns ``+⟨c, w⟩``. The substitution ``t = s²`` turns ``dt/(2t)`` into
``ds/s`` and removes the endpoint singularity; the ``s`` integral uses
Gauss-Legendre nodes, the expectation uses common random numbers ``Z`` for
every ``w`` so that ``f`` is smooth in ``w`` and can be differentiated.
The draws come in antithetic pairs ``±Z``, which makes the sample mean of
``Z`` vanish and the linear case exact up to quadrature error.
"""

from __future__ import annotations

import numpy as np

from ..distributions.elliptical import check_spd
from ..quadrature import gauss_legendre
from ..rng import as_stream

__all__ = ["MehlerSolver", "mehler_solve", "mehler_residual", "MEHLER_SIGN"]

MEHLER_SIGN = -1.0


class MehlerSolver:
    """Reusable solver holding the common random numbers.

    Parameters
    ----------
    Sigma : array_like
        SPD covariance.
    h : callable
        Test function on batches ``(m, d) -> (m,)``.
    mc_draws : int
    quad_nodes : int
    rng : RngStream, Generator or int
    """

    def __init__(self, Sigma, h, mc_draws=10**5, quad_nodes=64, rng=0):
        S = np.atleast_2d(np.asarray(Sigma, dtype=float))
        check_spd(S)
        w, V = np.linalg.eigh(S)
        self.Sigma = S
        self.root = (V * np.sqrt(w)) @ V.T
        self.h = h
        self.d = S.shape[0]
        gen = as_stream(rng)
        half = gen.standard_normal(((int(mc_draws) + 1) // 2, self.d)) @ self.root
        self.Y = np.vstack([half, -half])
        self.s, self.ws = gauss_legendre(int(quad_nodes), 0.0, 1.0)
        self.Eh = float(np.mean(h(self.Y)))

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        single = w.ndim == 1
        W = np.atleast_2d(w)
        out = np.empty(W.shape[0])
        for m, wi in enumerate(W):
            acc = 0.0
            for s, ws in zip(self.s, self.ws):
                vals = self.h(s * wi + np.sqrt(1.0 - s * s) * self.Y)
                acc += ws * (np.mean(vals) - self.Eh) / s
            out[m] = MEHLER_SIGN * acc
        return float(out[0]) if single else out

    def residual(self, w, step=1e-2):
        """``∇ᵀΣ∇f − wᵀ∇f − (h − Eh)`` at ``w`` by central differences of ``f``."""
        w = np.asarray(w, dtype=float)
        d = self.d
        E = np.eye(d) * step
        pts = [w]
        for i in range(d):
            pts += [w + E[i], w - E[i]]
            for j in range(i + 1, d):
                pts += [w + E[i] + E[j], w + E[i] - E[j], w - E[i] + E[j], w - E[i] - E[j]]
        vals = iter(self(np.array(pts)))
        f0 = next(vals)
        grad = np.zeros(d)
        H = np.zeros((d, d))
        for i in range(d):
            fp, fm = next(vals), next(vals)
            grad[i] = (fp - fm) / (2 * step)
            H[i, i] = (fp - 2 * f0 + fm) / step**2
            for j in range(i + 1, d):
                a, b, c, e = next(vals), next(vals), next(vals), next(vals)
                H[i, j] = H[j, i] = (a - b - c + e) / (4 * step**2)
        lhs = np.sum(self.Sigma * H) - w @ grad
        return float(lhs - (float(self.h(w[None, :])[0]) - self.Eh))


def mehler_solve(Sigma, h, w, mc_draws=10**5, quad_nodes=64, rng=0):
    """Value of the Stein-equation solution ``f(w)`` (see module docstring).

    Raises
    ------
    NonSpdDispersion
    """
    return MehlerSolver(Sigma, h, mc_draws, quad_nodes, rng)(w)


def mehler_residual(Sigma, h, probes, mc_draws=10**5, quad_nodes=64, rng=0, step=1e-2):
    """Stein-equation residuals of the Monte Carlo solution at each probe."""
    solver = MehlerSolver(Sigma, h, mc_draws, quad_nodes, rng)
    return np.array([solver.residual(np.asarray(p, dtype=float), step) for p in np.atleast_2d(probes)])
