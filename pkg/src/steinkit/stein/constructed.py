"""Stein kernels built from marginals by one-dimensional integration.

Bivariate case, direction ``e₁``: with ``τ₁, ρ₁`` the Stein kernel and score of
the first marginal and ``s₁ = ∂₁ log p``,

``τ₁₁ = τ₁(x₁)``,
``τ₁₂ p(x) = τ₁(x₁) ∫_{−∞}^{x₂} (ρ₁(x₁) − s₁(x₁, v)) p(x₁, v) dv``.

Trivariate case, direction ``e₁``: the row is ``τ₁(x₁)(1, τ₁₂⁽³⁾, τ₁₃⁽³⁾)`` with

``τ₁₂⁽³⁾ p = ∫_{−∞}^{x₂} (ρ₁p − ∂₁p)(x₁,v,x₃) dv − P₂(x₂)(ρ₁p₁₃ − ∂₁p₁₃)(x₁,x₃)``,
``τ₁₃⁽³⁾ p = p₂(x₂) ∫_{−∞}^{x₃} (ρ₁p₁₃ − ∂₁p₁₃)(x₁,w) dw``,

where ``p₁₃`` and ``p₂`` are marginal densities and ``P₂`` is a marginal CDF.
Other directions follow by permuting coordinates.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from ..distributions.generators import GaussianGenerator, StudentGenerator
from ..errors import BudgetExceeded, QuadratureFailure, ValidationError
from ..quadrature import adaptive, mapped_real_line_rule, mapped_semi_infinite_rule
from .field import SteinKernelField
from .kernels import elliptical_tau1

__all__ = [
    "MarginalToolkit",
    "bivariate_marginal_kernel",
    "bivariate_marginal_kernel_field",
    "trivariate_marginal_kernel",
    "trivariate_marginal_kernel_field",
]


class _Budget:
    def __init__(self, max_evals):
        self.max_evals = max_evals
        self.used = 0

    def spend(self, n):
        self.used += int(n)
        if self.max_evals is not None and self.used > self.max_evals:
            raise BudgetExceeded(f"quadrature budget of {self.max_evals} density evaluations exceeded")


class MarginalToolkit:
    """Marginal densities, scores, CDFs and 1-D Stein kernels of a law.

    Closed forms are used for Gaussian and Student elliptical laws; any other
    law (or ``force_quadrature=True``) goes through Gauss-Legendre rules on
    the real line built from the joint log-density and score.

    Parameters
    ----------
    dist : object
        Exposes ``dim``, ``log_density``, ``score`` and ``mean``.
    nodes : int
        Nodes per axis of the fixed rules.
    """

    def __init__(self, dist, nodes=96, force_quadrature=False, scale=None):
        self.dist = dist
        self.d = dist.dim
        self.mean = np.asarray(dist.mean(), dtype=float)
        g = getattr(dist, "generator", None)
        self.analytic = (not force_quadrature) and isinstance(g, (GaussianGenerator, StudentGenerator))
        self.nodes = int(nodes)
        if scale is None:
            try:
                cov = np.asarray(dist.covariance(), dtype=float)
                scale = np.sqrt(np.where(np.isfinite(np.diag(cov)), np.diag(cov), 1.0))
            except (AttributeError, NotImplementedError):
                scale = np.ones(self.d)
        self.scale = np.broadcast_to(np.asarray(scale, dtype=float), (self.d,)).copy()
        self._cache = {}

    # helpers ---------------------------------------------------------------
    def _marg(self, idx):
        key = tuple(idx)
        if key not in self._cache:
            self._cache[key] = self.dist.marginal(list(idx))
        return self._cache[key]

    def _joint_points(self, fixed, free_axes, grids):
        """Points with coordinates ``fixed`` and the free axes set from grids."""
        mesh = np.meshgrid(*grids, indexing="ij")
        pts = np.broadcast_to(np.asarray(fixed, dtype=float), mesh[0].shape + (self.d,)).copy()
        for ax, m in zip(free_axes, mesh):
            pts[..., ax] = m
        return pts.reshape(-1, self.d)

    def _line_rule(self, axis):
        return mapped_real_line_rule(self.nodes, self.mean[axis], self.scale[axis])

    # marginal of subset ``idx`` (sorted) evaluated at ``xs`` ---------------
    def log_marginal(self, idx, xs, score_axis=None):
        """``log p_idx(xs)`` and optionally ``∂_{score_axis} log p_idx(xs)``.

        ``idx`` is a sorted tuple of coordinates, ``xs`` has shape
        ``(m, len(idx))``. ``score_axis`` is a member of ``idx``.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.analytic:
            m = self._marg(idx)
            lp = m.log_density(xs)
            if score_axis is None:
                return lp, None
            return lp, m.score(xs)[:, list(idx).index(score_axis)]
        free = [a for a in range(self.d) if a not in idx]
        rules = [self._line_rule(a) for a in free]
        grids = [r[0] for r in rules]
        W = rules[0][1]
        for r in rules[1:]:
            W = np.multiply.outer(W, r[1])
        W = W.ravel()
        lps, scs = [], []
        for x in xs:
            fixed = np.zeros(self.d)
            fixed[list(idx)] = x
            pts = self._joint_points(fixed, free, grids)
            lp = self.dist.log_density(pts)
            mx = np.max(lp)
            w = W * np.exp(lp - mx)
            tot = np.sum(w)
            if not tot > 0:
                raise QuadratureFailure("marginal density vanished on the quadrature grid")
            lps.append(mx + np.log(tot))
            if score_axis is not None:
                s = self.dist.score(pts)[:, score_axis]
                scs.append(np.sum(w * s) / tot)
        return np.array(lps), (np.array(scs) if score_axis is not None else None)

    def cdf_1d(self, axis, x):
        """Marginal CDF of coordinate ``axis`` at scalar ``x``."""
        if self.analytic:
            m = self._marg((axis,))
            z = (x - m.location[0]) / np.sqrt(m.dispersion[0, 0])
            g = m.generator
            if isinstance(g, GaussianGenerator):
                return float(special.ndtr(z))
            return float(special.stdtr(g.k, z))
        u, w = mapped_semi_infinite_rule(self.nodes, 0.0, self.scale[axis])
        pts = x - u
        lp, _ = self.log_marginal((axis,), pts[:, None])
        lpx, _ = self.log_marginal((axis,), [[self.mean[axis]]])
        # normalise with the full-line mass so the CDF tends to one
        uu, ww = self._line_rule(axis)
        lpf, _ = self.log_marginal((axis,), uu[:, None])
        total = np.sum(ww * np.exp(lpf - lpx[0]))
        return float(np.sum(w * np.exp(lp - lpx[0])) / total)

    def tau_1d(self, axis, x):
        """Classical Stein kernel ``(1/p_i(x))∫_x^∞ (u − μ_i) p_i(u) du``."""
        if self.analytic:
            m = self._marg((axis,))
            return float(elliptical_tau1(m).eval(np.array([x]))[0, 0])
        lpx, _ = self.log_marginal((axis,), [[x]])
        mu = self.mean[axis]

        def f(u):
            lp, _ = self.log_marginal((axis,), [[u]])
            return (u - mu) * np.exp(lp[0] - lpx[0])

        val, _ = adaptive(f, x, np.inf, epsabs=1e-10, epsrel=1e-10)
        return val

    def score_1d(self, axis, x):
        return float(self.log_marginal((axis,), [[x]], score_axis=axis)[1][0])


def _check_dist(dist, d):
    if getattr(dist, "dim", None) != d:
        raise ValidationError(f"expected a {d}-dimensional law")


def _biv_row(dist, tk, i, x, partial="score", h=None):
    """Row ``i`` of the bivariate construction at ``x`` (two entries)."""
    j = 1 - i
    x = np.asarray(x, dtype=float)
    lp0 = float(dist.log_density(x))
    rho_i = tk.score_1d(i, x[i])
    tau_i = tk.tau_1d(i, x[i])

    def integrand(v):
        y = x.copy()
        y[j] = v
        r = np.exp(float(dist.log_density(y)) - lp0)
        if partial == "score":
            s = float(dist.score(y)[i])
            return (rho_i - s) * r
        hh = h if h is not None else 1e-5 * (1.0 + abs(y[i]))
        yp, ym = y.copy(), y.copy()
        yp[i] += hh
        ym[i] -= hh
        dp = (np.exp(float(dist.log_density(yp)) - lp0) - np.exp(float(dist.log_density(ym)) - lp0)) / (2 * hh)
        return rho_i * r - dp

    val, _ = adaptive(integrand, -np.inf, x[j], epsabs=1e-12, epsrel=1e-11)
    row = np.zeros(2)
    row[i] = tau_i
    row[j] = tau_i * val
    return row


def bivariate_marginal_kernel(dist, x1, x2, partial="score", toolkit=None):
    """Entries ``(τ₁₁, τ₁₂)`` of the bivariate construction in direction ``e₁``.

    Parameters
    ----------
    dist : object
        Bivariate law with ``log_density``, ``score`` and ``mean``.
    partial : {"score", "fd"}
        How ``∂₁p`` is formed: ``p·s₁`` from the joint score, or central
        differences of the density.

    Raises
    ------
    QuadratureFailure
    """
    _check_dist(dist, 2)
    tk = toolkit or MarginalToolkit(dist)
    return _biv_row(dist, tk, 0, np.array([x1, x2], dtype=float), partial=partial)


def bivariate_marginal_kernel_field(dist, partial="score", both_rows=True, force_quadrature=False):
    """Kernel field from the bivariate construction.

    With ``both_rows`` the second row is the same construction in direction
    ``e₂``, giving a full 2×2 (generally non-symmetric) Stein kernel.
    """
    _check_dist(dist, 2)
    tk = MarginalToolkit(dist, force_quadrature=force_quadrature)
    rows = (0, 1) if both_rows else (0,)

    def ev(X):
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        return np.stack([np.stack([_biv_row(dist, tk, i, x, partial) for i in rows]) for x in X])

    return SteinKernelField(2, "bivariate_marginal", ev, tk.mean, rows=rows, params={"partial": partial},
                            quadrature=True)


def _triv_row(dist, tk, i, x, nodes, budget):
    j, k = [a for a in range(3) if a != i]
    x = np.asarray(x, dtype=float)
    lp0 = float(dist.log_density(x))
    rho_i = tk.score_1d(i, x[i])
    tau_i = tk.tau_1d(i, x[i])
    pair = tuple(sorted((i, k)))

    # ∫_{−∞}^{x_j} (ρ_i − s_i) p dv / p(x)
    u, w = mapped_semi_infinite_rule(nodes, 0.0, tk.scale[j])
    pts = np.repeat(x[None, :], nodes, axis=0)
    pts[:, j] = x[j] - u
    budget.spend(2 * nodes)
    r = np.exp(dist.log_density(pts) - lp0)
    inner_j = np.sum(w * (rho_i - dist.score(pts)[:, i]) * r)

    # (ρ_i p_ik − ∂_i p_ik)(x_i, x_k) / p(x)
    lpik, sik = tk.log_marginal(pair, [[x[a] for a in pair]], score_axis=i)
    budget.spend(1 if tk.analytic else tk.nodes)
    bracket = (rho_i - sik[0]) * np.exp(lpik[0] - lp0)
    Pj = tk.cdf_1d(j, x[j])

    # p_j(x_j) ∫_{−∞}^{x_k} (ρ_i p_ik − ∂_i p_ik)(x_i, w) dw / p(x)
    u2, w2 = mapped_semi_infinite_rule(nodes, 0.0, tk.scale[k])
    pk = np.empty((nodes, 2))
    pk[:, pair.index(i)] = x[i]
    pk[:, pair.index(k)] = x[k] - u2
    budget.spend(nodes if tk.analytic else nodes * tk.nodes)
    lpw, sw = tk.log_marginal(pair, pk, score_axis=i)
    lpj, _ = tk.log_marginal((j,), [[x[j]]])
    inner_k = np.sum(w2 * (rho_i - sw) * np.exp(lpw + lpj[0] - lp0))

    row = np.zeros(3)
    row[i] = tau_i
    row[j] = tau_i * (inner_j - Pj * bracket)
    row[k] = tau_i * inner_k
    return row


def trivariate_marginal_kernel(dist, x, nodes=64, max_evals=10**6, toolkit=None):
    """Row ``(τ₁, τ₁₂⁽³⁾, τ₁₃⁽³⁾)`` in direction ``e₁`` of the trivariate construction.

    Parameters
    ----------
    nodes : int
        Gauss-Legendre nodes of each mapped half-line rule.
    max_evals : int
        Budget of joint-density evaluations for one row.

    Raises
    ------
    QuadratureFailure, BudgetExceeded
    """
    _check_dist(dist, 3)
    tk = toolkit or MarginalToolkit(dist)
    return _triv_row(dist, tk, 0, np.asarray(x, dtype=float), int(nodes), _Budget(max_evals))


def trivariate_marginal_kernel_field(dist, nodes=64, max_evals=10**6, rows=(0,), force_quadrature=False):
    """Kernel field from the trivariate construction (rows chosen by ``rows``)."""
    _check_dist(dist, 3)
    tk = MarginalToolkit(dist, force_quadrature=force_quadrature)
    rows = tuple(rows)

    def ev(X):
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        out = []
        for x in X:
            out.append(np.stack([_triv_row(dist, tk, i, x, int(nodes), _Budget(max_evals)) for i in rows]))
        return np.stack(out)

    return SteinKernelField(3, "trivariate_marginal", ev, tk.mean, rows=rows,
                            params={"nodes": int(nodes), "max_evals": max_evals}, quadrature=True)
