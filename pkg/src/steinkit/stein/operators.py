"""First- and second-order Stein operators.

Test functions are plain callables acting on a batch ``(n, d)`` and returning
``(n,)``; gradients ``(n, d)`` and Hessians ``(n, d, d)`` may be supplied,
otherwise central differences are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..numdiff import default_step
from .field import SteinKernelField

__all__ = [
    "canonical_derivative",
    "score_stein_apply",
    "kernel_stein_apply",
    "second_order_apply",
    "VectorStandardization",
    "SecondOrderOperator",
    "fd_gradient_batch",
    "fd_hessian_batch",
]


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def fd_gradient_batch(g, X, h=None):
    """Central-difference gradient of ``g`` at each row of ``X``."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    hs = np.array([default_step(x) for x in X]) if h is None else np.full(n, float(h))
    G = np.empty((n, d))
    for j in range(d):
        E = np.zeros((n, d))
        E[:, j] = hs
        G[:, j] = (np.asarray(g(X + E)) - np.asarray(g(X - E))) / (2.0 * hs)
    return G


def fd_hessian_batch(g, X, h=None):
    """Four-point central-difference Hessian of ``g`` at each row of ``X``."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    hs = (np.finfo(float).eps ** 0.25 * (1.0 + np.linalg.norm(X, axis=1))) if h is None else np.full(n, float(h))
    H = np.empty((n, d, d))
    g0 = np.asarray(g(X))
    for i in range(d):
        Ei = np.zeros((n, d))
        Ei[:, i] = hs
        H[:, i, i] = (np.asarray(g(X + Ei)) - 2.0 * g0 + np.asarray(g(X - Ei))) / hs**2
        for j in range(i + 1, d):
            Ej = np.zeros((n, d))
            Ej[:, j] = hs
            v = (np.asarray(g(X + Ei + Ej)) - np.asarray(g(X + Ei - Ej)) - np.asarray(g(X - Ei + Ej))
                 + np.asarray(g(X - Ei - Ej))) / (4.0 * hs**2)
            H[:, i, j] = H[:, j, i] = v
    return H


def canonical_derivative(dist, phi, e, x, grad_phi=None):
    """``T_{e,p}φ(x) = ∂_e(pφ)(x)/p(x) = ⟨∇φ(x), e⟩ + φ(x)⟨ρ_p(x), e⟩``.

    Parameters
    ----------
    dist : object
        Provides ``score``.
    phi : callable
        Scalar field on batches.
    e : array_like
        Unit direction.
    """
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValidationError("direction e must have unit norm")
    X, single = _as_batch(x)
    G = fd_gradient_batch(phi, X) if grad_phi is None else np.asarray(grad_phi(X))
    val = G @ e + np.asarray(phi(X)) * (dist.score(X) @ e)
    return float(val[0]) if single else val


def score_stein_apply(dist, g, x, grad_g=None):
    """``A_p g = ∇g + ρ_p g``."""
    X, single = _as_batch(x)
    G = fd_gradient_batch(g, X) if grad_g is None else np.asarray(grad_g(X))
    val = G + dist.score(X) * np.asarray(g(X))[:, None]
    return val[0] if single else val


def kernel_stein_apply(tau: SteinKernelField, g, x, grad_g=None, location=None):
    """``A_p g = τ(x)∇g(x) − (x − ν)g(x)``; ``ν`` defaults to the kernel's target mean."""
    X, single = _as_batch(x)
    nu = tau.target_mean if location is None else np.asarray(location, dtype=float)
    G = fd_gradient_batch(g, X) if grad_g is None else np.asarray(grad_g(X))
    T = tau.eval(X)
    val = np.einsum("nij,nj->ni", T, G) - ((X - nu) * np.asarray(g(X))[:, None])[:, list(tau.rows)]
    return val[0] if single else val


@dataclass(frozen=True)
class VectorStandardization:
    """Vector-valued operator; ``kind`` is ``"score_based"`` or ``"kernel_based"``."""

    kind: str
    dist: object = None
    tau: SteinKernelField = None

    def __post_init__(self):
        if self.kind not in ("score_based", "kernel_based"):
            raise ValidationError(f"unknown standardization {self.kind!r}")
        if self.kind == "kernel_based" and self.tau is None:
            raise ValidationError("kernel_based standardization needs a kernel")
        if self.kind == "score_based" and self.dist is None:
            raise ValidationError("score_based standardization needs a distribution")

    def apply(self, g, x, grad_g=None):
        if self.kind == "score_based":
            return score_stein_apply(self.dist, g, x, grad_g)
        return kernel_stein_apply(self.tau, g, x, grad_g)


@dataclass(frozen=True)
class SecondOrderOperator:
    """Scalar second-order operator.

    ``laplacian_score``: ``⟨ρ_p, ∇g⟩ + Δg``.
    ``kernel_hessian``: ``⟨∇g, ν − x⟩ + ⟨∇²g, τ⟩_HS``.
    """

    kind: str
    dist: object = None
    tau: SteinKernelField = None

    def __post_init__(self):
        if self.kind not in ("laplacian_score", "kernel_hessian"):
            raise ValidationError(f"unknown second-order operator {self.kind!r}")
        if self.kind == "kernel_hessian" and self.tau is None:
            raise ValidationError("kernel_hessian needs a kernel")
        if self.kind == "laplacian_score" and self.dist is None:
            raise ValidationError("laplacian_score needs a distribution")

    def apply(self, g, x, grad_g=None, hess_g=None):
        X, single = _as_batch(x)
        G = fd_gradient_batch(g, X) if grad_g is None else np.asarray(grad_g(X))
        H = fd_hessian_batch(g, X) if hess_g is None else np.asarray(hess_g(X))
        if self.kind == "laplacian_score":
            val = np.einsum("ni,ni->n", self.dist.score(X), G) + np.trace(H, axis1=1, axis2=2)
        else:
            nu = self.tau.target_mean
            val = np.einsum("ni,ni->n", G, nu - X) + np.einsum("nij,nij->n", H, self.tau.eval(X))
        return float(val[0]) if single else val


def second_order_apply(op: SecondOrderOperator, g, x, grad_g=None, hess_g=None):
    """Evaluate a :class:`SecondOrderOperator` on ``g`` at ``x``."""
    return op.apply(g, x, grad_g, hess_g)
