"""Kernelized Stein discrepancies.

For a vector operator ``A_p g = A(y)∇g + a(y)g`` the doubly Steinized kernel is

``A_{p,1}ᵀA_{p,2}k(y, y′) = Σ_{a,c} (A(y)ᵀA(y′))_{ac} ∂_{y_a}∂_{y′_c}k
+ (A(y)ᵀa(y′))·∇_y k + (A(y′)ᵀa(y))·∇_{y′}k + a(y)·a(y′) k``.

The score operator is ``A = I, a = ρ_p``; the kernel operator is
``A = τ_p, a = ν − y``. Fields act as coefficients: only the smooth kernel
``k`` is differentiated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySample, SizeMismatch, ValidationError
from .stats import MCEstimate, jackknife_mean

__all__ = [
    "SmoothKernel",
    "RbfKernel",
    "median_heuristic",
    "ScorePair",
    "SteinKernelPair",
    "GeneralPair",
    "ConstantPair",
    "u_score",
    "u_stein_kernel",
    "u_general",
    "KsdEstimate",
    "ksd",
    "fisher_distance_mc",
    "independent_kernel_discrepancy",
]


class SmoothKernel:
    """Interface of a bivariate kernel with derivatives on sample blocks.

    ``block(Y, Yp)`` returns ``(k, grad1, grad2, grad12)`` with shapes
    ``(n1, n2)``, ``(n1, n2, d)``, ``(n1, n2, d)`` and ``(n1, n2, d, d)``,
    where ``grad12[..., a, c] = ∂_{y_a}∂_{y′_c} k``.
    """

    def block(self, Y, Yp):
        raise NotImplementedError

    def eval(self, y, yp):
        return float(self.block(np.atleast_2d(y), np.atleast_2d(yp))[0][0, 0])

    def grad1(self, y, yp):
        return self.block(np.atleast_2d(y), np.atleast_2d(yp))[1][0, 0]

    def grad2(self, y, yp):
        return self.block(np.atleast_2d(y), np.atleast_2d(yp))[2][0, 0]

    def grad12(self, y, yp):
        return self.block(np.atleast_2d(y), np.atleast_2d(yp))[3][0, 0]

    def gram(self, X):
        return self.block(X, X)[0]


@dataclass(frozen=True)
class RbfKernel(SmoothKernel):
    """``k(x, x′) = exp(−‖x − x′‖²/(2σ²))``; ``σ = 1`` by default."""

    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValidationError("bandwidth must be positive")

    def block(self, Y, Yp, need_grad12=True):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        Yp = np.atleast_2d(np.asarray(Yp, dtype=float))
        s2 = self.bandwidth**2
        D = Y[:, None, :] - Yp[None, :, :]
        k = np.exp(-0.5 * np.einsum("ijk,ijk->ij", D, D) / s2)
        g1 = -D / s2 * k[..., None]
        g2 = -g1
        g12 = None
        if need_grad12:
            d = Y.shape[1]
            g12 = (np.eye(d) / s2 - D[..., :, None] * D[..., None, :] / s2**2) * k[..., None, None]
        return k, g1, g2, g12

    def trace_grad12(self, Y, Yp):
        """``Σ_a ∂_{y_a}∂_{y′_a}k = (d/σ² − ‖y−y′‖²/σ⁴)k`` without forming the tensor."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        Yp = np.atleast_2d(np.asarray(Yp, dtype=float))
        s2 = self.bandwidth**2
        D = Y[:, None, :] - Yp[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", D, D)
        k = np.exp(-0.5 * r2 / s2)
        return (Y.shape[1] / s2 - r2 / s2**2) * k, k, -D / s2 * k[..., None]


def median_heuristic(X):
    """Bandwidth ``σ`` equal to the median pairwise distance of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    D = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1))
    iu = np.triu_indices(X.shape[0], 1)
    med = float(np.median(D[iu]))
    return med if med > 0 else 1.0


# --------------------------------------------------------------------------
class _Pair:
    """Base for pair functions ``u(y, y′)`` evaluated on blocks."""

    def matrix(self, Y, Yp):
        raise NotImplementedError

    def __call__(self, y, yp):
        return float(self.matrix(np.atleast_2d(y), np.atleast_2d(yp))[0, 0])


@dataclass(frozen=True)
class ConstantPair(_Pair):
    """``u ≡ c``; a degenerate pair function used for calibration checks."""

    value: float = 0.0

    def matrix(self, Y, Yp):
        return np.full((np.atleast_2d(Y).shape[0], np.atleast_2d(Yp).shape[0]), float(self.value))


@dataclass(frozen=True)
class ScorePair(_Pair):
    """Score-based pair function.

    ``u = ∇₁ᵀ∇₂k + a(y′)ᵀ∇₁k + a(y)ᵀ∇₂k + a(y)ᵀa(y′)k`` with ``a = ρ_p`` or,
    when ``score_q`` is given, ``a = ρ_p − ρ_q``.
    """

    score_p: object
    kernel: SmoothKernel = RbfKernel()
    score_q: object = None

    def _a(self, Y):
        a = np.asarray(self.score_p(Y), dtype=float).reshape(Y.shape)
        if self.score_q is not None:
            a = a - np.asarray(self.score_q(Y), dtype=float).reshape(Y.shape)
        return a

    def matrix(self, Y, Yp):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        Yp = np.atleast_2d(np.asarray(Yp, dtype=float))
        ay, ayp = self._a(Y), self._a(Yp)
        if isinstance(self.kernel, RbfKernel):
            tr, k, g1 = self.kernel.trace_grad12(Y, Yp)
            g2 = -g1
        else:
            k, g1, g2, g12 = self.kernel.block(Y, Yp)
            tr = np.trace(g12, axis1=2, axis2=3)
        return (tr + np.einsum("jd,ijd->ij", ayp, g1) + np.einsum("id,ijd->ij", ay, g2)
                + (ay @ ayp.T) * k)


def _field(F, Y, shape):
    return np.asarray(F(Y), dtype=float).reshape(shape)


@dataclass(frozen=True)
class GeneralPair(_Pair):
    """Pair function of the operator difference ``A_p − A_q`` (see module docstring).

    Parameters
    ----------
    A_p, A_q : callable or None
        Matrix fields ``(n, d) -> (n, d, d)``; ``None`` means zero.
    a_p, a_q : callable or None
        Vector fields ``(n, d) -> (n, d)``; ``None`` means zero.
    """

    A_p: object = None
    a_p: object = None
    A_q: object = None
    a_q: object = None
    kernel: SmoothKernel = RbfKernel()

    def _fields(self, Y):
        n, d = Y.shape
        A = np.zeros((n, d, d))
        a = np.zeros((n, d))
        if self.A_p is not None:
            A = A + _field(self.A_p, Y, (n, d, d))
        if self.A_q is not None:
            A = A - _field(self.A_q, Y, (n, d, d))
        if self.a_p is not None:
            a = a + _field(self.a_p, Y, (n, d))
        if self.a_q is not None:
            a = a - _field(self.a_q, Y, (n, d))
        return A, a

    def matrix(self, Y, Yp):
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        Yp = np.atleast_2d(np.asarray(Yp, dtype=float))
        Ay, ay = self._fields(Y)
        Ayp, ayp = self._fields(Yp)
        k, g1, g2, g12 = self.kernel.block(Y, Yp)
        # Σ_b A_ba(y) A_bc(y′) G_ac
        t1 = np.einsum("iba,jbc,ijac->ij", Ay, Ayp, g12, optimize=True)
        t2 = np.einsum("iba,jb,ija->ij", Ay, ayp, g1, optimize=True)
        t3 = np.einsum("jbc,ib,ijc->ij", Ayp, ay, g2, optimize=True)
        return t1 + t2 + t3 + (ay @ ayp.T) * k


@dataclass(frozen=True)
class SteinKernelPair(_Pair):
    """``u = tr(τ(y)ᵀτ(y′)∂₁∂₂k)`` with ``τ = τ_p − τ_q`` (no zero-order part)."""

    tau_p: object
    tau_q: object = None
    kernel: SmoothKernel = RbfKernel()

    def matrix(self, Y, Yp):
        return GeneralPair(A_p=_eval_field(self.tau_p), A_q=_eval_field(self.tau_q), kernel=self.kernel).matrix(Y, Yp)


def _eval_field(tau):
    if tau is None:
        return None
    if hasattr(tau, "eval"):
        return tau.eval
    return tau


def u_score(p_score, kernel, y, yp):
    """Single-pair score pair function."""
    return ScorePair(p_score, kernel)(y, yp)


def u_stein_kernel(tau_p, tau_q, kernel, y, yp):
    """Single-pair Stein-kernel difference pair function."""
    return SteinKernelPair(tau_p, tau_q, kernel)(y, yp)


def u_general(A_p, a_p, A_q, a_q, kernel, y, yp):
    """Single-pair general pair function for ``A_p − A_q``."""
    return GeneralPair(_eval_field(A_p), a_p, _eval_field(A_q), a_q, kernel)(y, yp)


# --------------------------------------------------------------------------
@dataclass(frozen=True)
class KsdEstimate:
    """Sample-based discrepancy with its jackknife standard error."""

    value: float
    pair_count: int
    standard_error: float
    estimator: str

    def to_dict(self):
        return {"value": self.value, "pair_count": self.pair_count, "standard_error": self.standard_error,
                "estimator": self.estimator}


def _pair_matrix(u, Y, Yp, chunk_size):
    n1 = Y.shape[0]
    if chunk_size is None or n1 <= chunk_size:
        return u.matrix(Y, Yp)
    return np.vstack([u.matrix(Y[s:s + chunk_size], Yp) for s in range(0, n1, chunk_size)])


def ksd(samples_y, samples_yprime=None, u=None, estimator="two_sample", chunk_size=None):
    """Sample discrepancy from a pair function ``u``.

    Parameters
    ----------
    samples_y, samples_yprime : array_like
        ``(n1, d)`` and ``(n2, d)`` samples (a 1-D array is read as ``d = 1``).
    u : pair function
        Object with ``matrix(Y, Yp)``.
    estimator : {"two_sample", "u_statistic_single_sample"}
        ``two_sample`` averages ``u`` over all ``n1·n2`` pairs of two
        independent samples. ``u_statistic_single_sample`` uses ``samples_y``
        only and averages over ordered pairs ``i ≠ j``.
    chunk_size : int, optional
        Rows of ``samples_y`` per block; blocks are reduced in a fixed order.

    Raises
    ------
    EmptySample
        When a sample has fewer than two points.
    """
    Y = np.asarray(samples_y, dtype=float)
    Y = Y[:, None] if Y.ndim == 1 else Y
    if Y.shape[0] < 2:
        raise EmptySample("ksd needs at least two points per sample")
    if estimator == "two_sample":
        if samples_yprime is None:
            raise EmptySample("two_sample estimator needs a second sample")
        Yp = np.asarray(samples_yprime, dtype=float)
        Yp = Yp[:, None] if Yp.ndim == 1 else Yp
        if Yp.shape[0] < 2:
            raise EmptySample("ksd needs at least two points per sample")
        if Yp.shape[1] != Y.shape[1]:
            raise SizeMismatch("samples have different dimensions")
        U = _pair_matrix(u, Y, Yp, chunk_size)
        est = jackknife_mean(U.mean(axis=1))
        return KsdEstimate(float(est.estimate), int(U.size), float(est.standard_error), "two_sample")
    if estimator == "u_statistic_single_sample":
        U = _pair_matrix(u, Y, Y, chunk_size)
        n = Y.shape[0]
        diag = np.diag(U)
        total = U.sum() - diag.sum()
        value = total / (n * (n - 1))
        if n > 2:
            loo = (total - (U.sum(axis=1) - diag) - (U.sum(axis=0) - diag)) / ((n - 1) * (n - 2))
            se = np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
        else:
            se = 0.0
        return KsdEstimate(float(value), int(n * (n - 1)), float(se), "u_statistic_single_sample")
    raise ValidationError(f"unknown estimator {estimator!r}")


def fisher_distance_mc(score_p, score_q, samples_y):
    """Plug-in estimate of ``E_q‖ρ_p(Y) − ρ_q(Y)‖²`` from ``Y ~ q``."""
    Y = np.asarray(samples_y, dtype=float)
    Y = Y[:, None] if Y.ndim == 1 else Y
    diff = np.asarray(score_p(Y)).reshape(Y.shape) - np.asarray(score_q(Y)).reshape(Y.shape)
    return jackknife_mean(np.sum(diff**2, axis=1))


def independent_kernel_discrepancy(standardization, basis, weights, samples):
    """``Σ_i α_i ‖E[A_p e_i(Y)]‖²`` with sample means in place of expectations.

    Parameters
    ----------
    standardization : object
        Has ``apply(g, X, grad_g)`` returning ``(n, d)`` (see
        :class:`steinkit.stein.VectorStandardization`).
    basis : sequence
        Test functions ``e_i``; each is a callable or a ``(g, grad_g)`` pair.
    weights : sequence of float
        Non-negative ``α_i``.

    Returns
    -------
    MCEstimate
        Standard error by the delta method on the squared norms.
    """
    X = np.asarray(samples, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValidationError("weights must be non-negative")
    if len(basis) != w.size:
        raise SizeMismatch("basis and weights differ in length")
    n = X.shape[0]
    value = 0.0
    grad_terms = np.zeros(n)
    for alpha, e in zip(w, basis):
        g, dg = (e if isinstance(e, tuple) else (e, None))
        V = np.asarray(standardization.apply(g, X, dg), dtype=float)
        m = V.mean(axis=0)
        value += alpha * float(m @ m)
        grad_terms += 2.0 * alpha * (V - m) @ m
    se = float(np.sqrt(np.sum(grad_terms**2)) / n)
    return MCEstimate(value, se, n)
