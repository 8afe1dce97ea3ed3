"""Wasserstein bounds for nested densities ``p₂ = π₀ p₁``.

Strong log-concavity with constant ``k`` gives ``d_W ≤ E‖∇π₀(X₁)‖/k``; a
Poincaré constant ``C_p`` gives ``d_W ≤ C_p √E‖∇π₀(X₁)‖²``. Specialisations
cover copulas against independence, normal posteriors under flat and normal
priors, and the skew-normal law against the standard normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .distributions.copula import AmhCopula
from .distributions.elliptical import check_spd
from .errors import QuadratureFailure, ThetaOutOfRange, ValidationError, WrongRegime, ZeroSkew
from .quadrature import tensor_gauss_legendre
from .rng import as_stream
from .stats import jackknife_mean

__all__ = [
    "NestedPair",
    "BoundReport",
    "gaussian_rule",
    "uniform_square_rule",
    "nested_bound_logconcave",
    "nested_bound_poincare",
    "copula_bound",
    "amh_closed_form_cap",
    "amh_integral_cap",
    "operator_norm",
    "normal_posterior_bound",
    "chi_mean",
    "skew_normal_distance",
    "skew_normal_distance_mc_check",
    "stein_kernel_bound_1d",
    "UNIT_SQUARE_POINCARE",
]

UNIT_SQUARE_POINCARE = 2.0 / np.pi**2


@dataclass(frozen=True)
class NestedPair:
    """A base law ``p₁`` and a ratio ``π₀ = p₂/p₁``.

    Parameters
    ----------
    base : object
        Base law; needs ``sample`` for Monte Carlo estimates.
    grad_pi0 : callable
        ``(n, d) -> (n, d)`` gradient of ``π₀``.
    regime : {"strongly_log_concave", "poincare"}
    constant : float
        ``k`` for the log-concave regime, ``C_p`` for the Poincaré regime.
    pi0 : callable, optional
        ``π₀`` itself (only used for diagnostics).
    """

    base: object
    grad_pi0: object
    regime: str
    constant: float
    pi0: object = None

    def __post_init__(self):
        if self.regime not in ("strongly_log_concave", "poincare"):
            raise ValidationError(f"unknown regime {self.regime!r}")
        if not self.constant > 0:
            raise ValidationError("the regime constant must be positive")


@dataclass
class BoundReport:
    """Bound value with the method used and an error estimate."""

    value: float
    regime: str
    method: str
    error: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value >= 0):
            raise QuadratureFailure(f"bound is not a finite non-negative number: {self.value}")

    def to_dict(self):
        return {"value": self.value, "regime": self.regime, "method": self.method, "error": self.error,
                "details": self.details}


def gaussian_rule(dist, n=40):
    """Tensor Gauss-Hermite rule for a Gaussian law in ``d ≤ 2``.

    Returns nodes ``(m, d)`` and weights summing to one.
    """
    d = dist.dim
    if d > 2:
        raise ValidationError("gaussian_rule supports d <= 2")
    z, w = np.polynomial.hermite_e.hermegauss(int(n))
    w = w / np.sqrt(2 * np.pi)
    if d == 1:
        Z, W = z[:, None], w
    else:
        A, B = np.meshgrid(z, z, indexing="ij")
        Z = np.column_stack([A.ravel(), B.ravel()])
        W = np.outer(w, w).ravel()
    return dist.location + Z @ dist.chol.T, W


def uniform_square_rule(n=64, cluster=0.0):
    """Tensor Gauss-Legendre rule on ``[0,1]²`` (weights sum to one)."""
    X1, X2, W = tensor_gauss_legendre(n, 0.0, 1.0, cluster)
    return np.column_stack([X1, X2]), W


def _moment(pair: NestedPair, power, samples, rule, n, rng):
    if rule is not None:
        X, W = rule
        norms = np.linalg.norm(np.asarray(pair.grad_pi0(np.asarray(X)), dtype=float).reshape(len(W), -1), axis=1)
        return float(np.sum(W * norms**power)), 0.0, "quadrature"
    if samples is None:
        if n is None:
            raise ValidationError("give samples, a quadrature rule or a sample size")
        samples = pair.base.sample(n, as_stream(rng))
    X = np.asarray(samples, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    norms = np.linalg.norm(np.asarray(pair.grad_pi0(X), dtype=float).reshape(X.shape[0], -1), axis=1)
    est = jackknife_mean(norms**power)
    return float(est.estimate), float(est.standard_error), "mc"


def nested_bound_logconcave(pair: NestedPair, samples=None, rule=None, n=None, rng=None):
    """``(1/k) E‖∇π₀(X₁)‖`` by Monte Carlo (with SE) or by a quadrature rule.

    Raises
    ------
    WrongRegime
        Unless ``pair.regime == "strongly_log_concave"``.
    """
    if pair.regime != "strongly_log_concave":
        raise WrongRegime("nested_bound_logconcave needs a strongly log-concave base")
    m, se, method = _moment(pair, 1, samples, rule, n, rng)
    k = pair.constant
    return BoundReport(m / k, pair.regime, method, se / k)


def nested_bound_poincare(pair: NestedPair, samples=None, rule=None, n=None, rng=None):
    """``C_p √E‖∇π₀(X₁)‖²``; the error is propagated by the delta method.

    Raises
    ------
    WrongRegime
        Unless ``pair.regime == "poincare"``.
    """
    if pair.regime != "poincare":
        raise WrongRegime("nested_bound_poincare needs a Poincare constant")
    m2, se, method = _moment(pair, 2, samples, rule, n, rng)
    val = pair.constant * np.sqrt(m2)
    err = pair.constant * se / (2 * np.sqrt(m2)) if m2 > 0 else 0.0
    return BoundReport(float(val), pair.regime, method, float(err))


def copula_bound(copula, n=64, check_n=128, cluster=None, rtol=1e-6):
    """``(2/π²)√∫_{[0,1]²}‖∇c‖²`` by tensor Gauss-Legendre quadrature.

    Parameters
    ----------
    copula : AmhCopula or callable
        A callable must map ``(x1, x2)`` arrays to gradients of shape
        ``(..., 2)``.
    n, check_n : int
        Nodes per axis of the main rule and of the refinement check.
    cluster : float, optional
        tanh clustering strength; by default 2.5 for an AMH copula with
        ``|θ| > 0.7`` and 0 otherwise.

    Raises
    ------
    QuadratureFailure
        If the two rules disagree by more than ``rtol`` (relative).
    """
    if isinstance(copula, AmhCopula):
        grad = copula.gradient
        if cluster is None:
            cluster = 2.5 if abs(copula.theta) > 0.7 else 0.0
    else:
        grad = copula
    cluster = cluster or 0.0

    def integral(m):
        X1, X2, W = tensor_gauss_legendre(m, 0.0, 1.0, cluster)
        G = np.asarray(grad(X1, X2))
        return float(np.sum(W * np.sum(G**2, axis=-1)))

    I1, I2 = integral(n), integral(check_n)
    err = abs(I2 - I1)
    if err > rtol * max(abs(I2), 1e-300) and err > 1e-12:
        raise QuadratureFailure(f"copula integral not converged: {I1} vs {I2}")
    value = UNIT_SQUARE_POINCARE * np.sqrt(max(I2, 0.0))
    derr = UNIT_SQUARE_POINCARE * err / (2 * np.sqrt(I2)) if I2 > 0 else 0.0
    return BoundReport(float(value), "poincare", "quadrature", float(derr),
                       details={"integral": I2, "integral_coarse": I1, "nodes": [n, check_n],
                                "cluster": cluster})


def amh_closed_form_cap(theta):
    """``2.3|θ|(1 − |θ|)^{−4}``.

    Raises
    ------
    ThetaOutOfRange
        Unless ``|θ| < 1``.
    """
    theta = float(theta)
    if not -1 < theta < 1:
        raise ThetaOutOfRange("AMH parameter must satisfy |theta| < 1")
    return 2.3 * abs(theta) * (1.0 - abs(theta)) ** -4


def amh_integral_cap(theta):
    """``128θ²(1 − |θ|)^{−8}``, the cap on ``∫‖∇c‖²``."""
    theta = float(theta)
    if not -1 < theta < 1:
        raise ThetaOutOfRange("AMH parameter must satisfy |theta| < 1")
    return 128.0 * theta**2 * (1.0 - abs(theta)) ** -8



def operator_norm(A, tol=1e-10, maxiter=100000):
    """Largest singular value of ``A`` by power iteration on ``AᵀA``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.any(A):
        return 0.0
    M = A.T @ A
    v = np.random.default_rng(0).standard_normal(M.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = M @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - lam) <= tol * new:
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))


def chi_mean(d):
    """``E‖N‖ = √2 Γ((d+1)/2)/Γ(d/2)`` for ``N ~ N(0, I_d)``."""
    return float(np.sqrt(2.0) * np.exp(special.gammaln(0.5 * (d + 1)) - special.gammaln(0.5 * d)))


def normal_posterior_bound(Sigma, Sigma2, n, xbar, mu):
    """Bound between the flat-prior and normal-prior posteriors of a normal mean.

    ``|||Σ||| |||(Σ+nΣ₂)⁻¹||| ‖x̄−μ‖ + E‖N‖ (|||Σ|||/n) |||(Σ₂+nΣ₂Σ⁻¹Σ₂)^{−1/2}|||``,
    with ``|||·|||`` the spectral norm. For an SPD matrix ``M`` the norm of
    ``M^{−1/2}`` equals ``√|||M⁻¹|||``.

    Raises
    ------
    NonSpdInput
        When ``Sigma`` or ``Sigma2`` is not symmetric positive definite.
    """
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    S2 = np.atleast_2d(np.asarray(Sigma2, dtype=float))
    check_spd(S, "Sigma")
    check_spd(S2, "Sigma2")
    if int(n) < 1:
        raise ValidationError("n must be at least 1")
    d = S.shape[0]
    diff = np.atleast_1d(np.asarray(xbar, dtype=float) - np.asarray(mu, dtype=float))
    nS = operator_norm(S)
    first = nS * operator_norm(np.linalg.inv(S + n * S2)) * float(np.linalg.norm(diff))
    M = S2 + n * S2 @ np.linalg.solve(S, S2)
    M = 0.5 * (M + M.T)
    second = chi_mean(d) * nS / n * np.sqrt(operator_norm(np.linalg.inv(M)))
    return BoundReport(float(first + second), "strongly_log_concave", "closed_form",
                       details={"location_term": float(first), "spread_term": float(second)})


def skew_normal_distance(alpha):
    """``d_W = √(2/π)‖α‖/√(1+‖α‖²)`` between the skew-normal and ``N(0, I)``."""
    a = float(np.linalg.norm(np.atleast_1d(np.asarray(alpha, dtype=float))))
    return float(np.sqrt(2.0 / np.pi) * a / np.sqrt(1.0 + a * a))


def skew_normal_distance_mc_check(alpha, n, rng=None):
    """Monte Carlo value of ``E h(X) − E h(Z)`` for ``h(x) = ⟨α/‖α‖, x⟩``.

    ``X`` is built from ``Z`` by the sign-flip representation, so the two
    expectations share their randomness.

    Returns
    -------
    (estimate, standard_error)

    Raises
    ------
    ZeroSkew
        When ``α = 0``.
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    na = np.linalg.norm(a)
    if na == 0:
        raise ZeroSkew("alpha must be non-zero")
    gen = as_stream(rng)
    Z = gen.standard_normal((int(n), a.size))
    U = gen.uniform(size=int(n))
    X = np.where((U < special.ndtr(Z @ a))[:, None], Z, -Z)
    e = a / na
    est = jackknife_mean(X @ e - Z @ e)
    return float(est.estimate), float(est.standard_error)


def stein_kernel_bound_1d(base, tau, dpi0, nodes=80):
    """One-dimensional bound ``E[τ(X₁)|π₀′(X₁)|]`` by Gauss-Hermite quadrature.

    ``base`` must be a univariate Gaussian; ``tau`` is a scalar callable.
    """
    X, W = gaussian_rule(base, nodes)
    x = X[:, 0]
    return BoundReport(float(np.sum(W * np.asarray(tau(x)) * np.abs(np.asarray(dpi0(x))))),
                       "strongly_log_concave", "quadrature")
