"""Closed-form and ODE-based Stein kernels for elliptical laws.

Every function returns a :class:`SteinKernelField`; a distribution has many
Stein kernels when ``d > 1``, so callers always name the construction.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..distributions.elliptical import EllipticalDistribution, check_spd
from ..distributions.generators import DensityGenerator, GaussianGenerator, PowerExpGenerator, StudentGenerator
from ..errors import (
    BetaEqualsTwo,
    DegreesTooSmall,
    DimensionOne,
    DivergentTail,
    OdeResidualTooLarge,
    ValidationError,
    ZetaEqualsOne,
)
from ..quadrature import adaptive
from .field import SteinKernelField

__all__ = [
    "gaussian_const",
    "elliptical_tau1",
    "elliptical_tau_ab",
    "corollary_b",
    "tau_ab_ode_residual",
    "elliptical_tau2beta",
    "tau2beta_coefficients",
    "gaussian_tau2beta",
    "student_tau1",
    "student_tau2",
    "powerexp_tau2",
    "affine_transport_kernel",
    "diagonal_stein_kernel_1d_integrals",
    "stein_kernel",
]

ODE_PROBE_T = (0.05, 0.3, 1.0, 2.5, 6.0)


def _batch(x, d):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, d)


def _quad_form(Z, P):
    return np.einsum("ni,ij,nj->n", Z, P, Z)


def _outer(Z):
    return Z[:, :, None] * Z[:, None, :]


def _check_beta(beta, d):
    if d < 2:
        raise DimensionOne("the tau_{2,beta} family needs d >= 2")
    if beta == 2:
        raise BetaEqualsTwo("beta = 2 is excluded from the tau_{2,beta} family")
    return float(beta)


# ---------------------------------------------------------------------------
def gaussian_const(dist: EllipticalDistribution):
    """Constant kernel ``τ = Σ`` of ``N(ν, Σ)``."""
    S = np.array(dist.dispersion)
    d = dist.dim
    return SteinKernelField(
        d, "gaussian_const", lambda X: np.broadcast_to(S, (_batch(X, d).shape[0], d, d)).copy(), dist.location
    )


def elliptical_tau1(dist: EllipticalDistribution):
    """``τ₁(x) = (1/φ(t))∫_t^∞ φ(u)du · Σ``.

    The tail ratio is analytic for the built-in generators and computed by
    adaptive quadrature for callable generators.

    Raises
    ------
    DivergentTail
        When the tail integral of ``φ`` diverges (Student with ``k + d ≤ 2``).
    """
    g = dist.generator
    if isinstance(g, StudentGenerator) and g.k + g.d <= 2:
        raise DivergentTail("tail integral of the Student generator diverges for k + d <= 2")
    S = np.array(dist.dispersion)
    d = dist.dim

    def ev(X):
        Z = _batch(X, d) - dist.location
        t = 0.5 * _quad_form(Z, dist.precision)
        r = np.atleast_1d(g.tail_ratio(t))
        return r[:, None, None] * S

    numeric = type(g).tail_ratio is DensityGenerator.tail_ratio
    return SteinKernelField(d, "elliptical_tau1", ev, dist.location, quadrature=numeric)


def tau_ab_ode_residual(generator, d, a, b, t, da=None, db=None):
    """Residual of ``a′ + aψ + 2t(b′ + bψ) + (d+1)b + 1`` at ``t``.

    ``da`` and ``db`` default to central differences of ``a`` and ``b``.
    """
    t = float(t)
    # relative step: kernel coefficients may behave like 1/t near the origin
    h = 1e-5 * t if t > 0 else 1e-8
    lo = max(t - h, 0.0)
    if da is None:
        da_v = (a(t + h) - a(lo)) / (t + h - lo)
    else:
        da_v = da(t)
    if db is None:
        db_v = (b(t + h) - b(lo)) / (t + h - lo)
    else:
        db_v = db(t)
    psi = float(generator.log_deriv1(t))
    return da_v + a(t) * psi + 2.0 * t * (db_v + b(t) * psi) + (d + 1) * b(t) + 1.0


def elliptical_tau_ab(dist: EllipticalDistribution, a, b, da=None, db=None, probe_t=ODE_PROBE_T, tol=1e-6,
                      check=True, singular_at_location=False):
    """``τ(x) = a(t)Σ + b(t)(x−ν)(x−ν)ᵀ`` for scalar functions ``a`` and ``b``.

    The pair must solve ``(aφ)′/φ + 2t(bφ)′/φ + (d+1)b + 1 = 0``; this is
    checked at ``probe_t`` (relative to the size of the terms).

    Raises
    ------
    OdeResidualTooLarge
        If the ODE residual exceeds ``tol`` at a probe.
    """
    g = dist.generator
    d = dist.dim
    if check:
        for t in probe_t:
            res = tau_ab_ode_residual(g, d, a, b, t, da, db)
            scale = 1.0 + abs(a(t)) + abs(t * b(t))
            if not np.isfinite(res) or abs(res) > tol * scale:
                raise OdeResidualTooLarge(f"ODE residual {res:.3e} at t={t}")
    S = np.array(dist.dispersion)
    va = np.vectorize(a, otypes=[float])
    vb = np.vectorize(b, otypes=[float])

    def ev(X):
        Z = _batch(X, d) - dist.location
        t = 0.5 * _quad_form(Z, dist.precision)
        return va(t)[:, None, None] * S + vb(t)[:, None, None] * _outer(Z)

    sing = (np.array(dist.location),) if singular_at_location else ()
    return SteinKernelField(d, "elliptical_tau_ab", ev, dist.location, singular_points=sing)


def corollary_b(generator, d):
    """The ``a ≡ 0`` solution ``b(t) = t^{−(d+1)/2}/(2φ(t)) ∫_t^∞ u^{(d−1)/2}φ(u)du``.

    Returns ``(b, db)``; ``db`` is the exact derivative
    ``−(d+1)b/(2t) − ψb − 1/(2t)``.
    """

    def b(t):
        t = float(t)
        if t <= 0:
            raise ValidationError("the a = 0 kernel is singular at the location")
        tail = generator.weighted_tail_integral(t, 0.5 * (d - 1))
        return t ** (-0.5 * (d + 1)) * tail / (2.0 * float(generator.eval(t)))

    def db(t):
        bt = b(t)
        return -(d + 1) * bt / (2.0 * t) - float(generator.log_deriv1(t)) * bt - 1.0 / (2.0 * t)

    return b, db


def tau2beta_coefficients(generator, d, beta, t):
    """Scalar coefficients ``(a, b)`` of the ``τ_{2,β}`` kernel at ``t``.

    With ``ψ = φ′/φ`` and ``c = β − 2ψ′/ψ²`` the kernel is
    ``[c(QΣ − zzᵀ)/(d−1) + 2Σ/ψ]/(β−2)``, ``Q = 2t``, so that
    ``a = (cQ/(d−1) + 2/ψ)/(β−2)`` and ``b = −c/((β−2)(d−1))``. The limits
    ``β → ∞`` and ``β → 0`` are returned exactly.
    """
    t = np.asarray(t, dtype=float)
    psi = np.asarray(generator.log_deriv1(t), dtype=float)
    dpsi = np.asarray(generator.log_deriv1_prime(t), dtype=float)
    Q = 2.0 * t
    if np.isinf(beta):
        return Q / (d - 1), -np.ones_like(t) / (d - 1)
    r = dpsi / psi**2
    if beta == 0:
        return r * Q / (d - 1) - 1.0 / psi, -r / (d - 1)
    c = beta - 2.0 * r
    return (c * Q / (d - 1) + 2.0 / psi) / (beta - 2.0), -c / ((beta - 2.0) * (d - 1))


def elliptical_tau2beta(dist: EllipticalDistribution, beta):
    """General ``τ_{2,β}`` kernel of an elliptical law, from ``φ′/φ`` and ``φ″/φ′``."""
    d = dist.dim
    beta = _check_beta(beta, d)
    S = np.array(dist.dispersion)
    g = dist.generator

    def ev(X):
        Z = _batch(X, d) - dist.location
        t = 0.5 * _quad_form(Z, dist.precision)
        a, b = tau2beta_coefficients(g, d, beta, t)
        return a[:, None, None] * S + b[:, None, None] * _outer(Z)

    sing = (np.array(dist.location),) if isinstance(g, PowerExpGenerator) and g.zeta != 1 else ()
    return SteinKernelField(d, "elliptical_tau2beta", ev, dist.location, params={"beta": beta},
                            singular_points=sing)


def gaussian_tau2beta(Sigma, beta, location=None):
    """``τ_{2,β}(x) = β/((β−2)(d−1))(QΣ − zzᵀ) − 2Σ/(β−2)`` for ``N(ν, Σ)``.

    ``β = 0`` gives ``Σ``, ``β = inf`` gives ``(QΣ − zzᵀ)/(d−1)``.

    Raises
    ------
    BetaEqualsTwo, DimensionOne
    """
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    d = S.shape[0]
    beta = _check_beta(beta, d)
    check_spd(S)
    P = np.linalg.inv(S)
    nu = np.zeros(d) if location is None else np.asarray(location, dtype=float)

    def ev(X):
        Z = _batch(X, d) - nu
        Q = _quad_form(Z, P)
        M = Q[:, None, None] * S - _outer(Z)
        if np.isinf(beta):
            return M / (d - 1)
        if beta == 0:
            return np.broadcast_to(S, M.shape).copy()
        return beta / ((beta - 2.0) * (d - 1)) * M - 2.0 / (beta - 2.0) * S

    return SteinKernelField(d, "gaussian_tau2beta", ev, nu, params={"beta": beta})


def student_tau1(k, location, Sigma):
    """``τ₁(x) = (Q + k)/(d + k − 2) · Σ`` for ``t_k(ν, Σ)``.

    Raises
    ------
    DegreesTooSmall
        For ``k ≤ 1`` (the kernel is then not integrable).
    """
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    d = nu.size
    if k <= 1:
        raise DegreesTooSmall("student_tau1 needs k > 1")
    check_spd(S)
    P = np.linalg.inv(S)

    def ev(X):
        Z = _batch(X, d) - nu
        return ((_quad_form(Z, P) + k) / (d + k - 2.0))[:, None, None] * S

    return SteinKernelField(d, "student_tau1", ev, nu, params={"k": float(k)})


def student_tau2(k, location, Sigma):
    """``τ₂(x) = ((x−ν)(x−ν)ᵀ + kΣ)/(k − 1)`` for ``t_k(ν, Σ)``.

    Meant for ``k > 2``; ``1 < k ≤ 2`` evaluates with a warning.

    Raises
    ------
    DegreesTooSmall
        For ``k ≤ 1``.
    """
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    d = nu.size
    if k <= 1:
        raise DegreesTooSmall("student_tau2 needs k > 1")
    if k <= 2:
        warnings.warn("student_tau2 with k <= 2: the variance is infinite", RuntimeWarning, stacklevel=2)
    check_spd(S)

    def ev(X):
        Z = _batch(X, d) - nu
        return (_outer(Z) + k * S) / (k - 1.0)

    return SteinKernelField(d, "student_tau2", ev, nu, params={"k": float(k)})


def powerexp_tau2(b, zeta, beta, location, Sigma):
    """``τ_{2,ζ}`` kernel of the power-exponential law ``∝ exp(−b Q^ζ)``.

    With ``D = βbζQ^ζ + 2(ζ−1)`` it reads

    ``τ = [(D − (d−1))QΣ − D(x−ν)(x−ν)ᵀ] / (bζQ^ζ(β−2)(d−1))``,

    which is the usual display with the removable factor cleared. The limit
    ``β = inf`` is ``(QΣ − zzᵀ)/(d−1)``. The field is singular at ``x = ν``
    when ``ζ ≠ 1``.

    Raises
    ------
    BetaEqualsTwo, DimensionOne, ZetaEqualsOne
    """
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    d = nu.size
    beta = _check_beta(beta, d)
    if zeta == 1:
        raise ZetaEqualsOne("use gaussian_tau2beta for zeta = 1")
    if not (b > 0 and zeta > 0):
        raise ValidationError("power-exponential needs b > 0 and zeta > 0")
    check_spd(S)
    P = np.linalg.inv(S)

    def ev(X):
        Z = _batch(X, d) - nu
        Q = _quad_form(Z, P)
        zz = _outer(Z)
        QS = Q[:, None, None] * S
        if np.isinf(beta):
            return (QS - zz) / (d - 1)
        bzq = b * zeta * Q**zeta
        D = beta * bzq + 2.0 * (zeta - 1.0)
        num = (D - (d - 1))[:, None, None] * QS - D[:, None, None] * zz
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / (bzq * (beta - 2.0) * (d - 1))[:, None, None]

    return SteinKernelField(d, "powerexp_tau2", ev, nu, params={"b": b, "zeta": zeta, "beta": beta},
                            singular_points=(nu.copy(),))


def affine_transport_kernel(tau0: SteinKernelField, location, Sigma):
    """Move a kernel of ``E_d(0, I, φ)`` to ``E_d(ν, Σ, φ)``.

    ``τ(x) = Σ^{1/2} τ₀(Σ^{−1/2}(x−ν)) Σ^{1/2}`` with the symmetric root.

    Raises
    ------
    NonSpdDispersion
    """
    S = np.atleast_2d(np.asarray(Sigma, dtype=float))
    check_spd(S)
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    d = nu.size
    if tau0.dim != d:
        raise ValidationError("kernel and dispersion dimensions differ")
    w, V = np.linalg.eigh(S)
    R = (V * np.sqrt(w)) @ V.T
    Rinv = (V / np.sqrt(w)) @ V.T

    def ev(X):
        Y = (_batch(X, d) - nu) @ Rinv
        return R @ tau0.batch_eval(Y) @ R

    sing = tuple(nu + R @ s for s in tau0.singular_points)
    params = dict(tau0.params, base=tau0.construction)
    return SteinKernelField(d, "affine_transport", ev, nu, params=params, quadrature=tau0.quadrature,
                            singular_points=sing)


def diagonal_stein_kernel_1d_integrals(dist, mean=None, epsabs=1e-11):
    """Diagonal kernel with ``τ_i(x) = (1/p(x))∫_{x_i}^∞ (u − ν_i) p(x₁..u..x_d) du``.

    The integrand is formed as ``(u − ν_i)exp(log p(..u..) − log p(x))`` so
    that no normalising constant is needed and nothing underflows.

    Parameters
    ----------
    dist : object
        Any law exposing ``dim`` and ``log_density``.
    mean : array_like, optional
        ``ν``; defaults to ``dist.mean()``.

    Raises
    ------
    DivergentTail
        If a tail integral does not converge.
    """
    d = dist.dim
    nu = np.asarray(dist.mean() if mean is None else mean, dtype=float)
    logp = dist.log_density

    def one(x):
        lp0 = float(logp(x))
        out = np.zeros((d, d))
        for i in range(d):
            def integrand(u, i=i):
                y = x.copy()
                y[i] = u
                return (u - nu[i]) * np.exp(float(logp(y)) - lp0)
            try:
                val, _ = adaptive(integrand, x[i], np.inf, epsabs=epsabs, epsrel=1e-11)
            except Exception as exc:  # noqa: BLE001 - any quadrature breakdown means a bad tail
                raise DivergentTail(f"tail integral in direction {i} failed: {exc}") from exc
            out[i, i] = val
        return out

    def ev(X):
        return np.stack([one(np.array(x)) for x in _batch(X, d)])

    return SteinKernelField(d, "diagonal_1d", ev, nu, quadrature=True)


# ---------------------------------------------------------------------------
def stein_kernel(dist, construction, **params):
    """Factory: build the kernel ``construction`` for ``dist``.

    Supported tags: ``gaussian_const``, ``elliptical_tau1``,
    ``elliptical_tau_ab`` (params ``a``, ``b`` or ``variant="a0"``),
    ``gaussian_tau2beta`` / ``elliptical_tau2beta`` (``beta``),
    ``powerexp_tau2`` (``beta``), ``student_tau1``, ``student_tau2``,
    ``diagonal_1d``, ``bivariate_marginal``, ``trivariate_marginal``.
    """
    g = getattr(dist, "generator", None)
    if construction == "gaussian_const":
        if not isinstance(g, GaussianGenerator):
            raise ValidationError("gaussian_const needs a Gaussian target")
        return gaussian_const(dist)
    if construction == "elliptical_tau1":
        return elliptical_tau1(dist)
    if construction == "elliptical_tau_ab":
        if params.get("variant", "a0") == "a0" and "a" not in params:
            b, db = corollary_b(g, dist.dim)
            return elliptical_tau_ab(dist, lambda t: 0.0, b, da=lambda t: 0.0, db=db,
                                     singular_at_location=True)
        return elliptical_tau_ab(dist, params["a"], params["b"], params.get("da"), params.get("db"))
    if construction == "gaussian_tau2beta":
        if not isinstance(g, GaussianGenerator):
            raise ValidationError("gaussian_tau2beta needs a Gaussian target")
        return gaussian_tau2beta(dist.dispersion, params.get("beta", np.inf), dist.location)
    if construction == "elliptical_tau2beta":
        return elliptical_tau2beta(dist, params.get("beta", np.inf))
    if construction == "powerexp_tau2":
        if not isinstance(g, PowerExpGenerator):
            raise ValidationError("powerexp_tau2 needs a power-exponential target")
        return powerexp_tau2(g.b, g.zeta, params.get("beta", 4.0), dist.location, dist.dispersion)
    if construction in ("student_tau1", "student_tau2"):
        if not isinstance(g, StudentGenerator):
            raise ValidationError(f"{construction} needs a Student target")
        fn = student_tau1 if construction == "student_tau1" else student_tau2
        return fn(g.k, dist.location, dist.dispersion)
    if construction == "diagonal_1d":
        return diagonal_stein_kernel_1d_integrals(dist)
    if construction == "bivariate_marginal":
        from .constructed import bivariate_marginal_kernel_field

        return bivariate_marginal_kernel_field(dist, **params)
    if construction == "trivariate_marginal":
        from .constructed import trivariate_marginal_kernel_field

        return trivariate_marginal_kernel_field(dist, **params)
    raise ValidationError(f"unknown construction {construction!r}")
