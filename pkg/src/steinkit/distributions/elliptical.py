"""Elliptical distributions ``E_d(ν, Σ, φ)``."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import NonSpdDispersion, SingularPoint, ValidationError
from ..rng import as_stream
from .generators import DensityGenerator, GaussianGenerator, PowerExpGenerator, StudentGenerator

__all__ = [
    "EllipticalDistribution",
    "gaussian",
    "student",
    "power_exp",
    "score_power_exp",
    "check_spd",
]


def check_spd(S, name="dispersion", sym_tol=1e-12):
    """Validate a symmetric positive-definite matrix and return its Cholesky factor.

    Raises
    ------
    NonSpdDispersion
        When ``S`` is not square, not symmetric to ``sym_tol`` or a pivot is
        not positive.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NonSpdDispersion(f"{name} must be square, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonSpdDispersion(f"{name} has non-finite entries")
    if np.max(np.abs(S - S.T), initial=0.0) > sym_tol:
        raise NonSpdDispersion(f"{name} is not symmetric")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NonSpdDispersion(f"{name} is not positive definite") from exc
    if np.any(np.diag(L) <= 0):
        raise NonSpdDispersion(f"{name} is not positive definite")
    return L


class EllipticalDistribution:
    """The law with density ``κ|Σ|^{−1/2} φ(½(x−ν)ᵀΣ⁻¹(x−ν))``.

    Parameters
    ----------
    location : array_like, shape (d,)
    dispersion : array_like, shape (d, d)
        Symmetric positive definite.
    generator : DensityGenerator
    norm_const : float, optional
        ``κ``. Computed from the generator when omitted.

    Notes
    -----
    Instances are immutable after construction and safe to share between
    threads. All point-wise methods accept either one point of shape ``(d,)``
    or a batch of shape ``(n, d)``.
    """

    def __init__(self, location, dispersion, generator: DensityGenerator, norm_const=None):
        nu = np.atleast_1d(np.asarray(location, dtype=float))
        S = np.atleast_2d(np.asarray(dispersion, dtype=float))
        if nu.ndim != 1 or S.shape != (nu.size, nu.size):
            raise ValidationError("location and dispersion shapes disagree")
        self.chol = check_spd(S)
        self.location = nu
        self.dispersion = S
        self.generator = generator
        self.dim = nu.size
        self.precision = linalg.cho_solve((self.chol, True), np.eye(self.dim))
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(self.chol))))
        w, V = np.linalg.eigh(S)
        self.sqrt_dispersion = (V * np.sqrt(w)) @ V.T
        self.inv_sqrt_dispersion = (V / np.sqrt(w)) @ V.T
        self._norm_const = None if norm_const is None else float(norm_const)
        for arr in (self.location, self.dispersion, self.precision, self.chol):
            arr.setflags(write=False)

    def __repr__(self):
        return f"EllipticalDistribution(dim={self.dim}, generator={self.generator!r})"

    @property
    def family(self):
        return self.generator.name

    @property
    def norm_const(self):
        if self._norm_const is None:
            self._norm_const = float(self.generator.radial_normalizer(self.dim))
        return self._norm_const

    # point-wise quantities -------------------------------------------------
    def _centered(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValidationError(f"expected points of dimension {self.dim}, got shape {x.shape}")
        return x - self.location

    def mahalanobis(self, x):
        """``Q = (x−ν)ᵀΣ⁻¹(x−ν)``; note ``t = Q/2``."""
        z = self._centered(x)
        return np.einsum("...i,ij,...j->...", z, self.precision, z)

    def log_density(self, x):
        t = 0.5 * self.mahalanobis(x)
        return np.log(self.norm_const) - 0.5 * self.logdet + self.generator.log_eval(t)

    def density(self, x):
        return np.exp(self.log_density(x))

    def log_density_unnormalized(self, x):
        return self.generator.log_eval(0.5 * self.mahalanobis(x))

    def score(self, x):
        """``Σ⁻¹(x−ν) φ′(t)/φ(t)``.

        Raises
        ------
        SingularPoint
            At ``x = ν`` when ``φ′/φ`` blows up at 0 (power-exponential, ``ζ < 1``).
        """
        z = self._centered(x)
        t = 0.5 * np.einsum("...i,ij,...j->...", z, self.precision, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            psi = np.asarray(self.generator.log_deriv1(t))
        at_nu = t == 0
        if np.any(at_nu):
            if not np.all(np.isfinite(psi[at_nu])):
                raise SingularPoint("the score is singular at the location for this generator")
            psi = np.where(at_nu, 0.0, psi)
        return (z @ self.precision) * psi[..., None]

    # moments and marginals ----------------------------------------------
    def mean(self):
        return self.location.copy()

    def covariance(self):
        """Covariance matrix for the built-in families (``inf`` entries when infinite)."""
        g = self.generator
        S = np.array(self.dispersion)
        if isinstance(g, GaussianGenerator):
            return S
        if isinstance(g, StudentGenerator):
            return S * g.k / (g.k - 2.0) if g.k > 2 else np.full_like(S, np.inf)
        if isinstance(g, PowerExpGenerator):
            from scipy.special import gammaln

            d, z, b = self.dim, g.zeta, g.b
            # E[R²] for radial law r^{d−1} exp(−b r^{2ζ})
            er2 = np.exp(gammaln((d + 2) / (2 * z)) - gammaln(d / (2 * z))) * b ** (-1.0 / z)
            return S * er2 / d
        raise NotImplementedError("covariance is only known for built-in generators")

    def marginal(self, indices):
        """Marginal law of the coordinates ``indices`` (Gaussian and Student only)."""
        idx = np.atleast_1d(np.asarray(indices, dtype=int))
        nu = self.location[idx]
        S = self.dispersion[np.ix_(idx, idx)]
        g = self.generator
        if isinstance(g, GaussianGenerator):
            return EllipticalDistribution(nu, S, GaussianGenerator())
        if isinstance(g, StudentGenerator):
            return EllipticalDistribution(nu, S, StudentGenerator(g.k, idx.size))
        raise NotImplementedError(f"no closed-form marginal for the {g.name} family")

    # sampling ---------------------------------------------------------------
    def sample(self, n, rng=None):
        """Draw ``n`` i.i.d. points as an ``(n, d)`` array.

        Gaussian: ``ν + LZ``. Student: ``ν + LZ/√(W/k)`` with ``W ~ χ²_k``.
        Power-exponential: ``ν + R·LU`` with ``U`` uniform on the sphere and
        ``b R^{2ζ} ~ Gamma(d/(2ζ))``.
        """
        n = int(n)
        if n < 1:
            raise ValidationError("sample size must be at least 1")
        gen = as_stream(rng)
        g = self.generator
        d = self.dim
        if isinstance(g, GaussianGenerator):
            z = gen.standard_normal((n, d))
        elif isinstance(g, StudentGenerator):
            z = gen.standard_normal((n, d))
            w = gen.chisquare(g.k, size=n)
            z = z / np.sqrt(w / g.k)[:, None]
        elif isinstance(g, PowerExpGenerator):
            u = gen.standard_normal((n, d))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            w = gen.gamma(d / (2.0 * g.zeta), size=n)
            r = (w / g.b) ** (1.0 / (2.0 * g.zeta))
            z = u * r[:, None]
        else:
            raise NotImplementedError(f"no exact sampler for the {g.name} generator")
        return self.location + z @ self.chol.T


def gaussian(location, dispersion):
    """Multivariate normal ``N(ν, Σ)``."""
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    return EllipticalDistribution(nu, dispersion, GaussianGenerator())


def student(k, location, dispersion):
    """Multivariate Student ``t_k(ν, Σ)``."""
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    return EllipticalDistribution(nu, dispersion, StudentGenerator(k, nu.size))


def power_exp(b, zeta, location, dispersion):
    """Power-exponential law with density proportional to ``exp(−b Q^ζ)``."""
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    return EllipticalDistribution(nu, dispersion, PowerExpGenerator(b, zeta))


def score_power_exp(b, zeta, location, dispersion, x):
    """Score ``−2bζ Q^{ζ−1} Σ⁻¹(x−ν)`` of the power-exponential law.

    Raises
    ------
    SingularPoint
        When ``ζ < 1`` and ``x = ν``.
    """
    nu = np.atleast_1d(np.asarray(location, dtype=float))
    S = np.atleast_2d(np.asarray(dispersion, dtype=float))
    check_spd(S)
    z = np.asarray(x, dtype=float) - nu
    P = np.linalg.inv(S)
    y = z @ P
    Q = np.einsum("...i,...i->...", y, z)
    if zeta < 1 and np.any(Q == 0):
        raise SingularPoint("power-exponential score is singular at the location when zeta < 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(Q == 0, 0.0, -2.0 * b * zeta * np.where(Q == 0, 1.0, Q) ** (zeta - 1.0))
    return y * np.asarray(fac)[..., None]
