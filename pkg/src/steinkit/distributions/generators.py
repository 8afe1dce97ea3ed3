"""Density generators of elliptical families.

A generator ``φ`` defines the elliptical density
``κ|Σ|^{-1/2} φ(t)`` with ``t = ½(x−ν)ᵀΣ⁻¹(x−ν)``. Besides ``φ`` and its first
two derivatives, each generator exposes the log-derivative ``ψ = φ′/φ`` and
the tail integral ``∫_t^∞ φ(u) du`` used by the first Stein kernel.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from ..errors import DegreesTooSmall, DivergentTail, OutsideSupport, ValidationError
from ..quadrature import adaptive

__all__ = [
    "DensityGenerator",
    "GaussianGenerator",
    "StudentGenerator",
    "PowerExpGenerator",
    "CallableGenerator",
]


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise OutsideSupport("generator argument t must be finite and non-negative")
    return t


class DensityGenerator:
    """Base class; subclasses override the analytic pieces they know.

    Attributes
    ----------
    name : str
        Family identifier.
    params : dict
        Real parameters of the generator.
    """

    name = "generic"

    def __init__(self, **params):
        self.params = dict(params)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    # scalar pieces -------------------------------------------------------
    def eval(self, t):
        return np.exp(self.log_eval(t))

    def log_eval(self, t):
        return np.log(self.eval(t))

    def deriv1(self, t):
        return self.eval(t) * self.log_deriv1(t)

    def deriv2(self, t):
        raise NotImplementedError

    def log_deriv1(self, t):
        """``ψ(t) = φ′(t)/φ(t)``."""
        return self.deriv1(t) / self.eval(t)

    def log_deriv1_prime(self, t):
        """``ψ′(t)``, so that ``φ″/φ = ψ′ + ψ²``."""
        return self.deriv2(t) / self.eval(t) - self.log_deriv1(t) ** 2

    # integrals -----------------------------------------------------------
    def tail_integral(self, t):
        """``∫_t^∞ φ(u) du`` by adaptive quadrature."""
        t = float(_check_t(t))
        val, _ = adaptive(lambda u: float(self.eval(u)), t, np.inf)
        return val

    def tail_ratio(self, t):
        """``(1/φ(t))∫_t^∞ φ(u) du``, the scalar factor of the first Stein kernel."""
        t = _check_t(t)
        if t.ndim == 0:
            return self.tail_integral(float(t)) / float(self.eval(float(t)))
        return np.array([self.tail_ratio(float(s)) for s in t.ravel()]).reshape(t.shape)

    def weighted_tail_integral(self, t, power):
        """``∫_t^∞ u^power φ(u) du`` by adaptive quadrature."""
        t = float(_check_t(t))
        val, _ = adaptive(lambda u: u**power * float(self.eval(u)), t, np.inf)
        return val

    def radial_normalizer(self, d):
        """``κ`` such that ``κ φ(½‖z‖²)`` integrates to one on ``R^d``.

        Uses the radial integral ``S_{d−1}∫_0^∞ r^{d−1} φ(r²/2) dr`` with
        ``S_{d−1} = 2π^{d/2}/Γ(d/2)``.
        """
        integral, _ = adaptive(lambda r: r ** (d - 1) * float(self.eval(0.5 * r * r)), 0.0, np.inf)
        surface = 2.0 * np.pi ** (d / 2.0) / special.gamma(d / 2.0)
        return 1.0 / (surface * integral)


class GaussianGenerator(DensityGenerator):
    """``φ(t) = e^{−t}``."""

    name = "gaussian"

    def eval(self, t):
        return np.exp(-_check_t(t))

    def log_eval(self, t):
        return -_check_t(t)

    def deriv1(self, t):
        return -np.exp(-_check_t(t))

    def deriv2(self, t):
        return np.exp(-_check_t(t))

    def log_deriv1(self, t):
        return -np.ones_like(_check_t(t))

    def log_deriv1_prime(self, t):
        return np.zeros_like(_check_t(t))

    def tail_integral(self, t):
        return np.exp(-_check_t(t))

    def tail_ratio(self, t):
        return np.ones_like(_check_t(t))

    def radial_normalizer(self, d):
        return (2.0 * np.pi) ** (-d / 2.0)


class StudentGenerator(DensityGenerator):
    """``φ(t) = (1 + 2t/k)^{−(k+d)/2}`` for the ``d``-variate Student law.

    Parameters
    ----------
    k : float
        Degrees of freedom, ``k > 0`` (fractional values are allowed).
    d : int
        Dimension, which enters the exponent.
    """

    name = "student"

    def __init__(self, k, d):
        k = float(k)
        if not k > 0:
            raise DegreesTooSmall(f"degrees of freedom must be positive, got {k}")
        super().__init__(k=k, d=int(d))
        self.k = k
        self.d = int(d)
        self.m = 0.5 * (k + self.d)

    def log_eval(self, t):
        return -self.m * np.log1p(2.0 * _check_t(t) / self.k)

    def eval(self, t):
        return np.exp(self.log_eval(t))

    def log_deriv1(self, t):
        return -(self.k + self.d) / (self.k + 2.0 * _check_t(t))

    def deriv1(self, t):
        return self.eval(t) * self.log_deriv1(t)

    def log_deriv1_prime(self, t):
        return 2.0 * (self.k + self.d) / (self.k + 2.0 * _check_t(t)) ** 2

    def deriv2(self, t):
        t = _check_t(t)
        s = self.k + self.d
        return self.eval(t) * s * (s + 2.0) / (self.k + 2.0 * t) ** 2

    def tail_integral(self, t):
        t = _check_t(t)
        if self.k + self.d <= 2:
            raise DivergentTail(f"tail integral diverges for k+d = {self.k + self.d} <= 2")
        return 0.5 * self.k * (1.0 + 2.0 * t / self.k) ** (1.0 - self.m) / (self.m - 1.0)

    def tail_ratio(self, t):
        t = _check_t(t)
        if self.k + self.d <= 2:
            raise DivergentTail(f"tail integral diverges for k+d = {self.k + self.d} <= 2")
        return (self.k + 2.0 * t) / (self.k + self.d - 2.0)

    def radial_normalizer(self, d):
        if int(d) != self.d:
            raise ValidationError("Student generator was built for another dimension")
        k = self.k
        return np.exp(
            special.gammaln(0.5 * (k + d)) - special.gammaln(0.5 * k) - 0.5 * d * np.log(k * np.pi)
        )


class PowerExpGenerator(DensityGenerator):
    """Power-exponential generator ``φ(t) = exp(−b(2t)^ζ)``.

    With this convention the density is ``exp(−b Q^ζ)`` in the full
    Mahalanobis form ``Q = (x−ν)ᵀΣ⁻¹(x−ν)``, and ``ζ = 1, b = ½`` is Gaussian.
    """

    name = "power_exp"

    def __init__(self, b, zeta):
        b, zeta = float(b), float(zeta)
        if not (b > 0 and zeta > 0):
            raise ValidationError("power-exponential needs b > 0 and zeta > 0")
        super().__init__(b=b, zeta=zeta)
        self.b = b
        self.zeta = zeta

    def log_eval(self, t):
        return -self.b * (2.0 * _check_t(t)) ** self.zeta

    def eval(self, t):
        return np.exp(self.log_eval(t))

    def log_deriv1(self, t):
        t = _check_t(t)
        return -2.0 * self.b * self.zeta * (2.0 * t) ** (self.zeta - 1.0)

    def deriv1(self, t):
        return self.eval(t) * self.log_deriv1(t)

    def log_deriv1_prime(self, t):
        t = _check_t(t)
        z = self.zeta
        return -4.0 * self.b * z * (z - 1.0) * (2.0 * t) ** (z - 2.0)

    def deriv2(self, t):
        return self.eval(t) * (self.log_deriv1_prime(t) + self.log_deriv1(t) ** 2)

    def tail_integral(self, t):
        """Closed form ``Γ(1/ζ, b(2t)^ζ) / (2ζ b^{1/ζ})``."""
        t = _check_t(t)
        s = 1.0 / self.zeta
        x = self.b * (2.0 * t) ** self.zeta
        return special.gammaincc(s, x) * special.gamma(s) / (2.0 * self.zeta * self.b**s)

    def tail_ratio(self, t):
        t = _check_t(t)
        s = 1.0 / self.zeta
        x = self.b * (2.0 * t) ** self.zeta
        return special.gammaincc(s, x) * special.gamma(s) * np.exp(x) / (2.0 * self.zeta * self.b**s)


class CallableGenerator(DensityGenerator):
    """Generator built from user callables.

    Parameters
    ----------
    phi, dphi : callable
        ``φ`` and ``φ′``; scalar in, scalar out.
    d2phi : callable, optional
        ``φ″``. Falls back to a central difference of ``dphi``.
    """

    name = "custom"

    def __init__(self, phi, dphi, d2phi=None, name="custom", **params):
        super().__init__(**params)
        self.name = name
        self._phi, self._dphi, self._d2phi = phi, dphi, d2phi

    def eval(self, t):
        t = _check_t(t)
        return np.vectorize(self._phi, otypes=[float])(t)

    def deriv1(self, t):
        t = _check_t(t)
        return np.vectorize(self._dphi, otypes=[float])(t)

    def deriv2(self, t):
        t = _check_t(t)
        if self._d2phi is not None:
            return np.vectorize(self._d2phi, otypes=[float])(t)
        h = 1e-5 * (1.0 + t)
        lo = np.maximum(t - h, 0.0)
        return (self.deriv1(t + h) - self.deriv1(lo)) / (t + h - lo)
