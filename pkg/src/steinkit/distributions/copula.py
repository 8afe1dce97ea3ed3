"""Ali-Mikhail-Haq copula density, gradient and sampler."""

from __future__ import annotations

import numpy as np

from ..errors import OutOfUnitSquare, ThetaOutOfRange
from ..rng import as_stream

__all__ = ["AmhCopula", "amh_density_and_gradient"]


def _check_theta(theta):
    theta = float(theta)
    if not -1.0 < theta < 1.0:
        raise ThetaOutOfRange(f"AMH parameter must lie in (-1, 1), got {theta}")
    return theta


def _check_square(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any((x1 < 0) | (x1 > 1) | (x2 < 0) | (x2 > 1)) or np.any(~np.isfinite(x1 + x2)):
        raise OutOfUnitSquare("copula arguments must lie in [0, 1]^2")
    return x1, x2


class AmhCopula:
    """AMH copula ``C(u,v) = uv / (1 − θ(1−u)(1−v))``.

    The density is

    ``c = [(1−θ)D + 2θ x₁x₂] / D³`` with ``D = 1 − θ(1−x₁)(1−x₂)``.
    """

    family = "amh"
    dim = 2

    def __init__(self, theta):
        self.theta = _check_theta(theta)

    def cdf(self, x1, x2):
        x1, x2 = _check_square(x1, x2)
        return x1 * x2 / (1.0 - self.theta * (1.0 - x1) * (1.0 - x2))

    def density(self, x1, x2):
        x1, x2 = _check_square(x1, x2)
        th = self.theta
        D = 1.0 - th * (1.0 - x1) * (1.0 - x2)
        return ((1.0 - th) * D + 2.0 * th * x1 * x2) / D**3

    def gradient(self, x1, x2):
        """Analytic ``∇c`` stacked along the last axis."""
        x1, x2 = _check_square(x1, x2)
        th = self.theta
        D = 1.0 - th * (1.0 - x1) * (1.0 - x2)
        N = (1.0 - th) * D + 2.0 * th * x1 * x2
        D1 = th * (1.0 - x2)
        D2 = th * (1.0 - x1)
        N1 = (1.0 - th) * D1 + 2.0 * th * x2
        N2 = (1.0 - th) * D2 + 2.0 * th * x1
        g1 = N1 / D**3 - 3.0 * N * D1 / D**4
        g2 = N2 / D**3 - 3.0 * N * D2 / D**4
        return np.stack([g1, g2], axis=-1)

    def conditional_cdf(self, x1, x2):
        """``∂C/∂x₁ = x₂(1 − θ(1−x₂)) / D²``, the law of ``V₂`` given ``V₁ = x₁``."""
        x1, x2 = _check_square(x1, x2)
        th = self.theta
        D = 1.0 - th * (1.0 - x1) * (1.0 - x2)
        return x2 * (1.0 - th * (1.0 - x2)) / D**2

    def conditional_inverse(self, x1, w):
        """Solve ``∂C/∂x₁(x₁, v) = w`` for ``v``.

        The equation is the quadratic ``A v² + B v + C = 0`` with ``a = 1−x₁``,
        ``A = θ − wθ²a²``, ``B = (1−θ) − 2w(1−θa)θa`` and ``C = −w(1−θa)²``;
        the root is taken in the cancellation-free form ``−2C/(B + √(B²−4AC))``.
        """
        th = self.theta
        a = 1.0 - np.asarray(x1, dtype=float)
        w = np.asarray(w, dtype=float)
        A = th - w * th**2 * a**2
        B = (1.0 - th) - 2.0 * w * (1.0 - th * a) * th * a
        C = -w * (1.0 - th * a) ** 2
        disc = np.sqrt(np.maximum(B * B - 4.0 * A * C, 0.0))
        den = B + disc
        safe = den > 0
        v = np.where(safe, -2.0 * C / np.where(safe, den, 1.0), 0.0)
        return np.clip(v, 0.0, 1.0)

    def sample(self, n, rng=None):
        """Conditional-inverse sampler; returns an ``(n, 2)`` array."""
        gen = as_stream(rng)
        u = gen.uniform(size=int(n))
        w = gen.uniform(size=int(n))
        return np.column_stack([u, self.conditional_inverse(u, w)])


def amh_density_and_gradient(theta, x1, x2):
    """Density and gradient of the AMH copula at ``(x₁, x₂)``."""
    cop = AmhCopula(theta)
    return cop.density(x1, x2), cop.gradient(x1, x2)
