"""Skew-normal law with density ``2 ω_d(x; I) Φ(αᵀx)``."""

from __future__ import annotations

import numpy as np
from scipy import special

from ..errors import ValidationError
from ..rng import as_stream

__all__ = ["SkewNormal"]


class SkewNormal:
    """Skew-normal distribution with location 0 and dispersion ``I_d``.

    Parameters
    ----------
    alpha : array_like, shape (d,)
        Skewness vector.
    """

    family = "skew_normal"

    def __init__(self, alpha):
        a = np.atleast_1d(np.asarray(alpha, dtype=float))
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ValidationError("alpha must be a finite vector")
        self.alpha = a
        self.alpha.setflags(write=False)
        self.dim = a.size
        self.location = np.zeros(self.dim)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValidationError(f"expected points of dimension {self.dim}")
        return x

    def log_density(self, x):
        x = self._check(x)
        q = np.einsum("...i,...i->...", x, x)
        return np.log(2.0) - 0.5 * self.dim * np.log(2 * np.pi) - 0.5 * q + special.log_ndtr(x @ self.alpha)

    def density(self, x):
        return np.exp(self.log_density(x))

    def score(self, x):
        """``−x + α φ(αᵀx)/Φ(αᵀx)`` with the Mills ratio evaluated in log space."""
        x = self._check(x)
        s = x @ self.alpha
        mills = np.exp(-0.5 * s * s - 0.5 * np.log(2 * np.pi) - special.log_ndtr(s))
        return -x + np.asarray(mills)[..., None] * self.alpha

    def mean(self):
        """``√(2/π) α/√(1+‖α‖²)``."""
        return np.sqrt(2.0 / np.pi) * self.alpha / np.sqrt(1.0 + self.alpha @ self.alpha)

    def sample(self, n, rng=None):
        """Sign-flip representation: keep ``Z`` if ``U < Φ(αᵀZ)``, else ``−Z``."""
        gen = as_stream(rng)
        z = gen.standard_normal((int(n), self.dim))
        u = gen.uniform(size=int(n))
        keep = u < special.ndtr(z @ self.alpha)
        return np.where(keep[:, None], z, -z)
