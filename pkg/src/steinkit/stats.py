"""Small Monte Carlo helpers shared across modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MCEstimate", "jackknife_mean", "quantile7"]


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate with its standard error."""

    estimate: np.ndarray
    standard_error: np.ndarray
    n: int

    def within(self, target=0.0, k=4.0):
        """True when ``|estimate − target| ≤ k·SE`` in every component."""
        return bool(np.all(np.abs(np.asarray(self.estimate) - target) <= k * np.asarray(self.standard_error)))

    def to_dict(self):
        return {"estimate": np.asarray(self.estimate).tolist(),
                "standard_error": np.asarray(self.standard_error).tolist(), "n": self.n}


def jackknife_mean(values):
    """Mean over the first axis with its leave-one-out jackknife standard error.

    For a plain mean the jackknife reproduces ``s/√n`` exactly; it is kept in
    this form so that the same routine serves ratio-type statistics.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n < 2:
        raise ValueError("jackknife needs at least two values")
    total = v.sum(axis=0)
    loo = (total - v) / (n - 1)
    centre = loo.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum((loo - centre) ** 2, axis=0))
    return MCEstimate(total / n, se, n)


def quantile7(values, q):
    """Empirical quantiles with linear (type 7) interpolation."""
    return np.quantile(np.asarray(values, dtype=float), q, method="linear")
