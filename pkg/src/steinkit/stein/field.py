"""Matrix-valued Stein kernel fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

__all__ = ["SteinKernelField", "CONSTRUCTIONS"]

CONSTRUCTIONS = (
    "gaussian_const",
    "elliptical_tau1",
    "elliptical_tau_ab",
    "gaussian_tau2beta",
    "elliptical_tau2beta",
    "powerexp_tau2",
    "student_tau1",
    "student_tau2",
    "diagonal_1d",
    "bivariate_marginal",
    "trivariate_marginal",
    "affine_transport",
    "custom",
)


@dataclass(frozen=True)
class SteinKernelField:
    """A tagged field ``x ↦ τ(x)``.

    Parameters
    ----------
    dim : int
        Ambient dimension ``d``.
    construction : str
        Tag naming the recipe that produced the field.
    batch_eval : callable
        Maps an ``(n, d)`` array to an ``(n, len(rows), d)`` array.
    target_mean : ndarray
        The vector ``ν`` of the divergence identity ``div(τ_i p)/p = ν_i − x_i``.
    rows : tuple of int
        Which rows of the kernel the field provides (all by default).
    params : dict
        Construction parameters, for reports.
    quadrature : bool
        True when values come from numerical integration; this selects the
        looser certification tolerance.
    singular_points : tuple of ndarray
        Points where the field is not defined (probes avoid them).
    """

    dim: int
    construction: str
    batch_eval: object
    target_mean: np.ndarray
    rows: tuple = None
    params: dict = field(default_factory=dict)
    quadrature: bool = False
    singular_points: tuple = ()

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ValidationError(f"unknown construction tag {self.construction!r}")
        if self.rows is None:
            object.__setattr__(self, "rows", tuple(range(self.dim)))
        object.__setattr__(self, "target_mean", np.asarray(self.target_mean, dtype=float))

    @property
    def full(self):
        return tuple(self.rows) == tuple(range(self.dim))

    def eval(self, x):
        """Evaluate at one point ``(d,)`` or a batch ``(n, d)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValidationError(f"expected points of dimension {self.dim}")
        if x.ndim == 1:
            return np.asarray(self.batch_eval(x[None, :]))[0]
        return np.asarray(self.batch_eval(x))

    __call__ = eval

    def describe(self):
        return {"construction": self.construction, "dim": self.dim, "rows": list(self.rows),
                "params": {k: (v if np.isscalar(v) else np.asarray(v).tolist()) for k, v in self.params.items()}}
