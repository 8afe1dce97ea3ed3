"""JSON distribution specifications.

A spec looks like::

    {"family": "student", "dim": 2, "location": [0, 0],
     "dispersion": [[1, 0], [0, 1]], "params": {"k": 5}}

Validation failures raise :class:`SpecError`, which carries a JSON-path
pointer (for instance ``$.dispersion[1][0]``) to the offending value.
"""

from __future__ import annotations

import json
import numbers

import numpy as np

from ..errors import ValidationError
from .copula import AmhCopula
from .elliptical import gaussian, power_exp, student
from .skew_normal import SkewNormal

__all__ = ["SpecError", "parse_spec", "load_spec", "FAMILIES"]

FAMILIES = ("gaussian", "student", "power_exp", "skew_normal", "amh")

_REQUIRED_PARAMS = {
    "gaussian": (),
    "student": ("k",),
    "power_exp": ("b", "zeta"),
    "skew_normal": ("alpha",),
    "amh": ("theta",),
}


class SpecError(ValidationError):
    """Invalid distribution spec; ``pointer`` locates the problem."""

    def __init__(self, message, pointer="$"):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


def _real(value, pointer):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise SpecError("expected a finite number", pointer)
    return float(value)


def _vector(value, dim, pointer):
    if not isinstance(value, (list, tuple)):
        raise SpecError("expected an array", pointer)
    if dim is not None and len(value) != dim:
        raise SpecError(f"expected {dim} entries, got {len(value)}", pointer)
    return np.array([_real(v, f"{pointer}[{i}]") for i, v in enumerate(value)])


def _matrix(value, dim, pointer, sym_tol=1e-12):
    if not isinstance(value, (list, tuple)) or len(value) != dim:
        raise SpecError(f"expected {dim} rows", pointer)
    rows = [_vector(r, dim, f"{pointer}[{i}]") for i, r in enumerate(value)]
    S = np.vstack(rows)
    for i in range(dim):
        for j in range(i + 1, dim):
            if abs(S[i, j] - S[j, i]) > sym_tol:
                raise SpecError(
                    f"matrix is not symmetric ({float(S[i, j])!r} vs {float(S[j, i])!r})", f"{pointer}[{j}][{i}]"
                )
    return S


def parse_spec(spec):
    """Build a distribution object from a spec mapping (or JSON string)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    family = spec.get("family")
    if family not in FAMILIES:
        raise SpecError(f"family must be one of {FAMILIES}", "$.family")
    params = spec.get("params", {}) or {}
    if not isinstance(params, dict):
        raise SpecError("params must be an object", "$.params")
    for key in _REQUIRED_PARAMS[family]:
        if key not in params:
            raise SpecError(f"missing parameter '{key}'", f"$.params.{key}")

    if family == "amh":
        theta = _real(params["theta"], "$.params.theta")
        if not -1 < theta < 1:
            raise SpecError("theta must lie in (-1, 1)", "$.params.theta")
        return AmhCopula(theta)

    dim = spec.get("dim")
    if family == "skew_normal":
        alpha = _vector(params["alpha"], dim, "$.params.alpha")
        return SkewNormal(alpha)

    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SpecError("dim must be a positive integer", "$.dim")
    loc = _vector(spec.get("location", [0.0] * dim), dim, "$.location")
    if "dispersion" in spec:
        S = _matrix(spec["dispersion"], dim, "$.dispersion")
    else:
        S = np.eye(dim)
    if family == "gaussian":
        return gaussian(loc, S)
    if family == "student":
        k = _real(params["k"], "$.params.k")
        if k <= 0:
            raise SpecError("k must be positive", "$.params.k")
        return student(k, loc, S)
    b = _real(params["b"], "$.params.b")
    zeta = _real(params["zeta"], "$.params.zeta")
    if b <= 0:
        raise SpecError("b must be positive", "$.params.b")
    if zeta <= 0:
        raise SpecError("zeta must be positive", "$.params.zeta")
    return power_exp(b, zeta, loc, S)


def load_spec(path):
    """Read and parse a spec file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    return parse_spec(data)
