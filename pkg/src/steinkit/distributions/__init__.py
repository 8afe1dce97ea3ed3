"""Elliptical, skew-normal and copula distributions."""

from .copula import AmhCopula, amh_density_and_gradient
from .elliptical import (
    EllipticalDistribution,
    check_spd,
    gaussian,
    power_exp,
    score_power_exp,
    student,
)
from .generators import (
    CallableGenerator,
    DensityGenerator,
    GaussianGenerator,
    PowerExpGenerator,
    StudentGenerator,
)
from .skew_normal import SkewNormal
from .specs import FAMILIES, SpecError, load_spec, parse_spec

__all__ = [
    "AmhCopula",
    "amh_density_and_gradient",
    "EllipticalDistribution",
    "check_spd",
    "gaussian",
    "power_exp",
    "score_power_exp",
    "student",
    "CallableGenerator",
    "DensityGenerator",
    "GaussianGenerator",
    "PowerExpGenerator",
    "StudentGenerator",
    "SkewNormal",
    "FAMILIES",
    "SpecError",
    "load_spec",
    "parse_spec",
]
