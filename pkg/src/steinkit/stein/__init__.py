"""Stein operators, Stein kernels, the Mehler solver and verification oracles."""

from .constructed import (
    MarginalToolkit,
    bivariate_marginal_kernel,
    bivariate_marginal_kernel_field,
    trivariate_marginal_kernel,
    trivariate_marginal_kernel_field,
)
from .field import CONSTRUCTIONS, SteinKernelField
from .kernels import (
    affine_transport_kernel,
    corollary_b,
    diagonal_stein_kernel_1d_integrals,
    elliptical_tau1,
    elliptical_tau2beta,
    elliptical_tau_ab,
    gaussian_const,
    gaussian_tau2beta,
    powerexp_tau2,
    stein_kernel,
    student_tau1,
    student_tau2,
    tau2beta_coefficients,
    tau_ab_ode_residual,
)
from .mehler import MEHLER_SIGN, MehlerSolver, mehler_residual, mehler_solve
from .operators import (
    SecondOrderOperator,
    VectorStandardization,
    canonical_derivative,
    kernel_stein_apply,
    score_stein_apply,
    second_order_apply,
)
from .verify import KernelReport, ball_probes, verify_kernel, verify_stein_identity_mc

__all__ = [
    "MarginalToolkit",
    "bivariate_marginal_kernel",
    "bivariate_marginal_kernel_field",
    "trivariate_marginal_kernel",
    "trivariate_marginal_kernel_field",
    "CONSTRUCTIONS",
    "SteinKernelField",
    "affine_transport_kernel",
    "corollary_b",
    "diagonal_stein_kernel_1d_integrals",
    "elliptical_tau1",
    "elliptical_tau2beta",
    "elliptical_tau_ab",
    "gaussian_const",
    "gaussian_tau2beta",
    "powerexp_tau2",
    "stein_kernel",
    "student_tau1",
    "student_tau2",
    "tau2beta_coefficients",
    "tau_ab_ode_residual",
    "MEHLER_SIGN",
    "MehlerSolver",
    "mehler_residual",
    "mehler_solve",
    "SecondOrderOperator",
    "VectorStandardization",
    "canonical_derivative",
    "kernel_stein_apply",
    "score_stein_apply",
    "second_order_apply",
    "KernelReport",
    "ball_probes",
    "verify_kernel",
    "verify_stein_identity_mc",
]
