"""Closed-form Stein kernels, the τ_{a,b} ODE family and kernel certification."""

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from steinkit.distributions import PowerExpGenerator, StudentGenerator, gaussian, power_exp, student
from steinkit.errors import (
    BetaEqualsTwo,
    DegreesTooSmall,
    DimensionOne,
    DivergentTail,
    OdeResidualTooLarge,
    ValidationError,
    ZetaEqualsOne,
)
from steinkit.harness import mean_equals_variance
from steinkit.stein import (
    SteinKernelField,
    affine_transport_kernel,
    ball_probes,
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
    verify_kernel,
)

from conftest import SIGMA2, SIGMA3, halton_points

NU2 = np.array([0.2, -0.3])
NU3 = np.array([0.1, 0.0, -0.4])


class TestGaussianKernels:
    def test_tau1_is_sigma(self):
        tau = elliptical_tau1(gaussian(NU2, SIGMA2))
        X = halton_points(7, 2)
        np.testing.assert_allclose(tau.eval(X), np.broadcast_to(SIGMA2, (7, 2, 2)), rtol=1e-14)

    def test_beta_infinity(self):
        x = np.array([0.7, -1.1, 0.4])
        P = np.linalg.inv(SIGMA3)
        expected = (x @ P @ x * SIGMA3 - np.outer(x, x)) / 2
        np.testing.assert_allclose(gaussian_tau2beta(SIGMA3, np.inf).eval(x), expected, rtol=1e-13)

    def test_beta_two_d_minus_one(self):
        x = np.array([0.7, -1.1, 0.4])
        P = np.linalg.inv(SIGMA3)
        expected = x @ P @ x * SIGMA3 - np.outer(x, x) - SIGMA3
        np.testing.assert_allclose(gaussian_tau2beta(SIGMA3, 4.0).eval(x), expected, rtol=1e-12, atol=1e-14)

    def test_beta_zero_is_sigma(self):
        x = np.array([0.3, 2.0])
        np.testing.assert_allclose(gaussian_tau2beta(SIGMA2, 0.0).eval(x), SIGMA2)
        np.testing.assert_allclose(gaussian_tau2beta(SIGMA2, 1e-9).eval(x), SIGMA2, atol=1e-8)

    def test_large_beta_approaches_limit(self):
        x = np.array([0.3, 2.0])
        np.testing.assert_allclose(gaussian_tau2beta(SIGMA2, 1e9).eval(x), gaussian_tau2beta(SIGMA2, np.inf).eval(x),
                                   rtol=1e-8)

    def test_parameter_errors(self):
        with pytest.raises(BetaEqualsTwo):
            gaussian_tau2beta(SIGMA2, 2.0)
        with pytest.raises(DimensionOne):
            gaussian_tau2beta([[1.0]], 4.0)

    def test_general_route_matches(self):
        g = gaussian(NU2, SIGMA2)
        X = NU2 + halton_points(20, 2)
        for beta in (0.0, 4.0, 7.5, np.inf):
            np.testing.assert_allclose(elliptical_tau2beta(g, beta).eval(X),
                                       gaussian_tau2beta(SIGMA2, beta, NU2).eval(X), rtol=1e-12, atol=1e-12)


class TestStudentKernels:
    def test_tau1_closed_form(self):
        k, x = 5.0, np.array([1.0, -0.5])
        Q = (x - NU2) @ np.linalg.solve(SIGMA2, x - NU2)
        np.testing.assert_allclose(student_tau1(k, NU2, SIGMA2).eval(x), (Q + k) / (k) * SIGMA2, rtol=1e-13)

    def test_tau1_general_route(self):
        t = student(5, NU2, SIGMA2)
        X = NU2 + halton_points(10, 2)
        np.testing.assert_allclose(elliptical_tau1(t).eval(X), student_tau1(5, NU2, SIGMA2).eval(X), rtol=1e-13)

    def test_tau2_univariate(self):
        k, s2, nu, x = 6.0, 2.0, 0.4, 1.7
        np.testing.assert_allclose(student_tau2(k, [nu], [[s2]]).eval(np.array([x])),
                                   [[((x - nu) ** 2 + k * s2) / (k - 1)]], rtol=1e-14)

    def test_one_dim_reduction_by_quadrature(self):
        # frozen: mpmath quadrature of (1/p)∫_x^∞ (y-ν) p(y) dy for t_5(0.3, 1.5) at x = 1.3
        np.testing.assert_allclose(student_tau1(5, [0.3], [[1.5]]).eval(np.array([1.3])), [[2.125]], rtol=1e-14)

    def test_small_k(self):
        with pytest.raises(DegreesTooSmall):
            student_tau1(1.0, NU2, SIGMA2)
        with pytest.raises(DegreesTooSmall):
            student_tau2(0.5, NU2, SIGMA2)
        with pytest.warns(RuntimeWarning):
            student_tau2(1.5, NU2, SIGMA2)

    def test_divergent_generator_tail(self):
        with pytest.raises(DivergentTail):
            elliptical_tau1(student(0.5, [0.0], [[1.0]]))


class TestEllipticalTau1:
    @pytest.mark.parametrize("zeta", [0.75, 2.0])
    def test_one_dim_reduction(self, zeta):
        law = power_exp(1.0, zeta, [0.3], [[1.4]])
        tau = elliptical_tau1(law)
        for x in np.linspace(-2.0, 2.5, 10):
            p = lambda y: law.density(np.array([[y]]))[0]
            ref = integrate.quad(lambda y: (y - 0.3) * p(y), x, np.inf, epsabs=1e-13)[0] / p(x)
            np.testing.assert_allclose(tau.eval(np.array([x]))[0, 0], ref, rtol=1e-8)


class TestTauAB:
    def test_b_zero_recovers_tau1(self):
        law = power_exp(1.0, 0.75, NU2, SIGMA2)
        g = law.generator
        tau = elliptical_tau_ab(law, lambda t: float(g.tail_ratio(t)), lambda t: 0.0)
        X = NU2 + halton_points(10, 2)
        np.testing.assert_allclose(tau.eval(X), elliptical_tau1(law).eval(X), rtol=1e-12)

    def test_corollary_b_frozen(self):
        b, _ = corollary_b(StudentGenerator(5, 2), 2)
        # mpmath: t^{-3/2} ∫_t^∞ u^{1/2} φ(u) du / (2φ(t)) at t = 0.7
        np.testing.assert_allclose(b(0.7), 1.66073694475856999310, rtol=1e-10)

    @pytest.mark.parametrize("gen, d", [(StudentGenerator(5, 2), 2), (PowerExpGenerator(1.0, 0.75), 3)])
    def test_corollary_b_derivative_and_ode(self, gen, d):
        b, db = corollary_b(gen, d)
        for t in (0.1, 0.8, 3.0):
            h = 1e-5 * t
            np.testing.assert_allclose(db(t), (b(t + h) - b(t - h)) / (2 * h), rtol=1e-6)
            assert abs(tau_ab_ode_residual(gen, d, lambda s: 0.0, b, t, lambda s: 0.0, db)) < 1e-8

    def test_a0_kernel_certifies(self):
        law = student(5, NU2, SIGMA2)
        tau = stein_kernel(law, "elliptical_tau_ab")
        assert verify_kernel(law, tau, n_probes=20).passed

    def test_ode_rejection(self):
        with pytest.raises(OdeResidualTooLarge):
            elliptical_tau_ab(gaussian(NU2, SIGMA2), lambda t: 2.0, lambda t: 0.0)


class TestPowerExpTau2:
    @pytest.mark.parametrize("zeta", [0.75, 2.0])
    @pytest.mark.parametrize("beta", [0.0, 4.0, np.inf])
    def test_matches_ode_route(self, zeta, beta):
        law = power_exp(1.0, zeta, NU2, SIGMA2)
        g = law.generator

        def a(t):
            return float(tau2beta_coefficients(g, 2, beta, np.array([t]))[0][0])

        def b(t):
            return float(tau2beta_coefficients(g, 2, beta, np.array([t]))[1][0])

        route = elliptical_tau_ab(law, a, b)
        tau = powerexp_tau2(1.0, zeta, beta, NU2, SIGMA2)
        X = ball_probes(20, NU2, np.linalg.cholesky(SIGMA2), exclude=(NU2,))
        np.testing.assert_allclose(tau.eval(X), route.eval(X), rtol=1e-8, atol=1e-10)

    def test_zeta_one_limit(self):
        x = np.array([0.9, -0.6])
        ref = gaussian_tau2beta(SIGMA2, 4.0).eval(x)
        errs = [np.max(np.abs(powerexp_tau2(0.5, z, 4.0, [0, 0], SIGMA2).eval(x) - ref)) for z in (1 + 1e-2, 1 + 1e-3)]
        assert errs[1] < errs[0]
        assert errs[1] < 1e-2
        np.testing.assert_allclose(powerexp_tau2(0.5, 1 - 1e-3, 4.0, [0, 0], SIGMA2).eval(x), ref, atol=1e-2)

    def test_errors(self):
        with pytest.raises(ZetaEqualsOne):
            powerexp_tau2(1.0, 1.0, 4.0, NU2, SIGMA2)
        with pytest.raises(BetaEqualsTwo):
            powerexp_tau2(1.0, 2.0, 2.0, NU2, SIGMA2)

    def test_singular_point_recorded(self):
        tau = powerexp_tau2(1.0, 2.0, 4.0, NU2, SIGMA2)
        np.testing.assert_array_equal(tau.singular_points[0], NU2)


class TestAffineTransport:
    @pytest.mark.parametrize("k", [3.0, 5.0])
    def test_student(self, k):
        X = NU2 + halton_points(20, 2)
        for base, direct in ((student_tau2(k, [0, 0], np.eye(2)), student_tau2(k, NU2, SIGMA2)),
                             (student_tau1(k, [0, 0], np.eye(2)), student_tau1(k, NU2, SIGMA2))):
            np.testing.assert_allclose(affine_transport_kernel(base, NU2, SIGMA2).eval(X), direct.eval(X),
                                       rtol=1e-10, atol=1e-10)

    def test_gaussian(self):
        X = NU3 + halton_points(20, 3)
        base = gaussian_const(gaussian(np.zeros(3), np.eye(3)))
        np.testing.assert_allclose(affine_transport_kernel(base, NU3, SIGMA3).eval(X),
                                   np.broadcast_to(SIGMA3, (20, 3, 3)), atol=1e-10)
        base = gaussian_tau2beta(np.eye(3), 4.0)
        np.testing.assert_allclose(affine_transport_kernel(base, NU3, SIGMA3).eval(X),
                                   gaussian_tau2beta(SIGMA3, 4.0, NU3).eval(X), atol=1e-10)

    def test_shift_only(self):
        base = student_tau2(5, [0, 0], np.eye(2))
        X = halton_points(5, 2)
        np.testing.assert_allclose(affine_transport_kernel(base, NU2, np.eye(2)).eval(X), base.eval(X - NU2),
                                   atol=1e-14)


class TestDiagonalKernel:
    def test_gaussian_one_dim(self):
        tau = diagonal_stein_kernel_1d_integrals(gaussian([0.0], [[1.0]]))
        np.testing.assert_allclose(tau.eval(np.linspace(-2, 2, 5)[:, None])[:, 0, 0], 1.0, rtol=1e-8)

    def test_gaussian_independent(self):
        tau = diagonal_stein_kernel_1d_integrals(gaussian([0, 0], np.eye(2)))
        np.testing.assert_allclose(tau.eval(np.array([0.4, -1.3])), np.eye(2), atol=1e-8)

    def test_divergence_identity(self):
        law = gaussian(NU2, SIGMA2)
        rep = verify_kernel(law, diagonal_stein_kernel_1d_integrals(law), n_probes=8)
        assert rep.passed, rep.max_residual


class TestVerifyKernel:
    def test_gaussian_constant(self):
        law = gaussian(NU2, SIGMA2)
        assert verify_kernel(law, gaussian_const(law)).max_residual <= 1e-7

    def test_student_tau2(self):
        law = student(5, [0, 0], np.eye(2))
        rep = verify_kernel(law, student_tau2(5, [0, 0], np.eye(2)))
        assert rep.max_residual <= 1e-6
        assert max(np.linalg.norm(e["probe"]) for e in rep.entries) <= 3.0 * np.sqrt(5 / 3) + 1e-12

    def test_corrupted_kernel_detected(self):
        law = student(5, NU2, SIGMA2)
        tau = student_tau2(5, NU2, SIGMA2)
        bad = SteinKernelField(2, "custom", lambda X: 1.01 * tau.batch_eval(X), NU2)
        assert verify_kernel(law, bad).max_residual > 1e-3

    def test_report_schema(self):
        law = gaussian(NU2, SIGMA2)
        d = verify_kernel(law, gaussian_const(law), n_probes=3).to_dict()
        assert set(d["summary"]) == {"max_residual", "tol", "pass"}
        assert {"probe", "row", "residual"} <= set(d["entries"][0])
        assert len(d["entries"]) == 6

    @pytest.mark.parametrize(
        "law, tau",
        [
            (gaussian(NU3, SIGMA3), gaussian_tau2beta(SIGMA3, 4.0, NU3)),
            (student(5, NU3, SIGMA3), student_tau2(5, NU3, SIGMA3)),
            (student(5, [0.3], [[1.5]]), student_tau1(5, [0.3], [[1.5]])),
            (power_exp(1.0, 0.75, NU2, SIGMA2), powerexp_tau2(1.0, 0.75, 4.0, NU2, SIGMA2)),
            (power_exp(1.0, 2.0, NU2, SIGMA2), powerexp_tau2(1.0, 2.0, np.inf, NU2, SIGMA2)),
            (power_exp(0.7, 1.5, NU3, SIGMA3), elliptical_tau2beta(power_exp(0.7, 1.5, NU3, SIGMA3), 3.0)),
        ],
        ids=["gauss-tau2beta-d3", "student-tau2-d3", "student-tau1-d1", "pe-0.75", "pe-2-inf", "pe-1.5-general"],
    )
    def test_builtin_kernels(self, law, tau):
        rep = verify_kernel(law, tau)
        assert rep.passed, rep.max_residual


class TestMeanProperty:
    def test_extended_cases(self):
        for r in mean_equals_variance(extended=True):
            assert r.passed, r.line()


class TestFactory:
    def test_tags(self):
        law = student(5, NU2, SIGMA2)
        for tag in ("elliptical_tau1", "student_tau1", "student_tau2", "elliptical_tau_ab"):
            assert stein_kernel(law, tag).construction in (tag,)
        assert stein_kernel(law, "elliptical_tau2beta", beta=4.0).params["beta"] == 4.0

    def test_mismatch(self):
        with pytest.raises(ValidationError):
            stein_kernel(gaussian(NU2, SIGMA2), "student_tau2")
        with pytest.raises(ValidationError):
            stein_kernel(gaussian(NU2, SIGMA2), "no_such_kernel")


class TestSymmetry:
    @given(st.lists(st.floats(-4, 4), min_size=2, max_size=2), st.sampled_from([0.0, 4.0, 9.0, np.inf]))
    def test_tau2beta_symmetric(self, x, beta):
        T = gaussian_tau2beta(SIGMA2, beta, NU2).eval(np.array(x))
        np.testing.assert_allclose(T, T.T, atol=1e-12)

    @given(st.lists(st.floats(-4, 4), min_size=3, max_size=3), st.floats(1.5, 30))
    def test_student_kernels_symmetric(self, x, k):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for tau in (student_tau1(k, NU3, SIGMA3), student_tau2(k, NU3, SIGMA3)):
                T = tau.eval(np.array(x))
                np.testing.assert_allclose(T, T.T, atol=1e-12)

    @given(st.lists(st.floats(0.1, 3), min_size=2, max_size=2), st.sampled_from([0.75, 2.0]))
    def test_powerexp_symmetric(self, x, zeta):
        T = powerexp_tau2(1.0, zeta, 4.0, [0, 0], SIGMA2).eval(np.array(x))
        np.testing.assert_allclose(T, T.T, atol=1e-12)

    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=2))
    def test_affine_consistency_property(self, x):
        x = np.array(x)
        base = student_tau2(4.0, [0, 0], np.eye(2))
        np.testing.assert_allclose(affine_transport_kernel(base, NU2, SIGMA2).eval(x),
                                   student_tau2(4.0, NU2, SIGMA2).eval(x), rtol=1e-10, atol=1e-10)
