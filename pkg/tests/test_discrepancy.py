"""RBF kernel, pair functions, sample discrepancies and Fisher distance."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from steinkit.discrepancy import (
    ConstantPair,
    GeneralPair,
    RbfKernel,
    ScorePair,
    fisher_distance_mc,
    independent_kernel_discrepancy,
    ksd,
    median_heuristic,
    u_general,
    u_score,
    u_stein_kernel,
)
from steinkit.distributions import EllipticalDistribution, StudentGenerator, gaussian, student
from steinkit.errors import EmptySample, SizeMismatch, ValidationError
from steinkit.gof import UBuilder, build_pair
from steinkit.rng import RngStream
from steinkit.stein import VectorStandardization, gaussian_const, student_tau2

from conftest import SIGMA2, halton_points

RBF = RbfKernel(1.0)


def ident(Y):
    return np.broadcast_to(np.eye(Y.shape[1]), (Y.shape[0], Y.shape[1], Y.shape[1]))


class TestRbfKernel:
    def test_symmetry(self):
        x, y = np.array([0.3, -1.0]), np.array([1.2, 0.4])
        assert RBF.eval(x, y) == RBF.eval(y, x)

    @pytest.mark.parametrize("bw", [0.7, 1.0, 2.5])
    def test_grad12_nested_differences(self, bw):
        kern = RbfKernel(bw)
        x, y = np.array([0.3, -1.0, 0.2]), np.array([1.2, 0.4, -0.5])
        h = 1e-4
        fd = np.empty((3, 3))
        for a in range(3):
            for c in range(3):
                ea, ec = h * np.eye(3)[a], h * np.eye(3)[c]
                fd[a, c] = (kern.eval(x + ea, y + ec) - kern.eval(x + ea, y - ec) - kern.eval(x - ea, y + ec)
                            + kern.eval(x - ea, y - ec)) / (4 * h * h)
        np.testing.assert_allclose(kern.grad12(x, y), fd, atol=1e-6)

    def test_gradients(self):
        x, y = np.array([0.3, -1.0]), np.array([1.2, 0.4])
        h = 1e-6
        g1 = [(RBF.eval(x + h * e, y) - RBF.eval(x - h * e, y)) / (2 * h) for e in np.eye(2)]
        g2 = [(RBF.eval(x, y + h * e) - RBF.eval(x, y - h * e)) / (2 * h) for e in np.eye(2)]
        np.testing.assert_allclose(RBF.grad1(x, y), g1, rtol=1e-7)
        np.testing.assert_allclose(RBF.grad2(x, y), g2, rtol=1e-7)

    def test_gram_positive_semidefinite(self):
        X = RngStream(0).generator().standard_normal((20, 3))
        assert np.linalg.eigvalsh(RBF.gram(X)).min() >= -1e-10

    def test_bad_bandwidth(self):
        with pytest.raises(ValidationError):
            RbfKernel(0.0)

    def test_median_heuristic(self):
        X = np.array([[0.0], [1.0], [3.0]])
        assert median_heuristic(X) == 2.0


class TestScorePair:
    @pytest.mark.parametrize("ell", [1.0, 5.0, 30.0])
    def test_univariate_student_display(self, ell):
        score = student(ell, [0.0], [[1.0]]).score
        pts = halton_points(10, 2, 3.0)
        for y, yp in pts:
            k = np.exp(-(y - yp) ** 2 / 2)
            dk_y, dk_yp = -(y - yp) * k, (y - yp) * k
            d2k = (1 - (y - yp) ** 2) * k
            display = (d2k - (ell + 1) * yp / (yp**2 + ell) * dk_y - (ell + 1) * y / (y**2 + ell) * dk_yp
                       + (ell + 1) ** 2 * y * yp / ((y**2 + ell) * (yp**2 + ell)) * k)
            np.testing.assert_allclose(u_score(score, RBF, [y], [yp]), display, rtol=1e-12, atol=1e-14)

    def test_constant_kernel_diagonal(self):
        class One(RbfKernel):
            def block(self, Y, Yp, need_grad12=True):
                n, m, d = len(Y), len(Yp), Y.shape[1]
                return np.ones((n, m)), np.zeros((n, m, d)), np.zeros((n, m, d)), np.zeros((n, m, d, d))

        law = student(4, [0, 0], SIGMA2)
        y = np.array([0.4, -0.9])
        u = GeneralPair(A_p=ident, a_p=law.score, kernel=One())(y, y)
        np.testing.assert_allclose(u, law.score(y) @ law.score(y), rtol=1e-14)

    def test_null_mean_mc(self):
        law = gaussian([0.0, 0.0], np.eye(2))
        gen = RngStream(1).generator()
        Y, Yp = law.sample(20000, gen), law.sample(20000, gen)
        pair = ScorePair(law.score)
        vals = np.concatenate([np.diag(pair.matrix(Y[s:s + 1000], Yp[s:s + 1000])) for s in range(0, 20000, 1000)])
        assert abs(vals.mean()) <= 4 * vals.std(ddof=1) / np.sqrt(vals.size)

    def test_normalization_free(self):
        a = gaussian([0.1, 0.2], SIGMA2)
        b = EllipticalDistribution([0.1, 0.2], SIGMA2, a.generator, norm_const=123.0)
        Y = halton_points(6, 2)
        np.testing.assert_array_equal(ScorePair(a.score).matrix(Y, Y[::-1]), ScorePair(b.score).matrix(Y, Y[::-1]))


class TestSteinKernelPair:
    def test_same_kernel_zero(self):
        tau = student_tau2(5, [0, 0], SIGMA2)
        assert u_stein_kernel(tau, tau, RBF, [0.3, 0.1], [-1.0, 0.5]) == 0.0

    def test_gaussian_covariance_quadratic_form(self):
        S1, S2 = SIGMA2, np.array([[1.0, -0.2], [-0.2, 1.5]])
        t1, t2 = gaussian_const(gaussian([0, 0], S1)), gaussian_const(gaussian([0, 0], S2))
        D = S1 - S2
        M = D.T @ D
        for y, yp in zip(halton_points(5, 2), halton_points(5, 2, start=7)):
            r = y - yp
            k = np.exp(-r @ r / 2)
            np.testing.assert_allclose(u_stein_kernel(t1, t2, RBF, y, yp), k * (np.trace(M) - r @ M @ r), rtol=1e-12)

    def test_scalar_factorization(self):
        c = 1.7

        def const(Y):
            return np.full((len(Y), 1, 1), c)

        y, yp = 0.3, -0.8
        d2k = (1 - (y - yp) ** 2) * np.exp(-(y - yp) ** 2 / 2)
        np.testing.assert_allclose(u_stein_kernel(const, None, RBF, [y], [yp]), c * c * d2k, rtol=1e-13)


class TestGeneralPair:
    def test_ladder_score(self):
        law = student(5, [0, 0], SIGMA2)
        for y, yp in zip(halton_points(10, 2), halton_points(10, 2, start=20)):
            np.testing.assert_allclose(u_general(ident, law.score, None, None, RBF, y, yp),
                                       u_score(law.score, RBF, y, yp), rtol=0, atol=1e-12)

    def test_ladder_score_difference(self):
        p, q = student(5, [0, 0], SIGMA2), gaussian([0.2, 0], np.eye(2))
        for y, yp in zip(halton_points(5, 2), halton_points(5, 2, start=20)):
            dy, dyp = p.score(y) - q.score(y), p.score(yp) - q.score(yp)
            expected = dy @ dyp * np.exp(-np.sum((y - yp) ** 2) / 2)
            np.testing.assert_allclose(u_general(ident, p.score, ident, q.score, RBF, y, yp), expected, atol=1e-12)

    def test_ladder_stein_kernel(self):
        tp, tq = student_tau2(5, [0, 0], SIGMA2), student_tau2(9, [0.1, 0], np.eye(2))
        for y, yp in zip(halton_points(10, 2), halton_points(10, 2, start=20)):
            np.testing.assert_allclose(u_general(tp, None, tq, None, RBF, y, yp), u_stein_kernel(tp, tq, RBF, y, yp),
                                       rtol=0, atol=1e-12)

    def test_mixed_one_dim_finite_differences(self):
        p = gaussian([0.0], [[1.0]])
        q = student(4, [0.0], [[1.0]])
        tq = student_tau2(4, [0.0], [[1.0]])

        def A(y):
            return 1.0 - tq.eval(np.array([y]))[0, 0]

        def a(y):
            return p.score(np.array([y]))[0] - q.score(np.array([y]))[0]

        def k(y, yp):
            return np.exp(-(y - yp) ** 2 / 2)

        h = 1e-4

        def op2(y, yp):  # operator difference in the second argument
            return A(yp) * (k(y, yp + h) - k(y, yp - h)) / (2 * h) + a(yp) * k(y, yp)

        def op12(y, yp):
            return A(y) * (op2(y + h, yp) - op2(y - h, yp)) / (2 * h) + a(y) * op2(y, yp)

        u = GeneralPair(A_p=lambda Y: np.ones((len(Y), 1, 1)), a_p=p.score, A_q=tq.eval, a_q=q.score, kernel=RBF)
        for y, yp in [(0.3, -0.5), (1.2, 0.8), (-2.0, 0.1)]:
            np.testing.assert_allclose(u([y], [yp]), op12(y, yp), atol=1e-5)


class TestKsd:
    def test_constant(self):
        Y = halton_points(10, 2)
        est = ksd(Y, Y + 1, ConstantPair(0.75))
        assert est.value == 0.75
        assert est.pair_count == 100
        assert est.standard_error == 0.0

    def test_permutation_invariance(self):
        law = student(5, [0, 0], SIGMA2)
        gen = RngStream(2).generator()
        Y, Yp = law.sample(60, gen), law.sample(70, gen)
        pair = ScorePair(law.score)
        v = ksd(Y, Yp, pair).value
        np.testing.assert_allclose(ksd(gen.permutation(Y), gen.permutation(Yp), pair).value, v, rtol=0, atol=1e-14)

    def test_chunking_does_not_change_value(self):
        law = gaussian([0, 0], SIGMA2)
        gen = RngStream(3).generator()
        Y, Yp = law.sample(50, gen), law.sample(40, gen)
        pair = ScorePair(law.score)
        np.testing.assert_allclose(ksd(Y, Yp, pair, chunk_size=7).value, ksd(Y, Yp, pair).value, rtol=1e-14)

    def test_gaussian_null_calibration(self):
        law = gaussian([0, 0], np.eye(2))
        pair = ScorePair(law.score)
        root = RngStream(4)
        hits = 0
        for r in range(200):
            gen = root.substream(r).generator()
            est = ksd(law.sample(100, gen), law.sample(100, gen), pair)
            hits += abs(est.value) <= 4 * est.standard_error
        assert hits >= 190

    @pytest.mark.parametrize(
        "target, spec",
        [
            (gaussian([0, 0], SIGMA2), UBuilder("score")),
            (student(5, [0, 0], np.eye(2)), UBuilder("stein-kernel")),
            (student(5, [0.0], [[1.0]]), UBuilder("general", matrix_field="stein_kernel", vector_field="location_minus")),
        ],
        ids=["score", "stein-kernel", "general"],
    )
    def test_null_mean_over_replications(self, target, spec):
        pair = build_pair(target, spec)
        root = RngStream(5)
        vals = []
        for r in range(200):
            gen = root.substream(r).generator()
            vals.append(ksd(target.sample(100, gen), target.sample(100, gen), pair).value)
        vals = np.array(vals)
        assert abs(vals.mean()) <= 4 * vals.std(ddof=1) / np.sqrt(vals.size)

    def test_single_sample_u_statistic(self):
        law = gaussian([0.0], [[1.0]])
        Y = law.sample(30, RngStream(6).generator())
        pair = ScorePair(law.score)
        U = pair.matrix(Y, Y)
        est = ksd(Y, None, pair, estimator="u_statistic_single_sample")
        np.testing.assert_allclose(est.value, (U.sum() - np.trace(U)) / (30 * 29), rtol=1e-13)
        assert est.pair_count == 30 * 29

    def test_errors(self):
        pair = ConstantPair(1.0)
        with pytest.raises(EmptySample):
            ksd(np.zeros((1, 2)), np.zeros((3, 2)), pair)
        with pytest.raises(SizeMismatch):
            ksd(np.zeros((3, 2)), np.zeros((3, 1)), pair)
        with pytest.raises(ValidationError):
            ksd(np.zeros((3, 2)), np.zeros((3, 2)), pair, estimator="other")


class TestFisher:
    def test_same_law(self):
        law = student(5, [0, 0], SIGMA2)
        est = fisher_distance_mc(law.score, law.score, law.sample(1000, RngStream(7).generator()))
        assert est.estimate == 0.0

    def test_location_shift(self):
        mu = 0.8
        p, q = gaussian([0.0], [[1.0]]), gaussian([mu], [[1.0]])
        est = fisher_distance_mc(p.score, q.score, q.sample(10**5, RngStream(8).generator()))
        np.testing.assert_allclose(est.estimate, mu**2, rtol=1e-12)
        assert est.standard_error == 0.0

    def test_scale_change_against_quadrature(self):
        s2 = 2.0
        p, q = gaussian([0.0], [[1.0]]), gaussian([0.0], [[s2]])
        ref = integrate.quad(lambda y: (y * (1 / s2 - 1)) ** 2 * np.exp(-y * y / (2 * s2)) / np.sqrt(2 * np.pi * s2),
                             -np.inf, np.inf)[0]
        np.testing.assert_allclose(ref, (1 / s2 - 1) ** 2 * s2, rtol=1e-10)
        est = fisher_distance_mc(p.score, q.score, q.sample(10**5, RngStream(9).generator()))
        assert est.within(ref)


class TestIndependentKernelDiscrepancy:
    @staticmethod
    def coords(d):
        return [(lambda X, i=i: X[:, i], lambda X, i=i: np.eye(d)[i] + 0 * X) for i in range(d)]

    def test_rate_under_target(self):
        law = gaussian([0, 0], SIGMA2)
        op = VectorStandardization("kernel_based", law, gaussian_const(law))
        means = []
        for n in (10**3, 10**4, 10**5):
            vals = [independent_kernel_discrepancy(op, self.coords(2), [1, 1],
                                                   law.sample(n, RngStream(10, r).generator())).estimate
                    for r in range(8)]
            means.append(np.mean(vals))
        assert means[0] / means[1] > 3 and means[1] / means[2] > 3

    def test_covariance_mismatch(self):
        SX = np.array([[1.0, 0.6, 0.1], [0.6, 1.0, -0.2], [0.1, -0.2, 1.0]])
        SY = np.array([[1.0, 0.2, 0.3], [0.2, 1.0, 0.1], [0.3, 0.1, 1.0]])
        op = VectorStandardization("kernel_based", gaussian(np.zeros(3), SX), gaussian_const(gaussian(np.zeros(3), SX)))
        Y = gaussian(np.zeros(3), SY).sample(10**5, RngStream(11).generator())
        est = independent_kernel_discrepancy(op, self.coords(3), [1, 1, 1], Y)
        iu = np.triu_indices(3, 1)
        target = 2 * np.sum((SX[iu] - SY[iu]) ** 2)
        assert abs(est.estimate - target) <= 4 * est.standard_error + 3 * 3 / 10**5

    def test_zero_weights(self):
        law = gaussian([0, 0], SIGMA2)
        op = VectorStandardization("score_based", law)
        est = independent_kernel_discrepancy(op, self.coords(2), [0, 0], law.sample(100, RngStream(0).generator()))
        assert est.estimate == 0.0


class TestProperties:
    @given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.3, 3.0))
    def test_symmetry(self, pts, bw):
        y, yp = np.array(pts[:2]), np.array(pts[2:])
        kern = RbfKernel(bw)
        law = student(5, [0.1, 0.0], SIGMA2)
        tau = student_tau2(5, [0.1, 0.0], SIGMA2)
        for pair in (ScorePair(law.score, kern),
                     GeneralPair(A_p=tau.eval, a_p=lambda Y: law.location - Y, kernel=kern)):
            np.testing.assert_allclose(pair(y, yp), pair(yp, y), rtol=1e-12, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    def test_permutation(self, seed):
        gen = np.random.default_rng(seed)
        Y, Yp = gen.standard_normal((15, 2)), gen.standard_normal((12, 2))
        pair = ScorePair(gaussian([0, 0], np.eye(2)).score)
        np.testing.assert_allclose(ksd(gen.permutation(Y), gen.permutation(Yp), pair).value, ksd(Y, Yp, pair).value,
                                   rtol=0, atol=1e-14)
