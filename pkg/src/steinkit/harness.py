"""Oracle suite: each check pairs an implementation with an independent route.

The checks mirror the library's certification targets. Every function
returns a list of :class:`CheckResult`; the CLI ``verify`` command and the
acceptance tests both consume them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import amh_closed_form_cap, amh_integral_cap, copula_bound, skew_normal_distance, \
    skew_normal_distance_mc_check
from .distributions import AmhCopula, gaussian, power_exp, student
from .rng import RngStream
from .stats import jackknife_mean
from .stein import (
    ball_probes,
    bivariate_marginal_kernel_field,
    elliptical_tau1,
    gaussian_const,
    gaussian_tau2beta,
    mehler_residual,
    powerexp_tau2,
    student_tau1,
    student_tau2,
    verify_kernel,
)

__all__ = [
    "CheckResult",
    "kernel_certification",
    "stein_identities_mc",
    "mean_equals_variance",
    "skew_normal_equality",
    "amh_sandwich",
    "bivariate_construction",
    "mehler_check",
    "nested_gaussian_sandwich",
    "run_suite",
    "TEST_FUNCTIONS",
]


@dataclass
class CheckResult:
    """One named check with the measured value and its threshold."""

    name: str
    value: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: value={self.value:.6g} threshold={self.threshold:.6g}"

    def to_dict(self):
        return {"name": self.name, "value": float(self.value), "threshold": float(self.threshold),
                "pass": bool(self.passed), "detail": self.detail}


SIGMA2 = np.array([[1.3, 0.4], [0.4, 0.8]])
SIGMA3 = np.array([[1.2, 0.3, -0.2], [0.3, 1.0, 0.25], [-0.2, 0.25, 0.9]])


def _sigma(d):
    return {1: np.array([[1.5]]), 2: SIGMA2, 3: SIGMA3}[d]


def _loc(d):
    return np.linspace(-0.4, 0.6, d) if d > 1 else np.array([0.3])


def _certify(name, dist, tau, n_probes=50, tol=None):
    r = verify_kernel(dist, tau, n_probes=n_probes, tol=tol)
    return CheckResult(name, r.max_residual, r.tol, r.passed, {"construction": tau.construction})


def kernel_certification(n_probes=50):
    """Divergence identity of the closed-form kernels over 3σ-ball probes."""
    out = []
    for d in (2, 3):
        g = gaussian(_loc(d), _sigma(d))
        out.append(_certify(f"gaussian tau1=Sigma d={d}", g, gaussian_const(g), n_probes))
        betas = [0.0, 4.0, np.inf] + ([2.0 * (d - 1)] if d >= 3 else [])
        for b in betas:
            out.append(_certify(f"gaussian tau2beta beta={b} d={d}", g, gaussian_tau2beta(g.dispersion, b, g.location),
                                n_probes))
    for d in (1, 2, 3):
        t = student(5, _loc(d), _sigma(d))
        out.append(_certify(f"student k=5 tau1 d={d}", t, student_tau1(5, t.location, t.dispersion), n_probes))
        out.append(_certify(f"student k=5 tau2 d={d}", t, student_tau2(5, t.location, t.dispersion), n_probes))
    for z in (0.75, 2.0):
        pe = power_exp(1.0, z, _loc(2), SIGMA2)
        for b in (0.0, 4.0, np.inf):
            out.append(_certify(f"power_exp zeta={z} tau2 beta={b} d=2", pe,
                                powerexp_tau2(1.0, z, b, pe.location, pe.dispersion), n_probes))
        out.append(_certify(f"power_exp zeta={z} tau1 d=2", pe, elliptical_tau1(pe), n_probes))
    return out


TEST_FUNCTIONS = {
    "x1": (lambda X: X[:, 0], lambda X: np.eye(X.shape[1])[0] + 0 * X),
    "sin x1": (lambda X: np.sin(X[:, 0]),
               lambda X: np.column_stack([np.cos(X[:, 0])] + [0 * X[:, 0]] * (X.shape[1] - 1))),
    "x1 x2": (lambda X: X[:, 0] * X[:, 1],
              lambda X: np.column_stack([X[:, 1], X[:, 0]] + [0 * X[:, 0]] * (X.shape[1] - 2))),
}


def _shift(fn, axis_from):
    """Compose a test function with a coordinate shift so ``x1`` means ``x_{axis_from+1}``."""
    g, dg = fn

    def g2(X):
        return g(X[:, axis_from:])

    def dg2(X):
        G = np.zeros_like(X)
        G[:, axis_from:] = dg(X[:, axis_from:])
        return G

    return g2, dg2


def _mc_check(name, values):
    est = jackknife_mean(values)
    ratio = float(np.max(np.abs(est.estimate) / np.maximum(est.standard_error, 1e-300)))
    return CheckResult(name, ratio, 4.0, ratio <= 4.0,
                       {"estimate": np.atleast_1d(est.estimate).tolist(),
                        "se": np.atleast_1d(est.standard_error).tolist()})


def stein_identities_mc(n=10**5, seed=20240601):
    """Gaussian covariance, Gaussian ``τ_{2,β}`` and three Student identities.

    The reported value is ``max |estimate|/SE``; the check passes at 4.
    Student identities use ``k = 5`` except for ``g = x₁x₂``, which needs
    finite sixth moments and uses ``k = 8``.
    """
    root = RngStream(seed)
    out = []
    d = 2
    nu, S = _loc(d), SIGMA2
    g = gaussian(nu, S)
    tau_b = gaussian_tau2beta(S, 4.0, nu)
    for idx, (gname, (f, df)) in enumerate(TEST_FUNCTIONS.items()):
        X = g.sample(n, root.substream(idx).generator())
        Z = X - nu
        out.append(_mc_check(f"gaussian covariance identity g={gname}",
                             df(X) @ S - Z * f(X)[:, None]))
        out.append(_mc_check(f"gaussian tau2beta(4) identity g={gname}",
                             np.einsum("nij,nj->ni", tau_b.eval(X), df(X)) - Z * f(X)[:, None]))
        k = 8.0 if gname == "x1 x2" else 5.0
        t = student(k, nu, S)
        X = t.sample(n, root.substream(100 + idx).generator())
        Z = X - nu
        Q = t.mahalanobis(X)
        out.append(_mc_check(f"student k={k:g} (k+Q) identity g={gname}",
                             (k + Q)[:, None] * df(X) - (k + d - 2) * (Z @ t.precision) * f(X)[:, None]))
        T2 = (Z[:, :, None] * Z[:, None, :] + k * S)
        out.append(_mc_check(f"student k={k:g} tau2 identity g={gname}",
                             np.einsum("nij,nj->ni", T2, df(X)) - (k - 1) * Z * f(X)[:, None]))
        # block identity: X = (X1, X2) with X1 scalar, X2 in R^2, g acting on X2 only
        t3 = student(k, _loc(3), SIGMA3)
        X = t3.sample(n, root.substream(200 + idx).generator())
        Z = X - t3.location
        g2, dg2 = _shift((f, df), 1)
        G = dg2(X)[:, 1:]
        lhs = (Z[:, :1] * np.einsum("ni,ni->n", Z[:, 1:], G)[:, None]
               + k * (G @ SIGMA3[0, 1:])[:, None])
        out.append(_mc_check(f"student k={k:g} block identity g(x2,x3)={gname.replace('x1', 'x2').replace('x2 x2', 'x2 x3')}",
                             lhs - (k - 1) * Z[:, :1] * g2(X)[:, None]))
    return out


def mean_equals_variance(n=10**5, seed=777, extended=False):
    """``E[τ(X)] = Var(X)`` entrywise within 4 SE.

    Default cases: Student ``τ₂`` (``k = 5``, ``d = 2``) and Gaussian
    ``τ_{2,4}`` (``d = 2``). ``extended`` adds Gaussian ``β ∈ {0, ∞}`` and
    Student ``τ₁``.
    """
    root = RngStream(seed)
    t = student(5, _loc(2), SIGMA2)
    g = gaussian(_loc(2), SIGMA2)
    cases = [("student k=5 tau2", t, student_tau2(5, t.location, t.dispersion)),
             ("gaussian tau2beta beta=4", g, gaussian_tau2beta(SIGMA2, 4.0, g.location))]
    if extended:
        cases += [("gaussian tau2beta beta=0", g, gaussian_tau2beta(SIGMA2, 0.0, g.location)),
                  ("gaussian tau2beta beta=inf", g, gaussian_tau2beta(SIGMA2, np.inf, g.location)),
                  ("student k=5 tau1", t, student_tau1(5, t.location, t.dispersion))]
    out = []
    for i, (name, dist, tau) in enumerate(cases):
        X = dist.sample(n, root.substream(i).generator())
        vals = tau.eval(X).reshape(n, -1) - dist.covariance().ravel()
        out.append(_mc_check(f"mean equals variance: {name}", vals))
    return out


def skew_normal_equality(norms=(0.5, 1.0, 2.0, 5.0), n=10**5, seed=4242):
    """Closed-form skew-normal distance against its Monte Carlo lower bound."""
    out = []
    direction = np.array([3.0, 4.0]) / 5.0
    root = RngStream(seed)
    for i, a in enumerate(norms):
        alpha = a * direction
        exact = skew_normal_distance(alpha)
        est, se = skew_normal_distance_mc_check(alpha, n, root.substream(i).generator())
        z = abs(est - exact) / se
        out.append(CheckResult(f"skew-normal |alpha|={a}", z, 4.0, z <= 4.0,
                               {"closed_form": exact, "mc": est, "se": se}))
    return out


def amh_sandwich(thetas=(-0.8, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.8)):
    """Quadrature copula bound against the closed-form AMH caps."""
    out = []
    for th in thetas:
        r = copula_bound(AmhCopula(th))
        cap = amh_closed_form_cap(th)
        icap = amh_integral_cap(th)
        ok = r.value <= cap and r.details["integral"] <= icap
        out.append(CheckResult(f"AMH theta={th}", r.value / cap, 1.0, ok,
                               {"bound": r.value, "cap": cap, "integral": r.details["integral"],
                                "integral_cap": icap}))
    return out


def bivariate_construction(n_probes=20, tol=1e-4):
    """Bivariate marginal construction for Gaussian (ρ = 0.5) and Student (k = 5)."""
    cases = [("bivariate gaussian rho=0.5", gaussian([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])),
             ("bivariate student k=5", student(5, [0.0, 0.0], np.eye(2)))]
    out = []
    for name, dist in cases:
        tau = bivariate_marginal_kernel_field(dist)
        out.append(_certify(name, dist, tau, n_probes, tol))
    return out


def mehler_check(mc_draws=10**5, quad_nodes=64, n_probes=5, tol=5e-2, seed=99):
    """Stein-equation residual of the Mehler solution for ``h(w) = tanh(w₁)``."""
    probes = ball_probes(n_probes, np.zeros(2), np.eye(2), radius=2.0)
    res = mehler_residual(np.eye(2), lambda W: np.tanh(W[:, 0]), probes, mc_draws, quad_nodes,
                          RngStream(seed).generator())
    m = float(np.max(np.abs(res)))
    return [CheckResult("mehler residual h=tanh(w1) d=2", m, tol, m <= tol, {"residuals": res.tolist()})]


def run_suite(quick=False):
    """Run the fast oracle checks; ``quick`` shrinks the Monte Carlo sizes."""
    n = 10**4 if quick else 10**5
    t0 = time.time()
    results = []
    results += kernel_certification(20 if quick else 50)
    results += stein_identities_mc(n)
    results += mean_equals_variance(n)
    results += skew_normal_equality(n=n)
    results += amh_sandwich()
    results += bivariate_construction(5 if quick else 20)
    results += mehler_check(mc_draws=10**4 if quick else 10**5)
    results += nested_gaussian_sandwich()
    return results, time.time() - t0


def nested_gaussian_sandwich(shift=(0.7, -0.4), Sigma=None, nodes=40):
    """Lower bound ``‖E[τ₁(X₁)∇π₀(X₁)]‖`` against ``W₁`` and the log-concave upper bound.

    For a Gaussian base and a shifted Gaussian target the Wasserstein-1
    distance equals ``‖shift‖``; both bounds are computed by Gauss-Hermite
    quadrature and must bracket it.
    """
    from .bounds import NestedPair, gaussian_rule, nested_bound_logconcave, operator_norm

    S = SIGMA2 if Sigma is None else np.asarray(Sigma, dtype=float)
    base = gaussian(np.zeros(S.shape[0]), S)
    other = gaussian(np.asarray(shift, dtype=float), S)

    def pi0(X):
        return np.exp(other.log_density(X) - base.log_density(X))

    def grad_pi0(X):
        return pi0(X)[:, None] * (other.score(X) - base.score(X))

    X, W = gaussian_rule(base, nodes)
    lower = float(np.linalg.norm(S @ (W @ grad_pi0(X))))
    upper = nested_bound_logconcave(NestedPair(base, grad_pi0, "strongly_log_concave", 1.0 / operator_norm(S), pi0),
                                    rule=(X, W)).value
    w1 = float(np.linalg.norm(shift))
    ok = lower <= w1 + 1e-8 and w1 <= upper
    return [CheckResult("nested gaussian shift: lower <= W1 <= upper", w1, upper, ok,
                        {"lower": lower, "W1": w1, "upper": upper})]
