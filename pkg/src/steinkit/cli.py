"""Command-line entry point.

Every command resolves its arguments into a :class:`RunConfig`, runs, and
wraps the result in an artifact envelope carrying the library version, the
resolved config, the seed, the wall-clock time and the config hash. CSV
outputs get the envelope in a ``<file>.meta.json`` sidecar so the CSV itself
stays a plain table.

Exit codes: 0 success, 1 failed certification (``kernel-check``,
``verify``), 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericFailure, ValidationError

__all__ = ["RunConfig", "COMMANDS", "config_hash", "envelope", "main", "run"]

COMMANDS = ("sample", "score", "kernel-eval", "kernel-check", "ksd", "gof-calibrate", "gof-test", "gof-power",
            "bound", "mehler", "verify", "reproduce")

SEED_ENV = "STEINKIT_SEED"


@dataclass
class RunConfig:
    """Fully resolved run description.

    ``workers`` and ``out`` do not enter the hash: they change neither the
    numbers nor their meaning.
    """

    command: str
    target: dict = None
    inputs: dict = field(default_factory=dict)
    out: str = None
    seed: int = 0
    budgets: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def hash(self):
        return config_hash(self)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _float_json(x):
    """JSON-safe float: non-finite values become strings."""
    x = float(x)
    return x if np.isfinite(x) else str(x)


def config_hash(cfg: RunConfig):
    """SHA-256 of the canonical config JSON, excluding ``workers`` and ``out``."""
    d = asdict(cfg)
    d.pop("workers")
    d.pop("out")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def envelope(cfg: RunConfig, result, wall_clock):
    return {
        "steinkit_version": __version__,
        "config": json.loads(cfg.to_json()),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "wall_clock_seconds": round(float(wall_clock), 6),
        "result": result,
    }


# --------------------------------------------------------------------------
# argument helpers
def _json_arg(text, what):
    """Parse inline JSON, or read it from a file path."""
    if text is None:
        return None
    s = text.strip()
    if not s[:1] in "{[" and not s[:1].isdigit() and s[:1] not in "-." and Path(s).exists():
        s = Path(s).read_text(encoding="utf-8")
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: invalid JSON ({exc})") from exc


def _read_csv(path):
    """Numeric CSV with one observation per row; a non-numeric first row is a header."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    try:
        X = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric entry ({exc})") from exc
    return X


def _matrix_csv(X, header=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    X = np.atleast_2d(X)
    w.writerow(header or [f"x{i + 1}" for i in range(X.shape[1])])
    for row in X:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _params(pairs):
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise ValidationError(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = float(v) if v in ("inf", "-inf") else v
    return out


def _points(args, d):
    if getattr(args, "points", None):
        X = _read_csv(args.points)
    elif getattr(args, "x", None) is not None:
        X = np.atleast_2d(np.asarray(_json_arg(args.x, "--x"), dtype=float))
    else:
        raise ValidationError("give --points <csv> or --x <json>")
    if X.shape[1] != d:
        raise ValidationError(f"points have {X.shape[1]} columns, target dimension is {d}")
    return X


def _target(cfg):
    from .distributions import parse_spec

    if cfg.target is None:
        raise ValidationError("--target is required")
    return parse_spec(cfg.target)


def _resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ValidationError(f"{SEED_ENV} must be an integer") from exc


# --------------------------------------------------------------------------
# command implementations; each returns (result, csv_text_or_None, exit_code)
def _cmd_sample(cfg):
    from .rng import RngStream

    dist = _target(cfg)
    X = dist.sample(int(cfg.budgets["n"]), RngStream(cfg.seed).generator())
    X = np.asarray(X, dtype=float)
    X = X[:, None] if X.ndim == 1 else X
    return {"n": X.shape[0], "dim": X.shape[1]}, _matrix_csv(X), 0


def _cmd_score(cfg):
    dist = _target(cfg)
    X = np.asarray(cfg.inputs["points"], dtype=float)
    S = np.atleast_2d(dist.score(X))
    return {"points": X.tolist(), "score": S.tolist()}, None, 0


def _kernel(cfg, dist):
    from .stein import stein_kernel

    return stein_kernel(dist, cfg.options["construction"], **cfg.options.get("params", {}))


def _cmd_kernel_eval(cfg):
    dist = _target(cfg)
    tau = _kernel(cfg, dist)
    X = np.asarray(cfg.inputs["points"], dtype=float)
    T = tau.eval(X)
    return {"construction": tau.construction, "rows": list(tau.rows), "points": X.tolist(),
            "tau": np.asarray(T).tolist()}, None, 0


def _cmd_kernel_check(cfg):
    from .stein import verify_kernel

    dist = _target(cfg)
    tau = _kernel(cfg, dist)
    rep = verify_kernel(dist, tau, n_probes=int(cfg.budgets.get("n_probes", 50)), tol=cfg.options.get("tol"))
    return rep.to_dict(), None, 0 if rep.passed else 1


def _cmd_ksd(cfg):
    from .discrepancy import ksd
    from .gof import build_pair

    dist = _target(cfg)
    Y = np.asarray(cfg.inputs["samples"], dtype=float)
    Yp = cfg.inputs.get("samples2")
    Yp = None if Yp is None else np.asarray(Yp, dtype=float)
    spec = _ubuilder(cfg)
    bw = None
    if spec.bandwidth == "median":
        from .discrepancy import median_heuristic

        bw = median_heuristic(Y if Yp is None else np.vstack([Y, Yp]))
    pair = build_pair(dist, spec, bandwidth=bw)
    est = ksd(Y, Yp, pair, estimator=cfg.options.get("estimator", "two_sample"),
              chunk_size=cfg.budgets.get("chunk_size"))
    return est.to_dict(), None, 0


def _ubuilder(cfg):
    from .gof import UBuilder

    o = cfg.options
    return UBuilder(kind=o.get("u", "score"), bandwidth=o.get("bandwidth", 1.0), construction=o.get("construction"),
                    matrix_field=o.get("matrix_field", "identity"), vector_field=o.get("vector_field", "score"),
                    params=o.get("params", {}))


def _calibrate(cfg, dist, spec, pair):
    from .gof import calibrate_null
    from .rng import RngStream

    b = cfg.budgets
    cal = calibrate_null(dist, pair, int(b["n1"]), int(b["n2"]), int(b["J"]), RngStream(cfg.seed, 0), spec=spec,
                         workers=cfg.workers)
    cal.provenance = {"config_hash": cfg.hash(), "steinkit_version": __version__}
    return cal


def _cmd_gof_calibrate(cfg):
    from .gof import build_pair

    dist = _target(cfg)
    spec = _ubuilder(cfg)
    cal = _calibrate(cfg, dist, spec, build_pair(dist, spec))
    return cal.to_dict(), None, 0


def _load_calibration(cfg):
    from .gof import NullCalibration

    data = cfg.inputs.get("calibration")
    if data is None:
        return None
    if "result" in data and "lower_q" not in data:
        data = data["result"]
    try:
        return NullCalibration.from_dict(data)
    except TypeError as exc:
        raise ValidationError(f"calibration file has unexpected fields ({exc})") from exc


def _cmd_gof_test(cfg):
    from .gof import build_pair, gof_test

    dist = _target(cfg)
    spec = _ubuilder(cfg)
    pair = build_pair(dist, spec)
    cal = _load_calibration(cfg) or _calibrate(cfg, dist, spec, pair)
    Y = np.asarray(cfg.inputs["samples"], dtype=float)
    Yp = np.asarray(cfg.inputs["samples2"], dtype=float)
    rep = gof_test(dist, pair, Y, Yp, cal, spec=spec)
    rep.seed = cfg.seed
    out = rep.to_dict()
    out["statistic"] = _float_json(out["statistic"])
    return out, None, 0


def _alternatives(cfg, dist):
    from .distributions import parse_spec, student

    alts = cfg.options.get("alternatives")
    if alts is not None:
        if not isinstance(alts, list):
            raise ValidationError("alternatives must be a JSON list of {label, spec}")
        return [(a.get("label", i), parse_spec(a["spec"])) for i, a in enumerate(alts)]
    ells = cfg.options.get("ells")
    if ells is None:
        raise ValidationError("give --alternatives or --ells")
    return [(e, student(float(e), dist.location, dist.dispersion)) for e in ells]


def _cmd_gof_power(cfg):
    from .gof import build_pair, power_study, power_table_csv
    from .rng import RngStream

    dist = _target(cfg)
    spec = _ubuilder(cfg)
    pair = build_pair(dist, spec)
    cal = _load_calibration(cfg) or _calibrate(cfg, dist, spec, pair)
    b = cfg.budgets
    rows = power_study(dist, pair, _alternatives(cfg, dist), int(b["n1"]), int(b["n2"]), int(b["reps"]), cal,
                       RngStream(cfg.seed, 1), spec=spec, ks=bool(cfg.options.get("ks", True)),
                       workers=cfg.workers)
    return {"rows": rows, "calibration": cal.to_dict()}, power_table_csv(rows), 0


def _cmd_bound(cfg):
    from . import bounds
    from .distributions import AmhCopula

    o = cfg.options
    kind = o["kind"]
    if kind == "copula":
        rep = bounds.copula_bound(AmhCopula(float(o["theta"])), n=int(cfg.budgets.get("nodes", 64)))
        rep.details["closed_form_cap"] = bounds.amh_closed_form_cap(float(o["theta"]))
        rep.details["integral_cap"] = bounds.amh_integral_cap(float(o["theta"]))
        return rep.to_dict(), None, 0
    if kind == "posterior":
        rep = bounds.normal_posterior_bound(o["sigma"], o["sigma2"], int(o["n"]), o["xbar"], o["mu"])
        return rep.to_dict(), None, 0
    if kind == "skew-normal":
        alpha = np.atleast_1d(np.asarray(o["alpha"], dtype=float))
        out = {"value": bounds.skew_normal_distance(alpha), "regime": "strongly_log_concave",
               "method": "closed_form", "error": 0.0, "details": {}}
        n = cfg.budgets.get("n")
        if n:
            from .rng import RngStream

            est, se = bounds.skew_normal_distance_mc_check(alpha, int(n), RngStream(cfg.seed).generator())
            out["details"] = {"mc_estimate": est, "mc_standard_error": se}
        return out, None, 0
    if kind == "nested":
        return _nested_bound(cfg), None, 0
    raise ValidationError(f"unknown bound {kind!r}")


def _nested_bound(cfg):
    """Nested bound for ``p₂ = π₀ p₁`` given two normalized specs.

    Config keys: ``base`` and ``target`` (specs), optional ``regime`` and
    ``constant``, optional ``n`` (Monte Carlo size) or ``nodes``
    (Gauss-Hermite, Gaussian base in d ≤ 2).
    """
    from . import bounds
    from .distributions import GaussianGenerator, parse_spec
    from .rng import RngStream

    c = cfg.options["config"]
    if not isinstance(c, dict) or "base" not in c or "target" not in c:
        raise ValidationError("nested config needs 'base' and 'target' specs")
    base, other = parse_spec(c["base"]), parse_spec(c["target"])
    if base.dim != other.dim:
        raise ValidationError("base and target dimensions differ")
    gaussian_base = isinstance(getattr(base, "generator", None), GaussianGenerator)
    regime = c.get("regime", "strongly_log_concave" if gaussian_base else None)
    constant = c.get("constant")
    if constant is None and gaussian_base and regime == "strongly_log_concave":
        constant = 1.0 / bounds.operator_norm(base.dispersion)
    if regime is None or constant is None:
        raise ValidationError("give 'regime' and 'constant' for a non-Gaussian base")

    def pi0(X):
        return np.exp(other.log_density(X) - base.log_density(X))

    def grad_pi0(X):
        return pi0(X)[:, None] * (np.atleast_2d(other.score(X)) - np.atleast_2d(base.score(X)))

    pair = bounds.NestedPair(base, grad_pi0, regime, float(constant), pi0)
    rule = None
    if "n" not in c and gaussian_base and base.dim <= 2:
        rule = bounds.gaussian_rule(base, int(c.get("nodes", 40)))
    fn = bounds.nested_bound_logconcave if regime == "strongly_log_concave" else bounds.nested_bound_poincare
    rep = fn(pair, rule=rule, n=int(c.get("n", 10**5)), rng=RngStream(cfg.seed).generator())
    return rep.to_dict()


_H_FUNCTIONS = {
    "tanh_w1": lambda W: np.tanh(W[:, 0]),
    "sin_w1": lambda W: np.sin(W[:, 0]),
    "w1_w2": lambda W: W[:, 0] * W[:, -1],
}


def _cmd_mehler(cfg):
    from .stein import MehlerSolver

    o = cfg.options
    S = np.atleast_2d(np.asarray(o["sigma"], dtype=float))
    h = _H_FUNCTIONS.get(o.get("h", "tanh_w1"))
    if h is None:
        raise ValidationError(f"--h must be one of {sorted(_H_FUNCTIONS)}")
    W = np.asarray(cfg.inputs["points"], dtype=float)
    b = cfg.budgets
    solver = MehlerSolver(S, h, int(b.get("mc_draws", 10**5)), int(b.get("quad_nodes", 64)), cfg.seed)
    out = {"points": W.tolist(), "f": np.asarray(solver(W)).tolist()}
    if o.get("residual"):
        out["residual"] = [solver.residual(w) for w in W]
    return out, None, 0


def _cmd_verify(cfg):
    from .harness import run_suite

    results, elapsed = run_suite(quick=bool(cfg.options.get("quick")))
    failed = [r.name for r in results if not r.passed]
    return {"checks": [r.to_dict() for r in results], "failed": failed, "elapsed_seconds": elapsed}, None, \
        1 if failed else 0


def _cmd_reproduce(cfg):
    from .reproduce import reproduce_paper_tables

    res = reproduce_paper_tables(scale=cfg.options.get("scale", "desk"), seed=cfg.seed, workers=cfg.workers,
                                 studies=tuple(cfg.options.get("studies", ("1d", "2d"))))
    return res, None, 0


_DISPATCH = {
    "sample": _cmd_sample,
    "score": _cmd_score,
    "kernel-eval": _cmd_kernel_eval,
    "kernel-check": _cmd_kernel_check,
    "ksd": _cmd_ksd,
    "gof-calibrate": _cmd_gof_calibrate,
    "gof-test": _cmd_gof_test,
    "gof-power": _cmd_gof_power,
    "bound": _cmd_bound,
    "mehler": _cmd_mehler,
    "verify": _cmd_verify,
    "reproduce": _cmd_reproduce,
}


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))


def run(cfg: RunConfig, stdout=None):
    """Execute ``cfg``, write its artifacts and return the exit code (errors propagate)."""
    stdout = stdout or sys.stdout
    t0 = time.time()
    result, table, code = _DISPATCH[cfg.command](cfg)
    elapsed = time.time() - t0
    if cfg.command == "reproduce":
        return _finish_reproduce(cfg, result, elapsed, stdout)
    env = envelope(cfg, result, elapsed)
    body = json.dumps(env, indent=2, default=_jsonable)
    if table is not None and cfg.out:
        _write(cfg.out, table)
        _write(str(cfg.out) + ".meta.json", body + "\n")
    elif cfg.out:
        _write(cfg.out, body + "\n")
    else:
        stdout.write((table if table is not None else body + "\n"))
    return code


def _finish_reproduce(cfg, result, elapsed, stdout):
    out_dir = Path(cfg.out or "reproduce_out")
    for name, text in result["tables"].items():
        _write(out_dir / name, text)
        meta = envelope(cfg, {"table": name, "calibrations": result["calibrations"]}, elapsed)
        _write(out_dir / (name + ".meta.json"), json.dumps(meta, indent=2, default=_jsonable) + "\n")
    for c in result["cells"]:
        flag = "PASS" if c["passed"] else "FAIL"
        stdout.write(f"[{flag}] {c['study']} {c['quantity']} ell={c['ell']}: published={c['published']} "
                     f"reproduced={c['reproduced']:.4f} tol={c['tolerance']}\n")
    return 0


# --------------------------------------------------------------------------
def _parser():
    p = argparse.ArgumentParser(prog="steinkit", description="Stein operators, kernels, discrepancies and bounds.")
    p.add_argument("--version", action="version", version=f"steinkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, target=True):
        if target:
            sp.add_argument("--target", help="distribution spec: inline JSON or path to a JSON file")
        sp.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("--workers", type=int, default=1)
        return sp

    s = common(sub.add_parser("sample", help="draw a sample as CSV"))
    s.add_argument("--n", type=int, required=True)

    for name in ("score", "kernel-eval"):
        s = common(sub.add_parser(name))
        s.add_argument("--points", help="CSV of evaluation points")
        s.add_argument("--x", help="JSON point or list of points")
        if name == "kernel-eval":
            s.add_argument("--construction", required=True)
            s.add_argument("--param", action="append", help="key=value kernel parameter")

    s = common(sub.add_parser("kernel-check", help="certify a Stein kernel via the divergence identity"))
    s.add_argument("--construction", required=True)
    s.add_argument("--param", action="append")
    s.add_argument("--n-probes", type=int, default=50)
    s.add_argument("--tol", type=float, default=None)

    def u_flags(sp):
        sp.add_argument("--u", choices=("score", "stein-kernel", "general"), default="score")
        sp.add_argument("--kernel", choices=("rbf",), default="rbf")
        sp.add_argument("--bandwidth", default="1.0", help="positive number or 'median'")
        sp.add_argument("--construction")
        sp.add_argument("--matrix-field", choices=("identity", "stein_kernel", "zero"), default="identity")
        sp.add_argument("--vector-field", choices=("score", "location_minus", "zero"), default="score")
        sp.add_argument("--param", action="append")

    s = common(sub.add_parser("ksd", help="kernelized Stein discrepancy of samples"))
    s.add_argument("--samples", required=True)
    s.add_argument("--samples2")
    s.add_argument("--estimator", choices=("two_sample", "u_statistic_single_sample"), default="two_sample")
    s.add_argument("--chunk-size", type=int)
    u_flags(s)

    g = sub.add_parser("gof", help="goodness-of-fit pipelines")
    gsub = g.add_subparsers(dest="gof_command", required=True)
    for name in ("calibrate", "test", "power"):
        s = common(gsub.add_parser(name))
        u_flags(s)
        s.add_argument("--n1", type=int, default=100)
        s.add_argument("--n2", type=int, default=100)
        s.add_argument("--J", type=int, default=10**4)
        if name != "calibrate":
            s.add_argument("--calibration", help="calibration JSON from 'gof calibrate'")
        if name == "test":
            s.add_argument("--samples", required=True)
            s.add_argument("--samples2", required=True)
        if name == "power":
            s.add_argument("--reps", type=int, default=2000)
            s.add_argument("--ells", help="JSON list of Student degrees of freedom")
            s.add_argument("--alternatives", help="JSON list of {label, spec}")
            s.add_argument("--no-ks", action="store_true")

    b = sub.add_parser("bound", help="Wasserstein bounds")
    bsub = b.add_subparsers(dest="bound_command", required=True)
    s = common(bsub.add_parser("copula"), target=False)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--nodes", type=int, default=64)
    s = common(bsub.add_parser("posterior"), target=False)
    for f in ("--sigma", "--sigma2", "--xbar", "--mu"):
        s.add_argument(f, required=True, help="JSON number, vector or matrix")
    s.add_argument("--n", type=int, required=True)
    s = common(bsub.add_parser("skew-normal"), target=False)
    s.add_argument("--alpha", required=True, help="JSON vector")
    s.add_argument("--n", type=int, default=0, help="Monte Carlo size of the optional check")
    s = common(bsub.add_parser("nested"), target=False)
    s.add_argument("--config", required=True, help="JSON with 'base' and 'target' specs")

    s = common(sub.add_parser("mehler", help="Mehler solution of the Gaussian Stein equation"), target=False)
    s.add_argument("--sigma", required=True)
    s.add_argument("--h", default="tanh_w1", choices=sorted(_H_FUNCTIONS))
    s.add_argument("--points")
    s.add_argument("--x")
    s.add_argument("--mc-draws", type=int, default=10**5)
    s.add_argument("--quad-nodes", type=int, default=64)
    s.add_argument("--residual", action="store_true")

    s = common(sub.add_parser("verify", help="run the oracle suite"), target=False)
    s.add_argument("--quick", action="store_true")

    s = common(sub.add_parser("reproduce", help="rerun the published simulation studies"), target=False)
    s.add_argument("--scale", choices=("smoke", "desk", "full"), default="desk")
    s.add_argument("--studies", default='["1d", "2d"]')
    return p


def _bandwidth(text):
    if text == "median":
        return "median"
    try:
        return float(text)
    except ValueError as exc:
        raise ValidationError(f"--bandwidth must be a number or 'median', got {text!r}") from exc


def config_from_args(args):
    """Translate parsed arguments into a :class:`RunConfig`."""
    cmd = args.command
    if cmd == "gof":
        cmd = f"gof-{args.gof_command}"
    target = _json_arg(getattr(args, "target", None), "--target")
    inputs, budgets, options = {}, {}, {}
    seed = _resolve_seed(args.seed)

    if cmd == "sample":
        budgets["n"] = args.n
    if cmd in ("kernel-eval", "kernel-check"):
        options["construction"] = args.construction
        options["params"] = _params(args.param)
    if cmd == "kernel-check":
        budgets["n_probes"] = args.n_probes
        options["tol"] = args.tol
    if cmd in ("ksd", "gof-calibrate", "gof-test", "gof-power"):
        options.update(u=args.u, kernel=args.kernel, bandwidth=_bandwidth(args.bandwidth),
                       construction=args.construction, matrix_field=args.matrix_field,
                       vector_field=args.vector_field, params=_params(args.param))
    if cmd == "ksd":
        inputs["samples"] = _read_csv(args.samples).tolist()
        if args.samples2:
            inputs["samples2"] = _read_csv(args.samples2).tolist()
        options["estimator"] = args.estimator
        budgets["chunk_size"] = args.chunk_size
    if cmd.startswith("gof-"):
        budgets.update(n1=args.n1, n2=args.n2, J=args.J)
        if cmd != "gof-calibrate" and args.calibration:
            inputs["calibration"] = _json_arg(args.calibration, "--calibration")
    if cmd == "gof-test":
        inputs["samples"] = _read_csv(args.samples).tolist()
        inputs["samples2"] = _read_csv(args.samples2).tolist()
    if cmd == "gof-power":
        budgets["reps"] = args.reps
        options["ells"] = _json_arg(args.ells, "--ells")
        options["alternatives"] = _json_arg(args.alternatives, "--alternatives")
        options["ks"] = not args.no_ks
    if cmd == "bound":
        kind = args.bound_command
        options["kind"] = kind
        if kind == "copula":
            options["theta"] = args.theta
            budgets["nodes"] = args.nodes
        elif kind == "posterior":
            for k in ("sigma", "sigma2", "xbar", "mu"):
                options[k] = _json_arg(getattr(args, k), f"--{k}")
            options["n"] = args.n
        elif kind == "skew-normal":
            options["alpha"] = _json_arg(args.alpha, "--alpha")
            budgets["n"] = args.n
        else:
            options["config"] = _json_arg(args.config, "--config")
    if cmd == "mehler":
        options.update(sigma=_json_arg(args.sigma, "--sigma"), h=args.h, residual=args.residual)
        budgets.update(mc_draws=args.mc_draws, quad_nodes=args.quad_nodes)
    if cmd == "verify":
        options["quick"] = args.quick
    if cmd == "reproduce":
        options["scale"] = args.scale
        options["studies"] = _json_arg(args.studies, "--studies")

    cfg = RunConfig(command=cmd, target=target, inputs=inputs, out=args.out, seed=seed, budgets=budgets,
                    options=options, workers=max(1, int(args.workers)))
    if cmd in ("score", "kernel-eval", "mehler"):
        d = _target(cfg).dim if cmd != "mehler" else np.atleast_2d(np.asarray(options["sigma"])).shape[0]
        cfg.inputs["points"] = _points(args, d).tolist()
    return cfg


def main(argv=None):
    """CLI entry point; returns the process exit code."""
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except ValidationError as exc:
        pointer = getattr(exc, "pointer", None)
        msg = f"steinkit: invalid input: {exc}"
        if pointer:
            msg += f"\n  at {pointer}"
        print(msg, file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"steinkit: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"steinkit: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
