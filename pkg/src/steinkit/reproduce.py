"""Calibration and power studies for the Student goodness-of-fit experiments.

Two studies are embedded with their published values:

* univariate: target ``t₅``, score-based pair, RBF ``σ = 1``,
  ``n₁ = n₂ = 100``, alternatives ``t_ℓ``;
* bivariate: target centered Student ``k = 5`` with ``Σ = I``, pair built
  from the Student ``τ₂`` kernel and ``a(y) = −y``.

``scale="full"`` uses the published Monte Carlo sizes and ``scale="desk"``
the reduced ones; every cell is compared with its published value at the
tolerance attached to it.
"""

from __future__ import annotations

import csv
import io
import time

import numpy as np

from .distributions import student
from .errors import ValidationError
from .gof import UBuilder, build_pair, calibrate_null, power_study, power_table_csv
from .rng import RngStream

__all__ = [
    "PUBLISHED_1D",
    "PUBLISHED_2D",
    "SCALES",
    "Cell",
    "run_1d_study",
    "run_2d_study",
    "compare_study",
    "comparison_csv",
    "reproduce_paper_tables",
]

PUBLISHED_1D = {
    "quantiles": (-0.03837828, 0.03970307),
    "ells": (1, 4, 5, 6, 8, 10, 12, 100, 1000),
    "kernel": (0.9049, 0.0576, 0.0507, 0.0445, 0.0433, 0.0550, 0.0587, 0.1330, 0.1510),
    "ks": (0.9384, 0.0497, 0.0459, 0.0479, 0.0443, 0.0461, 0.0480, 0.0593, 0.0618),
    "n": 100,
}

PUBLISHED_2D = {
    "quantiles": (-0.07256331, 0.08441458),
    "ells": (0.1, 1, 4, 5, 6, 10, 100, 1000),
    "kernel": (0.339, 0.690, 0.056, 0.043, 0.046, 0.038, 0.048, 0.052),
    "n": 100,
}

SCALES = {
    "full": {"J_1d": 10**5, "reps_1d": 10**4, "J_2d": 10**3, "reps_2d": 10**3},
    "desk": {"J_1d": 10**4, "reps_1d": 2000, "J_2d": 10**3, "reps_2d": 10**3},
    # pipeline check only; far too small for the comparison to mean anything
    "smoke": {"J_1d": 100, "reps_1d": 100, "J_2d": 100, "reps_2d": 100},
}


def _tol_1d_rate(ell):
    if ell == 1:
        return 0.05
    if ell >= 100:
        return 0.04
    return 0.02


class Cell(dict):
    """One comparison row: study, quantity, ell, published, reproduced, tolerance, pass."""

    @classmethod
    def make(cls, study, quantity, ell, published, got, tol):
        ok = bool(np.isfinite(got) and abs(got - published) <= tol)
        return cls(study=study, quantity=quantity, ell=ell, published=published, reproduced=float(got),
                   tolerance=tol, passed=ok)


def _check_scale(scale):
    if scale not in SCALES:
        raise ValidationError(f"scale must be one of {sorted(SCALES)}")
    return SCALES[scale]


def run_1d_study(scale="desk", seed=2018, workers=1, J=None, reps=None):
    """Calibrate and run the univariate power study.

    Returns ``(calibration, rows)`` with rows as produced by
    :func:`steinkit.gof.power_study`.
    """
    sc = _check_scale(scale)
    J = sc["J_1d"] if J is None else int(J)
    reps = sc["reps_1d"] if reps is None else int(reps)
    n = PUBLISHED_1D["n"]
    target = student(5, [0.0], [[1.0]])
    spec = UBuilder(kind="score", bandwidth=1.0)
    pair = build_pair(target, spec)
    root = RngStream(seed)
    cal = calibrate_null(target, pair, n, n, J, root.substream(0), spec=spec, workers=workers)
    alts = [(ell, student(ell, [0.0], [[1.0]])) for ell in PUBLISHED_1D["ells"]]
    rows = power_study(target, pair, alts, n, n, reps, cal, root.substream(1), spec=spec, ks=True,
                       workers=workers)
    return cal, rows


def run_2d_study(scale="desk", seed=2018, workers=1, J=None, reps=None):
    """Calibrate and run the bivariate power study (kernel row only)."""
    sc = _check_scale(scale)
    J = sc["J_2d"] if J is None else int(J)
    reps = sc["reps_2d"] if reps is None else int(reps)
    n = PUBLISHED_2D["n"]
    target = student(5, [0.0, 0.0], np.eye(2))
    spec = UBuilder(kind="stein-kernel", bandwidth=1.0, construction="student_tau2")
    pair = build_pair(target, spec)
    root = RngStream(seed, stream_id=2)
    cal = calibrate_null(target, pair, n, n, J, root.substream(0), spec=spec, workers=workers)
    alts = [(ell, student(ell, [0.0, 0.0], np.eye(2))) for ell in PUBLISHED_2D["ells"]]
    rows = power_study(target, pair, alts, n, n, reps, cal, root.substream(1), spec=spec, ks=False,
                       workers=workers)
    return cal, rows


def compare_study(study, cal, rows):
    """Comparison cells of one study against the embedded published values."""
    ref = PUBLISHED_1D if study == "1d" else PUBLISHED_2D
    qtol = 0.008 if study == "1d" else 0.02
    cells = [Cell.make(study, "quantile_2.5", "", ref["quantiles"][0], cal.lower_q, qtol),
             Cell.make(study, "quantile_97.5", "", ref["quantiles"][1], cal.upper_q, qtol)]
    by_ell = {r["ell"]: r for r in rows}
    for i, ell in enumerate(ref["ells"]):
        r = by_ell[ell]
        tol = _tol_1d_rate(ell) if study == "1d" else 0.06
        cells.append(Cell.make(study, "rate_kernel", ell, ref["kernel"][i], r["rate_kernel"], tol))
        if study == "1d":
            cells.append(Cell.make(study, "rate_ks", ell, ref["ks"][i], r["rate_ks"], tol))
    return cells


def comparison_csv(cells):
    """RFC-4180 CSV of comparison cells."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["study", "quantity", "ell", "published", "reproduced", "tolerance", "pass"])
    for c in cells:
        w.writerow([c["study"], c["quantity"], c["ell"], repr(c["published"]), repr(c["reproduced"]),
                    repr(c["tolerance"]), "true" if c["passed"] else "false"])
    return buf.getvalue()


def reproduce_paper_tables(scale="desk", seed=2018, workers=1, studies=("1d", "2d")):
    """Run the selected studies and return CSV payloads plus comparison cells.

    Returns
    -------
    dict
        ``{"tables": {name: csv_text}, "cells": [...], "calibrations": {...},
        "timing": {...}}``. Output CSVs depend only on ``seed`` and ``scale``.
    """
    tables, cells, cals, timing = {}, [], {}, {}
    runners = {"1d": run_1d_study, "2d": run_2d_study}
    for s in studies:
        if s not in runners:
            raise ValidationError(f"unknown study {s!r}")
        t0 = time.time()
        cal, rows = runners[s](scale, seed, workers)
        timing[s] = time.time() - t0
        tables[f"power_{s}.csv"] = power_table_csv(rows)
        cals[s] = cal.to_dict()
        cells += compare_study(s, cal, rows)
    tables["comparison.csv"] = comparison_csv(cells)
    return {"tables": tables, "cells": cells, "calibrations": cals, "timing": timing}
