"""Verification harness and reproduction pipeline at small scale."""

import numpy as np
import pytest

from steinkit.errors import ValidationError
from steinkit.harness import CheckResult, amh_sandwich, nested_gaussian_sandwich, run_suite
from steinkit.reproduce import PUBLISHED_1D, PUBLISHED_2D, Cell, compare_study, reproduce_paper_tables, run_2d_study


class TestHarness:
    def test_quick_suite_passes(self):
        results, elapsed = run_suite(quick=True)
        assert results and elapsed >= 0
        assert all(r.passed for r in results), [r.line() for r in results if not r.passed]

    def test_line_format(self):
        r = CheckResult("x", 0.5, 1.0, True)
        assert r.line().startswith("[PASS] x")
        assert CheckResult("y", 2.0, 1.0, False).line().startswith("[FAIL] y")

    def test_nested_sandwich(self):
        assert all(r.passed for r in nested_gaussian_sandwich())

    def test_amh(self):
        assert all(r.passed for r in amh_sandwich([0.2, 0.5]))


class TestReproduce:
    def test_cell_tolerance(self):
        assert Cell.make("1d", "rate_kernel", 1, 0.9, 0.94, 0.05)["passed"]
        assert not Cell.make("1d", "rate_kernel", 1, 0.9, 0.96, 0.05)["passed"]
        assert not Cell.make("1d", "rate_kernel", 1, 0.9, np.nan, 0.05)["passed"]

    def test_compare_layout(self):
        cal, rows = run_2d_study("smoke", seed=1)
        cells = compare_study("2d", cal, rows)
        assert len(cells) == 2 + len(PUBLISHED_2D["ells"])
        assert {c["quantity"] for c in cells} == {"quantile_2.5", "quantile_97.5", "rate_kernel"}

    def test_tables(self):
        res = reproduce_paper_tables("smoke", seed=3, studies=("1d",))
        assert set(res["tables"]) == {"power_1d.csv", "comparison.csv"}
        assert len(res["cells"]) == 2 + 2 * len(PUBLISHED_1D["ells"])

    def test_unknown(self):
        with pytest.raises(ValidationError):
            reproduce_paper_tables("smoke", studies=("3d",))
        with pytest.raises(ValidationError):
            reproduce_paper_tables("huge")
