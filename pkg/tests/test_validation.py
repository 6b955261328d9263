import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambert_creep.creep import psi, psi_prime, spectrum_H
from lambert_creep.errors import GridError, GridTooCoarse
from lambert_creep.validation import (
    DEFAULT_TOLERANCES,
    REPORT_SCHEMA,
    Check,
    ValidationReport,
    audit_grid,
    check_bernstein,
    check_cm,
    run_identity_suite,
)


@pytest.fixture(scope="module")
def quick_report():
    return run_identity_suite(include_slow=False)


class TestCheckCM:
    def test_exponential(self):
        audit = check_cm(lambda t: math.exp(-t), np.linspace(0.0, 10.0, 101), 8)
        assert audit.passed and audit.max_order == 8

    def test_psi_prime(self):
        assert check_cm(psi_prime, audit_grid(0.1, 10.0), 6).passed

    def test_H_fails(self):
        audit = check_cm(lambda x: spectrum_H(x).value, audit_grid(0.1, 10.0), 6, 1e-8)
        assert not audit.passed
        assert audit.first_violation_order <= 6
        order, point, value = audit.violations[0]
        assert 0.1 <= point <= 10.0 and value < -1e-8

    def test_increasing_fails_first_order(self):
        audit = check_cm(lambda t: t, np.linspace(0.0, 1.0, 11), 3)
        assert audit.first_violation_order == 1

    def test_nonuniform_grid(self):
        with pytest.raises(GridError):
            check_cm(math.exp, [0.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 2)

    def test_decreasing_grid(self):
        with pytest.raises(GridError):
            check_cm(math.exp, np.linspace(1.0, 0.0, 20), 2)

    def test_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            check_cm(math.exp, np.linspace(0.0, 1.0, 5), 6)

    @pytest.mark.parametrize("order", [0, 9])
    def test_order_range(self, order):
        with pytest.raises(GridError):
            check_cm(math.exp, np.linspace(0.0, 1.0, 50), order)

    def test_deterministic(self):
        grid = audit_grid(0.1, 10.0)
        a = check_cm(lambda x: spectrum_H(x).value, grid, 6, 1e-8)
        b = check_cm(lambda x: spectrum_H(x).value, grid, 6, 1e-8)
        assert a.violations == b.violations

    @given(
        st.floats(0.0, 5.0),
        st.floats(0.01, 0.5),
        st.integers(20, 120),
        st.floats(0.1, 3.0),
        st.integers(1, 8),
    )
    def test_canonical_cm_functions_clean(self, lo, h, n, a, order):
        grid = lo + h * np.arange(n)
        assert check_cm(lambda t: math.exp(-a * t), grid, order).passed
        assert check_cm(lambda t: 1.0 / (1.0 + t), grid, order).passed


class TestCheckBernstein:
    def test_one_minus_exp(self):
        assert check_bernstein(lambda t: 1.0 - math.exp(-t), np.linspace(0.0, 10.0, 101)).passed

    def test_psi(self):
        assert check_bernstein(psi, audit_grid(0.1, 10.0), 6).passed

    def test_square_fails(self):
        audit = check_bernstein(lambda t: t * t, np.linspace(0.0, 2.0, 41), 4)
        assert not audit.passed
        assert audit.first_violation_order == 2

    def test_negative_fails(self):
        audit = check_bernstein(lambda t: -1.0 + 0.0 * t, np.linspace(0.0, 1.0, 20), 2)
        assert audit.first_violation_order == 0

    def test_grid_audit_spacing(self):
        grid = audit_grid(0.1, 10.0)
        assert len(grid) == 129 and grid[0] == 0.1 and grid[-1] == 10.0
        with pytest.raises(GridError):
            audit_grid(0.0, 1.0)


class TestReport:
    def test_quick_suite_passes(self, quick_report):
        assert quick_report.passed, quick_report.to_text()
        names = {c.name for c in quick_report.checks}
        assert names == set(DEFAULT_TOLERANCES) - {"spectral_consistency"}

    def test_every_check_has_anchor(self, quick_report):
        assert all(c.anchor for c in quick_report.checks)

    def test_json_schema(self, quick_report):
        doc = json.loads(quick_report.to_json())
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["passed"] is True

    def test_text_lines(self, quick_report):
        lines = quick_report.to_text().splitlines()
        assert len(lines) == len(quick_report.checks) + 1
        assert all(line.startswith(("PASS", "FAIL")) for line in lines)

    def test_nan_serialises_as_null(self):
        report = ValidationReport([Check("x", "a = b", math.nan, 1.0, 0.1, False)])
        doc = json.loads(report.to_json())
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["checks"][0]["computed"] is None and doc["passed"] is False

    def test_forced_failure(self):
        report = run_identity_suite(tolerances={"integral_rho": 1e-8}, include_slow=False)
        failed = [c.name for c in report.failures()]
        assert "integral_rho" in failed and not report.passed

    def test_unknown_tolerance(self):
        with pytest.raises(KeyError):
            run_identity_suite(tolerances={"nope": 1.0})

    def test_negative_tolerance(self):
        with pytest.raises(ValueError):
            run_identity_suite(tolerances={"integral_rho": -1.0})

    def test_failures_do_not_abort(self, monkeypatch):
        import lambert_creep.validation as v

        def boom(*args, **kwargs):
            raise RuntimeError("broken route")

        monkeypatch.setattr(v, "titchmarsh_vs_K", boom)
        report = run_identity_suite(include_slow=False)
        bad = [c for c in report.checks if not c.passed]
        assert [c.name for c in bad] == ["titchmarsh_vs_K"]
        assert "broken route" in bad[0].note
        assert len(report.checks) == len(DEFAULT_TOLERANCES) - 1
