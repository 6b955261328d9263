import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import lambertw as scipy_lambertw

from lambert_creep.errors import ConvergenceError, CutError, DomainError
from lambert_creep.lambertw import (
    BRANCH_SERIES,
    INV_E,
    BranchSide,
    SolveConfig,
    w0_asymptotic,
    w0_complex,
    w0_cut_limit,
    w0_prime_asymptotic,
    w0_prime_branch_series,
    w0_prime_complex,
    w0_prime_cut_limit,
    w0_prime_real,
    w0_real,
)

ABOVE, BELOW = BranchSide.ABOVE, BranchSide.BELOW

# reference values from mpmath at 30 digits
OMEGA = 0.56714329040978387299996866221
W_1000 = 5.2496028524015962271260563197
W_CUT_M1 = complex(-0.318131505204764135312654251588, 1.33723570143068940890116214319)
W_CUT_M2 = complex(0.17281600283999997574575914578, 1.67368641374084267718880177797)
IM_CUT = {-1.0: 1.33723570143068940890116214319, -10.0: 2.14019452707471319601653622165,
          -1e3: 2.66419814329052045957114040268, -1e6: 2.8921791489948752450172209892}


def mp_w0(z):
    return complex(mpmath.lambertw(z))


class TestSolveConfig:
    def test_defaults(self):
        cfg = SolveConfig()
        assert cfg.rel_tol == 1e-14 and cfg.max_iter == 50

    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"rel_tol": -1.0}, {"max_iter": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolveConfig(**kw)


class TestW0Real:
    @pytest.mark.parametrize("x, expected", [(0.0, 0.0), (math.e, 1.0), (-INV_E, -1.0), (1.0, OMEGA), (1e3, W_1000)])
    def test_known_values(self, x, expected):
        assert w0_real(x) == pytest.approx(expected, abs=1e-15, rel=1e-15)

    def test_endpoint_slack(self):
        assert w0_real(-INV_E - 1e-16) == -1.0

    @pytest.mark.parametrize("x", [-0.4, -1.0, math.nan, math.inf])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            w0_real(x)

    def test_convergence_error(self):
        with pytest.raises(ConvergenceError):
            w0_real(1e8, SolveConfig(max_iter=1))

    def test_matches_scipy_on_grid(self):
        xs = np.concatenate([-INV_E + np.geomspace(1e-3, 0.3, 100), np.geomspace(1e-10, 1e300, 400)])
        ours = np.array([w0_real(x) for x in xs])
        ref = scipy_lambertw(xs).real
        assert np.max(np.abs(ours - ref) / np.maximum(1.0, np.abs(ref))) < 5e-15

    def test_near_branch_point_matches_mpmath(self):
        # W has a square-root condition number here; compare on the exact float inputs
        for x in -INV_E + np.geomspace(1e-16, 1e-3, 100):
            assert abs(w0_real(x) - float(mpmath.lambertw(mpmath.mpf(x)))) < 5e-15

    @given(st.floats(min_value=-INV_E, max_value=1e12))
    def test_residual_and_branch(self, x):
        w = w0_real(x)
        assert w >= -1.0
        assert abs(w * math.exp(w) - x) <= 1e-12 * (1.0 + abs(x))

    @given(st.floats(0.0, 1e6), st.floats(0.0, 1e6))
    def test_nondecreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert w0_real(lo) <= w0_real(hi)


class TestW0Complex:
    def test_real_axis(self):
        assert w0_complex(complex(math.e, 0.0)) == pytest.approx(1.0, abs=1e-15)

    def test_on_cut_raises(self):
        with pytest.raises(CutError):
            w0_complex(complex(-1.0, 0.0))

    def test_near_cut_approaches_limits(self):
        up = w0_complex(complex(-1.0, 1e-8))
        dn = w0_complex(complex(-1.0, -1e-8))
        assert up == pytest.approx(W_CUT_M1, abs=1e-7)
        assert dn == pytest.approx(W_CUT_M1.conjugate(), abs=1e-7)

    def test_conjugate_example(self):
        z0 = complex(-1.0, 1.0)
        assert w0_complex(z0.conjugate()) == pytest.approx(w0_complex(z0).conjugate(), abs=1e-14)

    @given(st.floats(-1e6, 1e6), st.floats(1e-9, 1e6), st.booleans())
    def test_matches_mpmath_and_symmetry(self, re, im, flip):
        z = complex(re, -im if flip else im)
        w = w0_complex(z)
        assert abs(w.imag) < math.pi
        assert abs(w * cmath.exp(w) - z) <= 1e-12 * (1.0 + abs(z))
        assert abs(w - mp_w0(z)) <= 1e-12 * max(1.0, abs(w))
        assert abs(w0_complex(z.conjugate()) - w.conjugate()) <= 1e-12 * max(1.0, abs(w))

    def test_prime_at_zero(self):
        assert w0_prime_complex(0j) == 1.0


class TestCutLimit:
    def test_known(self):
        assert w0_cut_limit(-1.0, ABOVE) == pytest.approx(W_CUT_M1, abs=1e-15)
        assert w0_cut_limit(-2.0, ABOVE) == pytest.approx(W_CUT_M2, abs=1e-15)

    @pytest.mark.parametrize("x", sorted(IM_CUT))
    def test_imag_parts(self, x):
        assert w0_cut_limit(x).imag == pytest.approx(IM_CUT[x], rel=1e-14)

    def test_sides_conjugate(self):
        assert w0_cut_limit(-2.0, BELOW) == w0_cut_limit(-2.0, ABOVE).conjugate()

    def test_branch_point_continuity(self):
        w = w0_cut_limit(-INV_E - 1e-12)
        assert abs(w - (-1.0)) < 1e-5 and w.imag > 0

    def test_large_argument_expansion(self):
        x = -1e6
        L = complex(math.log(-x), math.pi)
        approx = L - cmath.log(L) + cmath.log(L) / L
        w = w0_cut_limit(x)
        assert abs(w - approx) < 0.05
        assert abs(w.imag - math.pi) < 0.25

    @pytest.mark.parametrize("x", [-INV_E, 0.0, 1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            w0_cut_limit(x)

    @given(st.floats(-1e12, -INV_E - 1e-9), st.floats(1.0, 100.0))
    def test_imag_monotone_in_range(self, x, factor):
        a = w0_cut_limit(x).imag
        b = w0_cut_limit(x * factor).imag
        assert 0.0 < a <= b < math.pi

    @given(st.floats(-1e12, -INV_E - 1e-12))
    def test_residual_and_mpmath(self, x):
        w = w0_cut_limit(x)
        assert abs(w * cmath.exp(w) - x) <= 1e-13 * (1.0 + abs(x))
        assert abs(w - mp_w0(x)) <= 1e-12 * max(1.0, abs(w))


class TestDerivatives:
    @pytest.mark.parametrize("t, expected", [(0.0, 1.0), (math.e, 1.0 / (2.0 * math.e))])
    def test_known(self, t, expected):
        assert w0_prime_real(t) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("t", [-INV_E, -1.0])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            w0_prime_real(t)

    def test_finite_difference_at_10(self):
        h = 1e-5
        fd = (w0_real(10 + h) - w0_real(10 - h)) / (2 * h)
        assert w0_prime_real(10.0) == pytest.approx(fd, abs=1e-8)

    @given(st.floats(0.1, 100.0))
    def test_finite_difference(self, t):
        h = 1e-4 * t
        fd = (w0_real(t + h) - w0_real(t - h)) / (2 * h)
        assert w0_prime_real(t) == pytest.approx(fd, rel=1e-7)

    @given(st.floats(0.0, 1e6), st.floats(0.0, 1e6))
    def test_positive_nonincreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert w0_prime_real(lo) >= w0_prime_real(hi) > 0

    def test_cut_prime_conjugate(self):
        assert w0_prime_cut_limit(-1.0, BELOW) == w0_prime_cut_limit(-1.0, ABOVE).conjugate()

    @pytest.mark.parametrize("x", [-1e3, -1e6, -1e12])
    def test_cut_prime_decays(self, x):
        assert abs(w0_prime_cut_limit(x)) <= 1.0 / abs(x)

    def test_cut_prime_matches_mpmath(self):
        for x in (-0.5, -1.0, -10.0, -1e4):
            w = mpmath.lambertw(x)
            ref = complex(w / (x * (1 + w)))
            assert w0_prime_cut_limit(x) == pytest.approx(ref, rel=1e-13)


class TestBranchSeries:
    def test_coefficients(self):
        # W = -1 + p - p^2/3 + 11 p^3/72 - 43 p^4/540 + ...
        assert BRANCH_SERIES[:5] == pytest.approx([-1.0, 1.0, -1 / 3, 11 / 72, -43 / 540], rel=1e-15)

    def test_right_of_branch_point(self):
        eps = 1e-8
        v = w0_prime_branch_series(-INV_E + eps)
        lead = math.sqrt(math.e / 2) * 1e4 - 2 * math.e / 3
        assert v.imag == 0.0
        assert v.real == pytest.approx(lead, rel=1e-6)
        assert v.real == pytest.approx(w0_prime_real(-INV_E + eps), rel=1e-7)

    def test_three_term_form(self):
        d = 1e-4
        three = w0_prime_branch_series(-INV_E + d, order=3).real
        x = math.sqrt(d)
        formula = math.sqrt(math.e / 2) / x - 2 * math.e / 3 + 11 * math.e**1.5 / (12 * math.sqrt(2)) * x
        assert three == pytest.approx(formula, rel=1e-12)

    def test_left_side_imaginary_part(self):
        eps = 1e-8
        v = w0_prime_branch_series(-INV_E - eps, ABOVE)
        assert v.imag == pytest.approx(-math.sqrt(math.e / 2) / math.sqrt(eps), rel=1e-3)
        assert w0_prime_branch_series(-INV_E - eps, BELOW) == v.conjugate()

    @pytest.mark.parametrize("s", [-INV_E, -INV_E + 2e-3, complex(-INV_E, 5e-3)])
    def test_domain(self, s):
        with pytest.raises(DomainError):
            w0_prime_branch_series(s)

    @given(st.floats(math.log(1e-6), math.log(1e-3)))
    def test_agrees_with_cut_limit(self, logd):
        x = -INV_E - math.exp(logd)
        for side in (ABOVE, BELOW):
            a = w0_prime_branch_series(x, side)
            b = w0_prime_cut_limit(x, side)
            assert abs(a - b) <= 1e-6 * abs(b)

    @given(st.floats(math.log(1e-6), math.log(1e-3)), st.floats(-3.0, 3.0))
    def test_agrees_off_axis(self, logr, angle):
        s = -INV_E + math.exp(logr) * cmath.exp(1j * angle)
        assert abs(w0_prime_branch_series(s) - w0_prime_complex(s)) <= 1e-6 * abs(w0_prime_complex(s))


class TestAsymptotic:
    def test_e_to_e(self):
        assert w0_asymptotic(math.e**math.e) == pytest.approx(math.e - 1.0, rel=1e-15)

    def test_within_two_percent(self):
        assert abs(w0_asymptotic(1e6) / w0_real(1e6) - 1.0) < 0.02

    def test_derivative_formula(self):
        assert w0_prime_asymptotic(10.0) == pytest.approx(0.1 - 1.0 / (10.0 + math.log(10.0)), rel=1e-15)

    @pytest.mark.parametrize("f, t", [(w0_asymptotic, 2.0), (w0_asymptotic, math.e), (w0_prime_asymptotic, 1.0)])
    def test_domain(self, f, t):
        with pytest.raises(DomainError):
            f(t)
