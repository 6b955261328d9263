"""Principal branch of the Lambert W function and its derivative.

W0 solves ``w * exp(w) = z`` with ``w >= -1`` on the real axis.  It is real
on ``[-1/e, inf)`` and has a square-root branch point at ``-1/e`` with the
cut taken along ``(-inf, -1/e]``.  The functions here cover

* real arguments (Halley iteration),
* complex arguments off the cut (complex Halley iteration),
* the one-sided limits onto the cut, computed by a one-dimensional solve
  for the imaginary part so that the side is selected exactly,
* the branch-point series of W0' and the two-term large-argument forms.

Complex numbers are plain Python ``complex``.  A limit onto the cut is
requested with :class:`BranchSide`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.special import zeta

from .errors import ConvergenceError, CutError, DomainError

E = math.e
INV_E = math.exp(-1.0)
# 1/e - INV_E; restores the digits of x + 1/e lost to rounding of INV_E
_INV_E_LO = -1.2428753672788363e-17
BRANCH_POINT = -INV_E
SERIES_SWITCH_RADIUS = 1e-3

_EPS = 2.220446049250313e-16


class BranchSide(str, enum.Enum):
    """Which one-sided limit onto the cut ``(-inf, -1/e]`` is meant."""

    ABOVE = "above"
    BELOW = "below"


@dataclass(frozen=True)
class SolveConfig:
    rel_tol: float = 1e-14
    max_iter: int = 50

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_SOLVE = SolveConfig()


def _branch_coefficients(n: int) -> list[Fraction]:
    # W0(z) = sum mu_k p^k, p = sqrt(2(e z + 1)); recurrence of Corless et al. (1996)
    mu = [Fraction(-1), Fraction(1)] + [Fraction(0)] * (n - 1)
    alpha = [Fraction(2), Fraction(-1)] + [Fraction(0)] * (n - 1)
    for k in range(2, n + 1):
        alpha[k] = sum((mu[j] * mu[k + 1 - j] for j in range(2, k)), Fraction(0))
        mu[k] = (
            Fraction(k - 1, k + 1) * (mu[k - 2] / 2 + alpha[k - 2] / 4)
            - alpha[k] / 2
            - mu[k - 1] / (k + 1)
        )
    return mu


BRANCH_SERIES = tuple(float(c) for c in _branch_coefficients(16))
# coefficients of the bracket in W0'(z) = (e/p) * sum_k c_k p^k
_PRIME_SERIES = tuple(k * BRANCH_SERIES[k] for k in range(1, len(BRANCH_SERIES)))

# h(b) = log(b/sin b) + 1 - b cot b = sum_n zeta(2n) (2 + 1/n) (b/pi)^(2n)
_H_COEF = tuple(float(zeta(2 * n)) * (2.0 + 1.0 / n) for n in range(1, 41))
# 1 - b cot b = sum_n 2 zeta(2n) (b/pi)^(2n)
_ONE_MINUS_BCOT = tuple(2.0 * float(zeta(2 * n)) for n in range(1, 41))
_SERIES_B_MAX = 1.5


def _poly(coefs, y):
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * y + c
    return acc * y


def _halley(w, z, cfg: SolveConfig):
    """Halley iteration for w*exp(w) = z; works for float and complex."""
    scale = abs(z)
    for _ in range(cfg.max_iter):
        ew = cmath.exp(w) if isinstance(w, complex) else math.exp(w)
        wew = w * ew
        f = wew - z
        if abs(f) <= 2.0 * _EPS * max(scale, abs(wew)):
            return w
        wp1 = w + 1.0
        if wp1 == 0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - dw
        if abs(dw) <= cfg.rel_tol * abs(w):
            return w
    residual = abs(w * (cmath.exp(w) if isinstance(w, complex) else math.exp(w)) - z)
    if residual <= cfg.rel_tol * (1.0 + scale):
        return w
    raise ConvergenceError(f"Halley iteration for W0({z!r}) did not converge")


def w0_real(x: float, cfg: SolveConfig = DEFAULT_SOLVE) -> float:
    """Principal branch W0(x) for real ``x >= -1/e``.

    Arguments below the branch point by at most ``cfg.rel_tol`` are clamped
    to it and return -1.
    """
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise DomainError(f"W0 undefined for x={x}")
    d = (x + INV_E) + _INV_E_LO
    if d < -cfg.rel_tol:
        raise DomainError(f"x={x} lies below the branch point -1/e")
    if d <= 0.0:
        return -1.0
    if x == 0.0:
        return 0.0
    if d < SERIES_SWITCH_RADIUS:
        # the residual w e^w - x cancels near the branch point; the series
        # in p = sqrt(2(ex + 1)) is exact to rounding here
        p = math.sqrt(2.0 * E * d)
        w = 0.0
        for c in reversed(BRANCH_SERIES):
            w = w * p + c
        return w
    if d < 0.3:
        p = math.sqrt(2.0 * E * d)
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    else:
        # Winitzki's global approximation
        lx = math.log1p(x)
        w = lx * (1.0 - math.log1p(lx) / (2.0 + lx))
    return float(_halley(w, x, cfg))


def w0_complex(z: complex, cfg: SolveConfig = DEFAULT_SOLVE) -> complex:
    """Principal branch W0(z) for complex ``z`` off the cut."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"W0 undefined for z={z}")
    if z.imag == 0.0:
        if z.real >= BRANCH_POINT:
            return complex(w0_real(z.real, cfg), 0.0)
        raise CutError(f"z={z} lies on the branch cut; use w0_cut_limit")
    if abs(z + INV_E) < 0.3:
        p = cmath.sqrt(2.0 * E * (z + INV_E))
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    elif -1.0 < z.real < 1.5 and abs(z.imag) < 1.0 and -2.5 * abs(z.imag) - 0.2 < z.real:
        w = z * (3.0 + z * (6.0 + z)) / (3.0 + z * (9.0 + 5.0 * z))
    else:
        w = cmath.log(z)
        if abs(z) > 3.0:
            w -= cmath.log(w)
    w = _halley(w, z, cfg)
    if abs(w.imag) >= math.pi:
        raise ConvergenceError(f"iteration left the principal branch at z={z}")
    return w


def w0_prime_complex(z: complex, cfg: SolveConfig = DEFAULT_SOLVE) -> complex:
    """W0'(z) = W0(z) / (z (1 + W0(z))) off the cut, with W0'(0) = 1."""
    z = complex(z)
    if z == 0:
        return complex(1.0, 0.0)
    w = w0_complex(z, cfg)
    return w / (z * (1.0 + w))


def _h_and_slope(b):
    """h(b) = log(b/sin b) + 1 - b cot b and dh/db on (0, pi)."""
    if b <= _SERIES_B_MAX:
        y = (b / math.pi) ** 2
        h = _poly(_H_COEF, y)
        dh = 0.0
        for n in range(len(_H_COEF), 0, -1):
            dh = dh * y + 2 * n * _H_COEF[n - 1]
        return h, dh * y / b
    s, c = math.sin(b), math.cos(b)
    cot = c / s
    return math.log(b / s) + 1.0 - b * cot, 1.0 / b - 2.0 * cot + b / (s * s)


def _one_minus_bcot(b):
    if b <= _SERIES_B_MAX:
        return _poly(_ONE_MINUS_BCOT, (b / math.pi) ** 2)
    return 1.0 - b / math.tan(b)


def _cut_imag(target: float) -> float:
    """Solve h(b) = target for b in (0, pi), where target = log(e|x|) > 0.

    On the upper edge of the cut, W0(x + i0) = a + i b with a = -b cot b and
    |x| = b exp(a) / sin b, so log(e|x|) = h(b).  h increases from 0 to inf.
    """
    if target < 1.0:
        b = math.sqrt(2.0 * target)
    else:
        lg = complex(target - 1.0, math.pi)
        b = (lg - cmath.log(lg)).imag
    lo, hi = 0.0, math.pi
    b = min(max(b, 1e-300), math.pi * (1.0 - 1e-16))
    for _ in range(200):
        h, dh = _h_and_slope(b)
        g = h - target
        if g > 0:
            hi = b
        else:
            lo = b
        step = g / dh
        b_new = b - step
        if not lo < b_new < hi:
            b_new = 0.5 * (lo + hi)
        if abs(b_new - b) <= 4.0 * _EPS * b_new:
            return b_new
        b = b_new
    return b


def _cut_point(x: float) -> tuple[float, float]:
    """(b, 1 + Re W0) on the upper edge of the cut at real x < -1/e."""
    if x > -1.0:
        b = _cut_imag(math.log1p(-E * ((x + INV_E) + _INV_E_LO)))
        return b, _one_minus_bcot(b)
    b = _cut_imag(1.0 + math.log(-x))
    # a = -b cot b amplifies the rounding of b near pi; polish w directly
    w = complex(-b / math.tan(b), b)
    for _ in range(2):
        ew = cmath.exp(w)
        w -= (w * ew - x) / (ew * (1.0 + w))
    return w.imag, 1.0 + w.real


def w0_cut_limit(
    x: float, side: BranchSide = BranchSide.ABOVE, cfg: SolveConfig = DEFAULT_SOLVE
) -> complex:
    """One-sided limit W0(x +/- i0) for real ``x < -1/e``.

    ``side=ABOVE`` gives the value with imaginary part in (0, pi); the lower
    limit is its complex conjugate.
    """
    x = float(x)
    if not x < BRANCH_POINT or math.isinf(x):
        raise DomainError(f"cut limit requires x < -1/e, got {x}")
    b, one_plus_a = _cut_point(x)
    w = complex(one_plus_a - 1.0, b)
    residual = abs(w * cmath.exp(w) - x)
    if residual > max(cfg.rel_tol, 1e-13) * (1.0 + abs(x)):
        raise ConvergenceError(f"cut-limit solve at x={x} left residual {residual:.3g}")
    return w if BranchSide(side) is BranchSide.ABOVE else w.conjugate()


def w0_prime_real(t: float, cfg: SolveConfig = DEFAULT_SOLVE) -> float:
    """W0'(t) = W0(t) / (t (1 + W0(t))) for ``t > -1/e``; exactly 1 at t = 0."""
    t = float(t)
    if not t > BRANCH_POINT:
        raise DomainError(f"W0' requires t > -1/e, got {t}")
    if t == 0.0:
        return 1.0
    d = (t + INV_E) + _INV_E_LO
    if d < SERIES_SWITCH_RADIUS:
        return _branch_series_offset(d, BranchSide.ABOVE, len(_PRIME_SERIES), SERIES_SWITCH_RADIUS).real
    w = w0_real(t, cfg)
    return w / (t * (1.0 + w))


def w0_prime_cut_limit(x: float, side: BranchSide = BranchSide.ABOVE) -> complex:
    """One-sided limit of W0'(x +/- i0) for real ``x < -1/e``.

    ``1 + W0`` is taken straight from the imaginary-part solve, so the
    quotient stays accurate close to the branch point.
    """
    x = float(x)
    if not x < BRANCH_POINT or math.isinf(x):
        raise DomainError(f"cut limit requires x < -1/e, got {x}")
    b, one_plus_a = _cut_point(x)
    w = complex(one_plus_a - 1.0, b)
    value = w / (x * complex(one_plus_a, b))
    return value if BranchSide(side) is BranchSide.ABOVE else value.conjugate()


def w0_prime_branch_series(
    s: complex,
    side: BranchSide = BranchSide.ABOVE,
    order: int = len(_PRIME_SERIES),
    radius: float = SERIES_SWITCH_RADIUS,
) -> complex:
    """Power series of W0' about the branch point in powers of sqrt(s + 1/e).

    ``order`` terms are summed; ``order=3`` is the classical truncation
    ``sqrt(e/2)/sqrt(d) - 2e/3 + 11 e^(3/2) sqrt(d) / (12 sqrt 2)`` with
    ``d = s + 1/e``.  For real ``s < -1/e`` the square root follows ``side``.
    """
    s = complex(s)
    if not 1 <= order <= len(_PRIME_SERIES):
        raise ValueError(f"order must be in [1, {len(_PRIME_SERIES)}]")
    if s == BRANCH_POINT:
        raise DomainError("branch series is singular at s = -1/e")
    d = (s + INV_E) + _INV_E_LO
    return _branch_series_offset(d, side, order, radius, real_axis=s.imag == 0.0)


def _branch_series_offset(d, side, order, radius, real_axis=True):
    d = complex(d)
    if d == 0:
        raise DomainError("branch series is singular at s = -1/e")
    if abs(d) > radius * (1.0 + 1e-12):
        raise DomainError(f"|s + 1/e| = {abs(d):.3g} exceeds the series radius {radius}")
    if real_axis and d.real < 0:
        p = complex(0.0, math.sqrt(2.0 * E * -d.real))
        if BranchSide(side) is BranchSide.BELOW:
            p = p.conjugate()
    else:
        p = cmath.sqrt(2.0 * E * d)
    acc = 0j
    for c in reversed(_PRIME_SERIES[:order]):
        acc = acc * p + c
    return E * acc / p


def w0_asymptotic(t: float) -> float:
    """Two-term large-argument form log t - log log t, for ``t > e``."""
    t = float(t)
    if not t > E:
        raise DomainError(f"log log t must be positive; need t > e, got {t}")
    lt = math.log(t)
    return lt - math.log(lt)


def w0_prime_asymptotic(t: float) -> float:
    """Two-term large-argument form 1/t - 1/(t + log t), for ``t > 1``."""
    t = float(t)
    if not t > 1.0:
        raise DomainError(f"log t must be positive; need t > 1, got {t}")
    return 1.0 / t - 1.0 / (t + math.log(t))
