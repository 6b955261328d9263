"""The Lambert-W creep model of linear viscoelasticity.

The dimensionless creep function is ``psi(t) = W0(t)``.  Its rate ``psi'``
is completely monotone and also a Stieltjes function, so it carries two
non-negative spectra::

    psi'(t) = int_0^inf exp(-r t) K(r) dr = int_0^inf rho(u) / (t + u) du
    K(r)    = int_0^inf exp(-r u) rho(u) du
    rho(u)  = -(1/pi) Im W0'(-u + i0)          (zero for u <= 1/e)
    H(tau)  = K(1/tau) / tau**2

The relaxation function ``phi`` solves
``phi(t) = 1 - q int_0^t psi'(t') phi(t - t') dt'`` and is computed both by
inverting ``1 / (s (1 + s psi~(s)))`` and by time stepping the convolution
equation.  The creep law is pluggable (:class:`CreepFunction`) so the linear
law ``psi(t) = t``, whose relaxation is exactly ``exp(-t)``, can drive the
same pipelines.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, InversionInstability, StepTooCoarse
from .lambertw import (
    INV_E,
    _INV_E_LO,
    SERIES_SWITCH_RADIUS,
    BranchSide,
    _branch_series_offset,
    _cut_imag,
    _one_minus_bcot,
    w0_prime_complex,
    w0_prime_cut_limit,
    w0_prime_real,
    w0_real,
)
from .transforms import (
    DEFAULT_INVERSION,
    Domain,
    InversionConfig,
    QuadratureConfig,
    QuadResult,
    TransformFn,
    integrate_semi_infinite,
    invert_with_spread,
    laplace,
    stieltjes,
)

# The relaxation inversion amplifies transform errors by the Stehfest
# weights (~1e9 at 16 terms), so the creep-rate transform is integrated
# close to machine precision.
TRANSFORM_QUAD = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-13)
SPECTRAL_QUAD = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10)
_RAY_ABS_FLOOR = 1e-12


# --------------------------------------------------------------------------
# creep law


@dataclass(frozen=True)
class CreepFunction:
    """A creep law: ``psi`` with ``psi(0) = 0`` and its rate ``psi_prime``.

    ``psi_prime_complex`` extends the rate off the real axis; without it the
    creep-rate transform is only available for real ``s > 0``.
    """

    name: str
    psi: Callable[[float], float]
    psi_prime: Callable[[float], float]
    psi_prime_complex: Optional[Callable[[complex], complex]] = None

    def scaled(self, q: float) -> "CreepFunction":
        if q == 1.0:
            return self
        pc = self.psi_prime_complex
        return CreepFunction(
            f"{self.name}*{q:g}",
            lambda t: q * self.psi(t),
            lambda t: q * self.psi_prime(t),
            None if pc is None else (lambda z: q * pc(z)),
        )


def psi(t: float) -> float:
    """Dimensionless creep ``psi(t) = W0(t)`` for ``t >= 0``."""
    if not t >= 0:
        raise DomainError(f"psi requires t >= 0, got {t}")
    return w0_real(t)


def psi_prime(t: float) -> float:
    """Creep rate ``psi'(t) = W0'(t)`` for ``t >= 0``; equals 1 at t = 0."""
    if not t >= 0:
        raise DomainError(f"psi_prime requires t >= 0, got {t}")
    return w0_prime_real(t)


LAMBERT = CreepFunction("lambert", psi, psi_prime, w0_prime_complex)
LINEAR_TEST_MODEL = CreepFunction("linear", lambda t: t, lambda t: 1.0, lambda z: 1.0 + 0j)
MODELS = {"lambert": LAMBERT, "linear": LINEAR_TEST_MODEL}


# --------------------------------------------------------------------------
# spectra


class SpectralSample(NamedTuple):
    abscissa: float
    value: float
    est_error: float


def _rho_offset(d: float) -> float:
    """rho(1/e + d), evaluated from the offset so that tiny d keeps its digits."""
    if d <= 0.0:
        return 0.0
    if d < SERIES_SWITCH_RADIUS:
        return -_branch_series_offset(-d, BranchSide.ABOVE, 14, SERIES_SWITCH_RADIUS).imag / math.pi
    return -w0_prime_cut_limit(-(INV_E + d), BranchSide.ABOVE).imag / math.pi


def rho(u: float) -> float:
    """Spectral density ``rho(u) = -(1/pi) Im W0'(-u + i0)`` for ``u > 0``.

    Zero on ``(0, 1/e]`` (the value at ``1/e`` itself is taken as 0), and
    unbounded like ``1/sqrt(u - 1/e)`` just above it.
    """
    u = float(u)
    if not u > 0:
        raise DomainError(f"rho requires u > 0, got {u}")
    d = u - INV_E
    # the float nearest 1/e is taken as the branch point itself
    return _rho_offset(d - _INV_E_LO) if d > 0 else 0.0


def _u_rho_at_log(x: float) -> float:
    """``exp(x) * rho(1/e + exp(x))`` computed from ``x`` without overflow.

    On the upper edge of the cut ``W0 = a + i b`` and
    ``u rho(u) = b / (pi ((1 + a)**2 + b**2))``.
    """
    if x > 30.0:
        log_u = x + math.log1p(math.exp(-x) * INV_E)
        jac = 1.0 / (1.0 + INV_E * math.exp(-x))
        b = _cut_imag(1.0 + log_u)
        one_plus_a = _one_minus_bcot(b)
        return jac * b / (math.pi * (one_plus_a * one_plus_a + b * b))
    ex = math.exp(x)
    return ex * _rho_offset(ex)


def _rho_tail(upper: float) -> tuple[float, float]:
    """Closed-form tail of int rho over [U, inf) from rho ~ 1/(u((1+ln u)^2 + pi^2))."""
    lu = math.log(upper)
    value = math.atan(math.pi / (1.0 + lu)) / math.pi
    # the leading-order form has relative error of order log(log U)/log U
    return value, 2.0 * value * math.log(lu) / lu


def _rho_weighted_tail(upper: float) -> tuple[float, float]:
    """Bound for tails of rho(u)/(t+u): at most 1/(U((1+ln U)^2 + pi^2))."""
    lu = math.log(upper)
    bound = 1.0 / (upper * ((1.0 + lu) ** 2 + math.pi**2))
    return bound, bound


def integrate_rho(
    cfg: QuadratureConfig = SPECTRAL_QUAD,
    weight: Optional[Callable[[float], float]] = None,
    *,
    cutoff: Optional[float] = None,
) -> QuadResult:
    """``int_{1/e}^inf rho(u) weight(u) du`` with the analytic tail of rho.

    ``weight`` must be bounded and evaluable up to ``cfg.truncation_point``
    (or ``cutoff``); ``None`` means 1.
    """
    if weight is None:
        return integrate_semi_infinite(
            rho, INV_E, cfg, near=_rho_offset, log_integrand=_u_rho_at_log, tail=_rho_tail
        )

    def near(d):
        return _rho_offset(d) * weight(INV_E + d)

    def log_integrand(x):
        return _u_rho_at_log(x) * weight(INV_E + math.exp(x))

    return integrate_semi_infinite(
        lambda u: rho(u) * weight(u),
        INV_E,
        cfg,
        near=near,
        log_integrand=log_integrand,
        cutoff=cutoff,
        tail=_rho_weighted_tail,
    )


def spectrum_K(r: float, cfg: QuadratureConfig = SPECTRAL_QUAD) -> SpectralSample:
    """Frequency spectrum ``K(r) = int_0^inf exp(-r u) rho(u) du``; K(0) = 1."""
    r = float(r)
    if not r >= 0:
        raise DomainError(f"spectrum_K requires r >= 0, got {r}")
    if r == 0.0:
        res = integrate_rho(cfg)
    else:
        # exp(-r u) < 2e-22 beyond u = 1/e + 50/r
        res = integrate_rho(cfg, lambda u: math.exp(-r * u), cutoff=INV_E + 50.0 / r)
    return SpectralSample(r, res.value, res.error)


def spectrum_H(tau: float, cfg: QuadratureConfig = SPECTRAL_QUAD) -> SpectralSample:
    """Time spectrum ``H(tau) = K(1/tau) / tau**2`` for ``tau > 0``."""
    tau = float(tau)
    if not tau > 0:
        raise DomainError(f"spectrum_H requires tau > 0, got {tau}")
    k = spectrum_K(1.0 / tau, cfg)
    return SpectralSample(tau, k.value / tau**2, k.est_error / tau**2)


def psi_prime_from_rho_result(t: float, cfg: QuadratureConfig = SPECTRAL_QUAD) -> QuadResult:
    t = float(t)
    if not t >= 0:
        raise DomainError(f"psi_prime_from_rho requires t >= 0, got {t}")
    return stieltjes(
        rho,
        t,
        cfg,
        a=INV_E,
        near=_rho_offset,
        log_integrand=_u_rho_at_log,
        tail=_rho_weighted_tail,
    )


def psi_prime_from_rho(t: float, cfg: QuadratureConfig = SPECTRAL_QUAD) -> float:
    """Creep rate rebuilt from its spectrum: ``int_0^inf rho(u) / (t + u) du``."""
    return psi_prime_from_rho_result(t, cfg).value


# --------------------------------------------------------------------------
# creep-rate transform s psi~(s) = L[psi'](s)


def creep_rate_transform(
    s, model: CreepFunction = LAMBERT, cfg: QuadratureConfig = TRANSFORM_QUAD
):
    """``s psi~(s) = int_0^inf exp(-s t) psi'(t) dt``.

    Real ``s > 0`` uses the real integral.  Complex ``s`` (including the
    one-sided limits ``complex(-r, +/-0.0)``) is reached by rotating the
    integration ray to ``t = tau exp(i theta)`` with ``theta = -3/4 arg s``,
    which keeps ``Re(s t) > 0`` and never crosses the cut of ``psi'``.
    """
    if not isinstance(s, complex):
        return laplace(model.psi_prime, s, cfg).value
    if s.imag == 0.0 and s.real > 0 and math.copysign(1.0, s.imag) > 0:
        return complex(laplace(model.psi_prime, s.real, cfg).value, 0.0)
    if model.psi_prime_complex is None:
        raise DomainError(f"creep law {model.name!r} has no complex extension")
    if s == 0:
        raise DomainError("creep-rate transform is singular at s = 0")
    theta = -0.75 * cmath.phase(s)
    ray = cmath.exp(1j * theta)
    rate = (s * ray).real
    sr = s * ray
    pc = model.psi_prime_complex

    def integrand(tau):
        return ray * cmath.exp(-sr * tau) * pc(ray * tau)

    # complex quadrature cannot resolve below ~1e-13; contour inversions
    # do not amplify that floor
    ray_cfg = replace(cfg, abs_tol=max(cfg.abs_tol, _RAY_ABS_FLOOR))
    res = integrate_semi_infinite(
        integrand, 0.0, ray_cfg, scale=1.0 / rate, cutoff=50.0 / rate, complex_func=True
    )
    return res.value


def creep_rate_transform_fn(
    model: CreepFunction = LAMBERT, cfg: QuadratureConfig = TRANSFORM_QUAD
) -> TransformFn:
    domain = Domain.SECTORIAL if model.psi_prime_complex is not None else Domain.REAL_AXIS
    return TransformFn(lambda s: creep_rate_transform(s, model, cfg), domain)


def relaxation_transform_fn(
    model: CreepFunction = LAMBERT, cfg: QuadratureConfig = TRANSFORM_QUAD
) -> TransformFn:
    """``phi~(s) = 1 / (s (1 + s psi~(s)))``, memoised per call site."""
    cache: dict = {}

    def F(s):
        key = (s.real, s.imag, math.copysign(1.0, s.imag)) if isinstance(s, complex) else s
        if key not in cache:
            cache[key] = 1.0 / (s * (1.0 + creep_rate_transform(s, model, cfg)))
        return cache[key]

    domain = Domain.SECTORIAL if model.psi_prime_complex is not None else Domain.REAL_AXIS
    return TransformFn(F, domain)


# --------------------------------------------------------------------------
# relaxation function


class PhiRoute(str, enum.Enum):
    LAPLACE_INVERSION = "laplace_inversion"
    VOLTERRA_TIME_DOMAIN = "volterra_time_domain"


@dataclass
class PhiGrid:
    """Relaxation function sampled on a nondecreasing grid starting at 0."""

    times: np.ndarray
    values: np.ndarray
    route: PhiRoute
    flags: np.ndarray = field(default=None)
    spread: np.ndarray = field(default=None)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.times)
        if self.flags is None:
            self.flags = np.zeros(n, dtype=bool)
        if self.spread is None:
            self.spread = np.zeros(n)


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise DomainError("time grid must be a non-empty 1-d sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("time grid must be nonnegative and nondecreasing")
    return times


def phi_laplace(
    times,
    inv_cfg: InversionConfig = DEFAULT_INVERSION,
    quad_cfg: QuadratureConfig = TRANSFORM_QUAD,
    model: CreepFunction = LAMBERT,
) -> PhiGrid:
    """Relaxation function by numerical inversion of ``1/(s(1 + s psi~(s)))``.

    ``phi(0) = 1`` is the exact initial value; inversion is used for t > 0.
    Points whose lower-order inversion differs by more than
    ``inv_cfg.instability_tol`` are flagged.
    """
    times = _check_times(times)
    F = relaxation_transform_fn(model, quad_cfg)
    values = np.empty_like(times)
    spread = np.zeros_like(times)
    for i, t in enumerate(times):
        if t == 0.0:
            values[i] = 1.0
        else:
            values[i], spread[i] = invert_with_spread(F, t, inv_cfg)
    flags = spread > inv_cfg.instability_tol * np.maximum(1.0, np.abs(values))
    if flags.any():
        warnings.warn(
            f"{int(flags.sum())} relaxation points flagged as unstable", InversionInstability, stacklevel=2
        )
    return PhiGrid(times, values, PhiRoute.LAPLACE_INVERSION, flags, spread)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _volterra_solve(t_max: float, steps: int, model: CreepFunction) -> np.ndarray:
    h = t_max / steps
    # product-trapezoidal weights: psi' integrated exactly (to Gauss-Legendre
    # accuracy) against the hat functions of piecewise-linear phi
    frac = 0.5 * (_GL_NODES + 1.0)
    gw = 0.5 * _GL_WEIGHTS
    taus = (np.arange(steps)[:, None] + frac[None, :]) * h
    dpsi = np.array([[model.psi_prime(tau) for tau in row] for row in taus])
    A = h * (dpsi * (1.0 - frac) * gw).sum(axis=1)
    B = h * (dpsi * frac * gw).sum(axis=1)

    phi = np.empty(steps + 1)
    phi[0] = 1.0
    for n in range(1, steps + 1):
        # sum_k A_k phi_{n-k} (k >= 1) + B_k phi_{n-k-1} (k >= 0)
        conv = A[1:n] @ phi[n - 1 : 0 : -1] + B[:n] @ phi[n - 1 :: -1]
        phi[n] = (1.0 - conv) / (1.0 + A[0])
    return phi


def phi_volterra(
    t_max: float,
    steps: int,
    model: CreepFunction = LAMBERT,
    *,
    extrapolate: bool = True,
    check_tol: float = 1e-4,
) -> PhiGrid:
    """Relaxation function from the convolution equation on a uniform grid.

    The equation ``phi(t) = 1 - int_0^t psi'(t') phi(t - t') dt'`` is
    stepped with product-trapezoidal weights (second order).  The solve is
    repeated at half the step; with ``extrapolate`` the two are combined by
    Richardson extrapolation.  A :class:`StepTooCoarse` warning is raised
    when the two solves differ by more than ``check_tol``.
    """
    t_max = float(t_max)
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if steps < 2:
        raise DomainError(f"steps must be >= 2, got {steps}")
    coarse = _volterra_solve(t_max, steps, model)
    fine = _volterra_solve(t_max, 2 * steps, model)[::2]
    change = float(np.max(np.abs(fine - coarse)))
    if change > check_tol:
        warnings.warn(
            f"halving the step changed phi by {change:.3g} (> {check_tol:g})", StepTooCoarse, stacklevel=2
        )
    values = (4.0 * fine - coarse) / 3.0 if extrapolate else coarse
    values[0] = 1.0
    times = np.linspace(0.0, t_max, steps + 1)
    spread = np.abs(fine - coarse) / 3.0 if extrapolate else np.abs(fine - coarse)
    return PhiGrid(times, values, PhiRoute.VOLTERRA_TIME_DOMAIN, spread=spread)


# --------------------------------------------------------------------------
# dimensional material functions


@dataclass(frozen=True)
class CreepModel:
    """Dimensional wrapper: ``J(t) = J0 (1 + q psi(t))``, ``G(t) = G0 phi(t)``."""

    J0: float
    q: float = 1.0

    def __post_init__(self):
        if not self.J0 > 0:
            raise DomainError("J0 must be positive")
        if not self.q > 0:
            raise DomainError("q must be positive")

    @property
    def G0(self) -> float:
        return 1.0 / self.J0


def creep_compliance(model: CreepModel, t):
    """Creep compliance J(t); accepts a scalar or an array of ``t >= 0``."""
    if np.ndim(t) == 0:
        return model.J0 * (1.0 + model.q * psi(float(t)))
    return np.array([creep_compliance(model, x) for x in np.asarray(t, dtype=float)])


def relaxation_modulus(
    model: CreepModel,
    t,
    inv_cfg: InversionConfig = DEFAULT_INVERSION,
    quad_cfg: QuadratureConfig = TRANSFORM_QUAD,
):
    """Relaxation modulus G(t) = G0 phi(t), phi by Laplace inversion.

    For ``q != 1`` the convolution equation is solved with ``q psi``.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(times)
    grid = phi_laplace(times[order], inv_cfg, quad_cfg, LAMBERT.scaled(model.q))
    out = np.empty_like(times)
    out[order] = model.G0 * grid.values
    return float(out[0]) if scalar else out
