"""Sample-based audits of complete monotonicity and the model's identities.

A function is completely monotone (CM) when ``(-1)^k f^(k) >= 0`` for all
``k``.  From samples on a uniform grid the observable surrogate is the sign
of forward differences: for a CM function ``(-1)^k Delta_h^k f >= 0``
exactly, so any negative value beyond round-off is a genuine violation.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .creep import (
    LINEAR_TEST_MODEL,
    SPECTRAL_QUAD,
    TRANSFORM_QUAD,
    creep_rate_transform_fn,
    integrate_rho,
    phi_laplace,
    phi_volterra,
    psi,
    psi_prime,
    psi_prime_from_rho,
    spectrum_H,
    spectrum_K,
)
from .errors import GridError, GridTooCoarse, NumericalWarning
from .lambertw import BranchSide, w0_cut_limit
from .transforms import (
    DEFAULT_INVERSION,
    InversionConfig,
    InversionMethod,
    QuadratureConfig,
    titchmarsh_inverse,
)

MAX_AUDIT_ORDER = 8
_EPS = np.finfo(float).eps


@dataclass
class MonotonicityAudit:
    function_id: str
    grid: np.ndarray
    max_order: int
    noise_floor: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def first_violation_order(self) -> Optional[int]:
        return min((v[0] for v in self.violations), default=None)


def _check_grid(grid, max_order: int) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if not 1 <= max_order <= MAX_AUDIT_ORDER:
        raise GridError(f"max_order must lie in [1, {MAX_AUDIT_ORDER}], got {max_order}")
    if grid.ndim != 1 or len(grid) < 2:
        raise GridTooCoarse("grid needs at least two points")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise GridError("grid must be strictly increasing")
    if np.ptp(steps) > 1e-9 * steps.mean():
        raise GridError("grid must be uniform")
    if len(grid) <= max_order + 1:
        raise GridTooCoarse(f"{len(grid)} points cannot resolve order {max_order}")
    return grid


def audit_grid(lo: float, hi: float, per_decade: int = 64) -> np.ndarray:
    """Uniform grid on ``[lo, hi]`` with as many points as ``per_decade`` per decade."""
    if not 0 < lo < hi:
        raise GridError("audit grid needs 0 < lo < hi")
    count = max(2, int(math.ceil(per_decade * math.log10(hi / lo)))) + 1
    return np.linspace(lo, hi, count)


def default_noise_floor(values: np.ndarray, max_order: int) -> float:
    """Round-off bound for differences up to ``max_order`` of the samples.

    Each difference order can at most double the absolute error, and samples
    from quadrature carry a few hundred ulps.
    """
    return 256 * _EPS * float(np.max(np.abs(values))) * 2.0**max_order


def _alternation(function_id, grid, values, max_order, noise_floor, order_shift=0):
    audit = MonotonicityAudit(function_id, grid, max_order + order_shift, noise_floor)
    d = values
    for k in range(max_order + 1):
        signed = d if k % 2 == 0 else -d
        for i in np.flatnonzero(signed < -noise_floor):
            audit.violations.append((k + order_shift, float(grid[i]), float(signed[i])))
        d = np.diff(d)
    return audit


def _sample(f, grid):
    return np.array([float(f(x)) for x in grid])


def check_cm(
    f: Callable[[float], float],
    grid: Sequence[float],
    max_order: int = 6,
    noise_floor: Optional[float] = None,
    function_id: Optional[str] = None,
) -> MonotonicityAudit:
    """Check that ``(-1)^k Delta^k f >= -noise_floor`` for ``k <= max_order``.

    Parameters
    ----------
    f : callable
        Function evaluated pointwise on ``grid``.
    grid : sequence of float
        Strictly increasing uniform grid.
    noise_floor : float, optional
        Absolute slack on the signed differences; estimated from the sample
        magnitude when omitted.

    Returns
    -------
    MonotonicityAudit
        Violations as ``(order, point, signed difference)`` triples.
    """
    grid = _check_grid(grid, max_order)
    values = _sample(f, grid)
    if noise_floor is None:
        noise_floor = default_noise_floor(values, max_order)
    return _alternation(function_id or getattr(f, "__name__", "f"), grid, values, max_order, noise_floor)


def check_bernstein(
    f: Callable[[float], float],
    grid: Sequence[float],
    max_order: int = 6,
    noise_floor: Optional[float] = None,
    function_id: Optional[str] = None,
) -> MonotonicityAudit:
    """Check that ``f >= 0`` and that its first difference quotient is CM.

    Violation orders refer to derivatives of ``f`` itself, so a failure of
    the quotient at order ``k`` is reported at order ``k + 1``.
    """
    grid = _check_grid(grid, max_order)
    values = _sample(f, grid)
    h = grid[1] - grid[0]
    if noise_floor is None:
        noise_floor = default_noise_floor(values, max_order) / h
    fid = function_id or getattr(f, "__name__", "f")
    audit = MonotonicityAudit(fid, grid, max_order, noise_floor)
    for i in np.flatnonzero(values < -noise_floor):
        audit.violations.append((0, float(grid[i]), float(values[i])))
    quotient = np.diff(values) / h
    inner = _alternation(fid, grid[:-1], quotient, max_order - 1, noise_floor, order_shift=1)
    audit.violations.extend(inner.violations)
    return audit


# --------------------------------------------------------------------------
# report


@dataclass
class Check:
    name: str
    anchor: str
    computed: float
    target: float
    tol: float
    passed: bool
    route: str = ""
    note: str = ""
    seconds: float = 0.0


REPORT_SCHEMA = {
    "type": "object",
    "required": ["checks", "passed"],
    "properties": {
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "anchor", "computed", "target", "tol", "pass"],
                "properties": {
                    "name": {"type": "string"},
                    "anchor": {"type": "string", "minLength": 1},
                    "computed": {"type": ["number", "null"]},
                    "target": {"type": "number"},
                    "tol": {"type": "number", "minimum": 0},
                    "pass": {"type": "boolean"},
                    "route": {"type": "string"},
                    "note": {"type": "string"},
                },
            },
        },
    },
}


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = (
                f"{status} {c.name}: computed={c.computed:.10g} target={c.target:.10g} "
                f"tol={c.tol:.3g} route={c.route} [{c.anchor}]"
            )
            if c.note:
                line += f" ({c.note})"
            lines.append(line)
        lines.append(f"{'PASS' if self.passed else 'FAIL'} overall: {len(self.checks) - len(self.failures())}/{len(self.checks)}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        checks = []
        for c in self.checks:
            d = asdict(c)
            d["pass"] = d.pop("passed")
            d.pop("seconds")
            if not math.isfinite(d["computed"]):
                d["computed"] = None
            checks.append(d)
        return {"passed": self.passed, "checks": checks}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# identity suite

DEFAULT_TOLERANCES = {
    "integral_rho": 1e-4,
    "integral_rho_over_u": 1e-4,
    "K_at_zero": 1e-4,
    "phi_at_zero": 0.0,
    "psi_prime_at_zero": 1e-12,
    "im_w0_large_probe": 0.25,
    "roundtrip_rho": 1e-3,
    "phi_cross_route": 1e-4,
    "linear_pipeline": 1e-6,
    "titchmarsh_vs_K": 1e-4,
    "spectral_consistency": 1e-3,
    "cm_psi_prime": 0.0,
    "bernstein_psi": 0.0,
    "cm_K": 0.0,
    "H_not_cm": 0.0,
}


def _run(report, name, anchor, target, tol, fn, route="", note=""):
    """Evaluate ``fn`` and record a check; failures never abort the suite."""
    start = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NumericalWarning)
            computed = float(fn())
        ok = abs(computed - target) <= tol
    except Exception as exc:  # recorded as a failed check
        computed, ok = math.nan, False
        note = f"{note}; {type(exc).__name__}: {exc}" if note else f"{type(exc).__name__}: {exc}"
    report.checks.append(
        Check(name, anchor, computed, target, tol, ok, route, note, time.perf_counter() - start)
    )


def roundtrip_errors(times, cfg: QuadratureConfig = SPECTRAL_QUAD) -> np.ndarray:
    """Relative errors of the rate rebuilt from rho against the direct rate."""
    return np.array(
        [abs(psi_prime_from_rho(t, cfg) - psi_prime(t)) / psi_prime(t) for t in times]
    )


def phi_cross_route(t_max: float = 10.0, steps: int = 200, inv_cfg=DEFAULT_INVERSION, quad_cfg=TRANSFORM_QUAD):
    vol = phi_volterra(t_max, steps)
    lap = phi_laplace(vol.times, inv_cfg, quad_cfg)
    return lap, vol


def linear_pipeline_error(quad_cfg: QuadratureConfig = TRANSFORM_QUAD) -> float:
    times = np.linspace(0.1, 10.0, 100)
    grid = phi_laplace(times, InversionConfig(method=InversionMethod.TALBOT), quad_cfg, LINEAR_TEST_MODEL)
    return float(np.max(np.abs(grid.values - np.exp(-times))))


def titchmarsh_vs_K(rs=(0.5, 1.0, 2.0, 5.0), cfg: QuadratureConfig = SPECTRAL_QUAD) -> float:
    F = creep_rate_transform_fn()
    return max(abs(titchmarsh_inverse(F, r) - spectrum_K(r, cfg).value) for r in rs)


def spectral_consistency(ts=(0.5, 1.0, 5.0), cfg: QuadratureConfig = SPECTRAL_QUAD) -> float:
    """Largest gap between psi'(t) and its K and H representations."""
    from scipy.integrate import quad

    worst = 0.0
    for t in ts:
        # K decays like exp(-r/e); cap the range where exp(-r t) K(r) < 1e-12
        k_int = quad(lambda r: math.exp(-r * t) * spectrum_K(r, cfg).value, 0.0, 60.0 / t, epsrel=1e-8, limit=200)[0]
        h_int = quad(
            lambda tau: math.exp(-t / tau) * spectrum_H(tau, cfg).value, t / 60.0, math.inf, epsrel=1e-8, limit=200
        )[0]
        exact = psi_prime(t)
        worst = max(worst, abs(k_int - exact), abs(h_int - exact))
    return worst


def run_identity_suite(
    quad_cfg: QuadratureConfig = SPECTRAL_QUAD,
    inv_cfg: InversionConfig = DEFAULT_INVERSION,
    tolerances: Optional[dict] = None,
    *,
    include_slow: bool = True,
) -> ValidationReport:
    """Evaluate every identity and audit; returns a report, never raises on a failed check.

    ``tolerances`` overrides entries of :data:`DEFAULT_TOLERANCES` by name.
    ``include_slow=False`` skips the spectral-consistency double integral.
    """
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (tolerances or {}).items():
        if key not in tol:
            raise KeyError(f"unknown check {key!r}")
        if not value >= 0:
            raise ValueError(f"tolerance for {key!r} must be nonnegative")
        tol[key] = float(value)

    report = ValidationReport()
    _run(report, "integral_rho", "int_0^inf rho(u) du = 1", 1.0, tol["integral_rho"],
         lambda: integrate_rho(quad_cfg).value, "quadrature+analytic tail")
    _run(report, "integral_rho_over_u", "int_0^inf rho(u)/u du = 1", 1.0, tol["integral_rho_over_u"],
         lambda: psi_prime_from_rho(0.0, quad_cfg), "quadrature+analytic tail")
    _run(report, "K_at_zero", "K(0) = int rho = 1", 1.0, tol["K_at_zero"],
         lambda: spectrum_K(0.0, quad_cfg).value, "spectrum_K")
    _run(report, "phi_at_zero", "phi(0) = 1", 1.0, tol["phi_at_zero"],
         lambda: phi_laplace([0.0], inv_cfg).values[0], "phi_laplace")
    _run(report, "psi_prime_at_zero", "W0'(0) = 1", 1.0, tol["psi_prime_at_zero"],
         lambda: psi_prime(0.0), "closed form")
    _run(report, "im_w0_large_probe", "Im W0(x + i0) -> pi as x -> -inf", math.pi, tol["im_w0_large_probe"],
         lambda: w0_cut_limit(-1e6, BranchSide.ABOVE).imag, "cut-limit solve at x = -1e6")
    _run(report, "roundtrip_rho", "psi'(t) = int rho(u)/(t+u) du, sup rel. error on [0.05, 20]", 0.0,
         tol["roundtrip_rho"], lambda: roundtrip_errors(np.geomspace(0.05, 20.0, 200), quad_cfg).max(),
         "stieltjes vs direct", "gate is a calibrated choice")
    _run(report, "phi_cross_route", "phi by inversion = phi by convolution equation on [0, 10]", 0.0,
         tol["phi_cross_route"],
         lambda: np.max(np.abs(np.subtract(*(g.values for g in phi_cross_route(inv_cfg=inv_cfg))))),
         f"{inv_cfg.method.value} vs volterra")
    _run(report, "linear_pipeline", "psi(t) = t gives phi(t) = exp(-t)", 0.0, tol["linear_pipeline"],
         linear_pipeline_error, "talbot, test model")
    _run(report, "titchmarsh_vs_K", "K(r) = (1/pi) Im[s psi~(s)] at s = r exp(-i pi), r in {0.5,1,2,5}", 0.0,
         tol["titchmarsh_vs_K"], lambda: titchmarsh_vs_K(cfg=quad_cfg), "rotated contour vs rho quadrature")
    if include_slow:
        _run(report, "spectral_consistency", "psi'(t) = int exp(-rt) K(r) dr = int exp(-t/tau) H(tau) dtau",
             0.0, tol["spectral_consistency"], lambda: spectral_consistency(cfg=quad_cfg), "nested quadrature")

    audits = (
        ("cm_psi_prime", "psi' is completely monotone", lambda: check_cm(psi_prime, audit_grid(0.1, 10.0), 6)),
        ("bernstein_psi", "psi is a Bernstein function", lambda: check_bernstein(psi, audit_grid(0.1, 10.0), 6)),
        ("cm_K", "K is completely monotone",
         lambda: check_cm(lambda r: spectrum_K(r, quad_cfg).value, audit_grid(0.1, 20.0), 6, 1e-8)),
    )
    for name, anchor, run in audits:
        _run(report, name, anchor, 0.0, tol[name], lambda run=run: len(run().violations),
             "finite differences", "computed = violation count")
    # H must fail somewhere: the check passes when the audit finds a violation
    _run(report, "H_not_cm", "H(tau) is not completely monotone", 1.0, tol["H_not_cm"],
         lambda: float(not check_cm(lambda x: spectrum_H(x, quad_cfg).value, audit_grid(0.1, 10.0), 6, 1e-8).passed),
         "finite differences", "computed = 1 when a violation is found")
    return report
