"""Semi-infinite quadrature, Stieltjes/Titchmarsh pair and inverse Laplace.

Quadrature over ``[a, inf)`` is split into

* a near piece ``[a, a + scale]``, optionally with the substitution
  ``u = a + v**2`` that removes an inverse square-root endpoint singularity,
* a far piece in the variable ``x = log(u - a)`` out to the truncation
  point, cut into panels that widen geometrically,
* a tail beyond the truncation point handled per :class:`TailPolicy`.

Two inverse-Laplace engines are provided: Gaver-Stehfest, which only needs
the transform on the positive real axis, and the fixed Talbot contour,
which needs it on a contour wrapping the negative real axis.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

from scipy import integrate

from .errors import (
    CutEvaluationError,
    DomainError,
    InversionInstability,
    MethodDomainError,
    ToleranceNotMet,
)

LN2 = math.log(2.0)
LN10 = math.log(10.0)
_EPS = 2.220446049250313e-16
_MAX_LOG = 709.0


class TailPolicy(str, enum.Enum):
    NONE = "none"
    ANALYTIC_TAIL = "analytic_tail"
    LOG_SUBSTITUTION = "log_substitution"


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and truncation for integrals over ``[a, inf)``.

    ``truncation_point`` is where the far piece stops and the tail policy
    takes over.  The default sits near the top of the double range because
    tails decaying like ``1/(u log(u)**2)`` are only captured to 1e-5 by their
    leading-order closed form once ``log(u)`` is several hundred.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    truncation_point: float = 1e300
    tail_policy: TailPolicy = TailPolicy.ANALYTIC_TAIL

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if not self.truncation_point > 0:
            raise ValueError("truncation_point must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        object.__setattr__(self, "tail_policy", TailPolicy(self.tail_policy))


DEFAULT_QUAD = QuadratureConfig()


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool


def _quad(f, lo, hi, epsabs, cfg: QuadratureConfig, complex_func=False):
    if hi <= lo:
        return 0.0, 0.0, True
    out = integrate.quad(
        f,
        lo,
        hi,
        epsabs=epsabs,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
        complex_func=complex_func,
    )
    if complex_func:
        value = complex(out[0])
        error = abs(complex(out[1]))
        # per component: (infodict,) on success, (infodict, message) otherwise
        info = out[2]
        ok = len(info["real"]) == 1 and len(info["imag"]) == 1
        return value, error, ok
    value, error = out[0], out[1]
    ok = len(out) < 4
    return value, error, ok


def _log_edges(x0: float, x1: float) -> list[float]:
    edges = [x0]
    while edges[-1] < x1:
        width = max(LN10, 0.25 * (edges[-1] - x0))
        edges.append(min(edges[-1] + width, x1))
    return edges


def integrate_semi_infinite(
    f: Callable[[float], float],
    a: float = 0.0,
    cfg: QuadratureConfig = DEFAULT_QUAD,
    *,
    scale: float = 1.0,
    near: Optional[Callable[[float], float]] = None,
    log_integrand: Optional[Callable[[float], float]] = None,
    cutoff: Optional[float] = None,
    tail: Optional[Callable[[float], tuple[float, float]]] = None,
    complex_func: bool = False,
) -> QuadResult:
    """Integrate ``f`` over ``[a, inf)``.

    Parameters
    ----------
    f : callable
        Integrand ``f(u)``.
    a : float
        Lower limit.
    scale : float
        Width of the near piece ``[a, a + scale]``.
    near : callable, optional
        ``near(d) == f(a + d)`` evaluated from the offset ``d`` directly.
        Supplying it declares an inverse square-root singularity at ``a``;
        the near piece is then integrated in ``v = sqrt(u - a)``.
    log_integrand : callable, optional
        ``log_integrand(x) == exp(x) * f(a + exp(x))`` in an overflow-free
        form; used for the far piece and the log-substituted tail.
    cutoff : float, optional
        Absolute abscissa beyond which the integrand is negligible (for
        exponentially weighted integrands).  No tail is added past it.
    tail : callable, optional
        ``tail(U) -> (value, error_bound)`` closed form of the integral over
        ``[U, inf)``; used when the policy is ``ANALYTIC_TAIL``.
    """
    upper = cfg.truncation_point if cutoff is None else min(cutoff, cfg.truncation_point)
    if upper <= a:
        raise DomainError("truncation point must exceed the lower limit")
    scale = min(scale, upper - a)

    if log_integrand is None:
        def log_integrand(x):
            if x > _MAX_LOG:
                return 0.0
            ex = math.exp(x)
            return ex * f(a + ex)

    pieces = []
    if near is not None:
        pieces.append((lambda v: 2.0 * v * near(v * v), 0.0, math.sqrt(scale)))
    else:
        pieces.append((f, a, a + scale))
    x_end = math.log(upper - a) if upper - a < math.inf else _MAX_LOG
    edges = _log_edges(math.log(scale), x_end)
    for lo, hi in zip(edges[:-1], edges[1:]):
        pieces.append((log_integrand, lo, hi))

    use_tail = cutoff is None or cutoff > cfg.truncation_point
    policy = cfg.tail_policy if use_tail else TailPolicy.NONE
    n = len(pieces) + (policy is not TailPolicy.NONE)
    epsabs = cfg.abs_tol / n

    total, err, ok, mag = 0.0, 0.0, True, 0.0
    for g, lo, hi in pieces:
        v, e, good = _quad(g, lo, hi, epsabs, cfg, complex_func)
        total += v
        err += e
        mag += abs(v)
        ok &= good

    if policy is TailPolicy.LOG_SUBSTITUTION:
        v, e, good = _quad(log_integrand, x_end, math.inf, epsabs, cfg, complex_func)
        total += v
        err += e
        mag += abs(v)
        ok &= good
    elif policy is TailPolicy.ANALYTIC_TAIL and tail is not None:
        v, e = tail(upper)
        total += v
        err += e
        mag += abs(v)

    err += 8.0 * _EPS * mag
    if not ok or err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        warnings.warn(
            f"quadrature error estimate {err:.3g} exceeds tolerance", ToleranceNotMet, stacklevel=2
        )
        ok = False
    return QuadResult(total, err, ok)


def laplace(
    f: Callable[[float], float], s: float, cfg: QuadratureConfig = DEFAULT_QUAD
) -> QuadResult:
    """Laplace transform ``int_0^inf exp(-s t) f(t) dt`` for real ``s > 0``."""
    s = float(s)
    if not s > 0:
        raise DomainError(f"laplace requires s > 0, got {s}")
    # beyond s t = 50 the kernel is below 2e-22
    return integrate_semi_infinite(
        lambda t: math.exp(-s * t) * f(t), 0.0, cfg, scale=1.0 / s, cutoff=50.0 / s
    )


def stieltjes(
    g: Callable[[float], float],
    s: float,
    cfg: QuadratureConfig = DEFAULT_QUAD,
    *,
    a: float = 0.0,
    scale: float = 1.0,
    near: Optional[Callable[[float], float]] = None,
    log_integrand: Optional[Callable[[float], float]] = None,
    tail: Optional[Callable[[float], tuple[float, float]]] = None,
) -> QuadResult:
    """Stieltjes transform ``int_a^inf g(r) / (r + s) dr``.

    ``g`` is taken to vanish on ``[0, a)``; ``s = 0`` is allowed when
    ``a > 0``.  The keyword arguments are forwarded to
    :func:`integrate_semi_infinite` after dividing by ``r + s``.
    """
    s = float(s)
    if s < 0 or s + a <= 0:
        raise DomainError(f"stieltjes requires s > 0 (or s = 0 with a > 0), got {s}")
    kw = {}
    if near is not None:
        kw["near"] = lambda d: near(d) / (a + d + s)
    if log_integrand is not None:
        def log_kernel(x):
            ex_inv = math.exp(-x)
            return log_integrand(x) * ex_inv / (1.0 + (a + s) * ex_inv)
        kw["log_integrand"] = log_kernel
    if tail is not None:
        kw["tail"] = tail
    return integrate_semi_infinite(lambda r: g(r) / (r + s), a, cfg, scale=scale, **kw)


class Domain(str, enum.Enum):
    """Where a transform may be evaluated."""

    REAL_AXIS = "real_axis"
    SECTORIAL = "sectorial"


@dataclass(frozen=True)
class TransformFn:
    """A Laplace-domain function ``s -> F(s)`` and where it can be evaluated.

    ``SECTORIAL`` transforms accept complex ``s`` anywhere off the negative
    real axis, including one-sided limits onto it written with a signed
    zero imaginary part, e.g. ``complex(-r, -0.0)`` for ``r exp(-i pi)``.
    """

    func: Callable
    domain: Domain = Domain.SECTORIAL

    def __call__(self, s):
        return self.func(s)


def as_transform(F) -> TransformFn:
    return F if isinstance(F, TransformFn) else TransformFn(F, Domain.SECTORIAL)


def titchmarsh_inverse(F, r: float, *, side_tol: float = 1e-8) -> float:
    """Spectral density ``+/- (1/pi) Im F(r exp(-/+ i pi))`` for ``r > 0``.

    Both one-sided limits are evaluated; they must agree to ``side_tol``
    (relative to ``max(1, |value|)``) and their mean is returned.
    """
    F = as_transform(F)
    r = float(r)
    if not r > 0:
        raise DomainError(f"titchmarsh_inverse requires r > 0, got {r}")
    if F.domain is not Domain.SECTORIAL:
        raise CutEvaluationError("transform is only evaluable on the real axis")
    try:
        below = complex(F(complex(-r, -0.0))).imag / math.pi
        above = -complex(F(complex(-r, 0.0))).imag / math.pi
    except (ArithmeticError, ValueError) as exc:
        raise CutEvaluationError(f"transform undefined at -{r} +/- i0: {exc}") from exc
    if not (math.isfinite(below) and math.isfinite(above)):
        raise CutEvaluationError(f"transform not finite at -{r} +/- i0")
    value = 0.5 * (below + above)
    if abs(below - above) > side_tol * max(1.0, abs(value)):
        raise CutEvaluationError(
            f"one-sided limits disagree at r={r}: {below!r} vs {above!r}"
        )
    return value


class InversionMethod(str, enum.Enum):
    GAVER_STEHFEST = "gaver_stehfest"
    TALBOT = "talbot"


@dataclass(frozen=True)
class InversionConfig:
    method: InversionMethod = InversionMethod.GAVER_STEHFEST
    gs_terms: int = 16
    talbot_nodes: int = 32
    instability_tol: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "method", InversionMethod(self.method))
        if self.gs_terms % 2 or not 2 <= self.gs_terms <= 20:
            raise ValueError("gs_terms must be even and in [2, 20] in double precision")
        if self.talbot_nodes < 4:
            raise ValueError("talbot_nodes must be >= 4")


DEFAULT_INVERSION = InversionConfig()


@lru_cache(maxsize=None)
def stehfest_weights(n: int) -> tuple[float, ...]:
    """Stehfest coefficients V_1..V_n, computed exactly then rounded."""
    if n % 2 or n < 2:
        raise ValueError("Stehfest order must be a positive even integer")
    half = n // 2
    fact = math.factorial
    weights = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(
                j**half * fact(2 * j),
                fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k),
            )
        weights.append(float((-1) ** (k + half) * acc))
    return tuple(weights)


def gaver_stehfest(F: Callable[[float], float], t: float, n: int = 16) -> float:
    """Gaver-Stehfest approximation of the inverse transform at ``t``."""
    a = LN2 / t
    terms = []
    for k, v in enumerate(stehfest_weights(n), start=1):
        value = F(k * a)
        terms.append(v * (value.real if isinstance(value, complex) else float(value)))
    return a * math.fsum(terms)


def talbot(F: Callable[[complex], complex], t: float, m: int = 32) -> float:
    """Fixed-Talbot (Abate-Valko) approximation of the inverse transform."""
    r = 2.0 * m / (5.0 * t)
    acc = 0.5 * math.exp(r * t) * complex(F(complex(r, 0.0))).real
    for k in range(1, m):
        theta = k * math.pi / m
        cot = 1.0 / math.tan(theta)
        s = complex(r * theta * cot, r * theta)
        sigma = theta + (theta * cot - 1.0) * cot
        acc += (cmath.exp(t * s) * complex(F(s)) * complex(1.0, sigma)).real
    return r / m * acc


def invert_with_spread(F, t: float, cfg: InversionConfig = DEFAULT_INVERSION) -> tuple[float, float]:
    """Inverse transform at ``t`` and the spread against a lower order.

    The spread compares Gaver-Stehfest orders ``n`` and ``n - 2`` or Talbot
    node counts ``m`` and ``3m/4``; it is a consistency measure, not a bound.
    """
    F = as_transform(F)
    t = float(t)
    if not t > 0:
        raise DomainError(f"inverse Laplace requires t > 0, got {t}")
    if cfg.method is InversionMethod.TALBOT:
        if F.domain is not Domain.SECTORIAL:
            raise MethodDomainError("Talbot needs a transform evaluable off the real axis")
        value = talbot(F, t, cfg.talbot_nodes)
        other = talbot(F, t, max(4, (3 * cfg.talbot_nodes) // 4))
    else:
        value = gaver_stehfest(F, t, cfg.gs_terms)
        other = gaver_stehfest(F, t, cfg.gs_terms - 2) if cfg.gs_terms > 2 else value
    return value, abs(value - other)


def invert_laplace(F, t: float, cfg: InversionConfig = DEFAULT_INVERSION) -> float:
    """Numerical inverse Laplace transform of ``F`` at ``t > 0``.

    Warns with :class:`InversionInstability` when the lower-order
    approximation differs by more than ``cfg.instability_tol``.
    """
    value, spread = invert_with_spread(F, t, cfg)
    if spread > cfg.instability_tol * max(1.0, abs(value)):
        warnings.warn(
            f"inverse Laplace at t={t}: successive orders differ by {spread:.3g}",
            InversionInstability,
            stacklevel=2,
        )
    return value
