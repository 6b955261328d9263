"""Command-line interface: evaluate on grids, write figure data, validate."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import creep, lambertw, validation
from .errors import DomainError, GridError, LambertCreepError, NumericalWarning
from .transforms import InversionConfig, InversionMethod, QuadratureConfig, TailPolicy

EVAL_FUNCTIONS = {
    "w0": lambertw.w0_real,
    "w0_prime": lambertw.w0_prime_real,
    "w0_asym": lambertw.w0_asymptotic,
    "w0_prime_asym": lambertw.w0_prime_asymptotic,
    "psi": creep.psi,
    "psi_prime": creep.psi_prime,
}
SPECTRA = ("rho", "rho_over_u", "K", "H")
FIGURES = (
    "fig1_left",
    "fig1_right",
    "fig2",
    "fig3_rho",
    "fig4_roundtrip",
    "fig5_rho_over_u",
    "fig6_K_H",
    "fig7_phi",
)


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# plumbing


def parse_grid(text: str) -> np.ndarray:
    """Parse ``min:max:count:lin|log`` into an array of abscissae."""
    parts = text.split(":")
    if len(parts) != 4:
        raise GridError(f"grid must be min:max:count:lin|log, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise GridError(f"bad grid {text!r}: {exc}") from None
    spacing = parts[3]
    if not lo < hi:
        raise GridError("grid needs min < max")
    if count < 2:
        raise GridError("grid needs count >= 2")
    if spacing == "lin":
        return np.linspace(lo, hi, count)
    if spacing == "log":
        if lo <= 0:
            raise GridError("log spacing needs min > 0")
        return np.geomspace(lo, hi, count)
    raise GridError(f"spacing must be lin or log, got {spacing!r}")


def thread_count() -> int:
    raw = os.environ.get("LAMBERT_CREEP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LAMBERT_CREEP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("LAMBERT_CREEP_THREADS must be >= 1")
    return n


def pmap(f, xs) -> list:
    """Order-preserving map over at most ``LAMBERT_CREEP_THREADS`` threads."""
    xs = list(xs)
    n = thread_count()
    if n == 1 or len(xs) < 2:
        return [f(x) for x in xs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(f, xs))


def _replace_from(base, overrides: dict, enums: dict):
    names = {f.name for f in dataclasses.fields(base)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"unknown {type(base).__name__} fields: {sorted(unknown)}")
    values = {}
    for key, value in overrides.items():
        if key in enums:
            try:
                value = enums[key](value)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        values[key] = value
    try:
        return dataclasses.replace(base, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


@dataclasses.dataclass
class Settings:
    transform_quad: QuadratureConfig = creep.TRANSFORM_QUAD
    spectral_quad: QuadratureConfig = creep.SPECTRAL_QUAD
    inversion: InversionConfig = validation.DEFAULT_INVERSION


def load_settings(path) -> Settings:
    settings = Settings()
    if path is None:
        return settings
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict) or set(data) - {"quadrature", "inversion"}:
        raise ConfigError("config must be an object with 'quadrature' and/or 'inversion' keys")
    quad = data.get("quadrature", {})
    inv = data.get("inversion", {})
    qe = {"tail_policy": TailPolicy}
    settings.transform_quad = _replace_from(settings.transform_quad, quad, qe)
    settings.spectral_quad = _replace_from(settings.spectral_quad, quad, qe)
    settings.inversion = _replace_from(settings.inversion, inv, {"method": InversionMethod})
    return settings


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if not math.isfinite(v):
        return ""
    return "%.17g" % v


def render_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _maybe(f, x):
    """``f(x)`` or None where ``f`` is undefined (asymptotic forms)."""
    try:
        return f(x)
    except DomainError:
        return None


# --------------------------------------------------------------------------
# tables


def eval_table(which: str, grid) -> tuple[list, list]:
    f = EVAL_FUNCTIONS[which]
    values = pmap(lambda t: f(float(t)), grid)
    return ["t [-]", f"{which}(t) [-]"], [(t, v) for t, v in zip(grid, values)]


def _rho_or_zero(u: float) -> float:
    # rho vanishes on (0, 1/e]; the CLI extends that to the origin
    return 0.0 if u <= lambertw.INV_E else creep.rho(u)


def spectra_table(which: str, grid, settings: Settings) -> tuple[list, list]:
    cfg = settings.spectral_quad
    if which == "rho":
        vals = pmap(lambda u: (_rho_or_zero(u), 0.0), grid)
    elif which == "rho_over_u":
        vals = pmap(lambda u: (_rho_or_zero(u) / u if u > 0 else 0.0, 0.0), grid)
    elif which == "K":
        vals = [tuple(s[1:]) for s in pmap(lambda r: creep.spectrum_K(r, cfg), grid)]
    else:
        vals = [tuple(s[1:]) for s in pmap(lambda tau: creep.spectrum_H(tau, cfg), grid)]
    name = {"rho": "u", "rho_over_u": "u", "K": "r", "H": "tau"}[which]
    return [f"{name} [-]", f"{which} [-]", "est_error [-]"], [(x, v, e) for x, (v, e) in zip(grid, vals)]


def relax_table(route: str, t_max: float, steps: int, settings: Settings, model_name="lambert"):
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if steps < 2:
        raise DomainError("steps must be >= 2")
    model = creep.MODELS[model_name]
    times = np.linspace(0.0, t_max, steps + 1)
    header, cols = ["t [-]"], [times]
    lap = vol = None
    if route in ("laplace", "both"):
        lap = creep.phi_laplace(times, settings.inversion, settings.transform_quad, model)
        header.append("phi_laplace [-]")
        cols.append(lap.values)
    if route in ("volterra", "both"):
        vol = creep.phi_volterra(t_max, steps, model)
        header.append("phi_volterra [-]")
        cols.append(vol.values)
    if lap is not None and vol is not None:
        header.append("abs_diff [-]")
        cols.append(np.abs(lap.values - vol.values))
    if lap is not None:
        header.append("unstable_flag")
        cols.append(lap.flags.astype(float))
    return header, list(zip(*cols))


# --------------------------------------------------------------------------
# figures


def figure_tables(settings: Settings) -> dict:
    lin10 = np.linspace(0.0, 10.0, 201)
    tables = {}

    def asym_rows(grid, f, g):
        vals = pmap(lambda t: (f(float(t)), _maybe(g, float(t))), grid)
        return [(t, a, b) for t, (a, b) in zip(grid, vals)]

    tables["fig1_left"] = (
        ["t [-]", "w0 [-]", "w0_asym [-]"],
        asym_rows(np.linspace(0.0, 10.0, 101), lambertw.w0_real, lambertw.w0_asymptotic),
    )
    tables["fig1_right"] = (
        ["t [-]", "w0 [-]", "w0_asym [-]"],
        asym_rows(np.geomspace(1.0, 1e3, 100), lambertw.w0_real, lambertw.w0_asymptotic),
    )
    tables["fig2"] = (
        ["t [-]", "w0_prime [-]", "w0_prime_asym [-]"],
        asym_rows(lin10, lambertw.w0_prime_real, lambertw.w0_prime_asymptotic),
    )
    tables["fig3_rho"] = (["u [-]", "rho [-]"], [(u, _rho_or_zero(u)) for u in lin10])

    ts = np.geomspace(0.05, 20.0, 200)
    rebuilt = pmap(lambda t: creep.psi_prime_from_rho(t, settings.spectral_quad), ts)
    rows = []
    for t, r in zip(ts, rebuilt):
        direct = creep.psi_prime(t)
        rows.append((t, direct, r, abs(r - direct) / direct))
    tables["fig4_roundtrip"] = (["t [-]", "psi_prime [-]", "psi_prime_from_rho [-]", "rel_error [-]"], rows)

    tables["fig5_rho_over_u"] = (
        ["u [-]", "rho [-]", "rho_over_u [-]"],
        [(u, _rho_or_zero(u), _rho_or_zero(u) / u if u > 0 else 0.0) for u in lin10],
    )
    ks = pmap(lambda x: creep.spectrum_K(x, settings.spectral_quad).value, lin10)
    hs = pmap(lambda x: creep.spectrum_H(x, settings.spectral_quad).value if x > 0 else None, lin10)
    tables["fig6_K_H"] = (["x [-]", "K(r=x) [-]", "H(tau=x) [-]"], list(zip(lin10, ks, hs)))
    tables["fig7_phi"] = relax_table("both", 10.0, 200, settings)
    return tables


GNUPLOT = """set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 800,600
set output '{name}.png'
{logscale}plot {plots}
"""


def gnuplot_script(name: str, header) -> str:
    plots = ", ".join(f"'{name}.csv' using 1:{i} with lines" for i in range(2, len(header) + 1)
                      if header[i - 1] not in ("unstable_flag",))
    logscale = "set logscale xy\n" if name in ("fig1_right", "fig4_roundtrip") else ""
    return GNUPLOT.format(name=name, plots=plots, logscale=logscale)


def write_figures(outdir: str, settings: Settings) -> list:
    os.makedirs(outdir, exist_ok=True)
    tables = figure_tables(settings)
    written = []
    for name in FIGURES:
        header, rows = tables[name]
        path = os.path.join(outdir, f"{name}.csv")
        write_atomic(path, render_csv(header, rows))
        write_atomic(os.path.join(outdir, f"{name}.gp"), gnuplot_script(name, header))
        written.append(path)
    return written


# --------------------------------------------------------------------------
# commands


def cmd_eval(args, settings):
    grid = parse_grid(args.grid or "0:10:101:lin")
    emit(render_csv(*eval_table(args.which, grid)), args.out)
    return 0


def cmd_spectra(args, settings):
    grid = parse_grid(args.grid or "0:10:201:lin")
    if args.which == "H" and grid[0] <= 0:
        raise DomainError("H requires tau > 0")
    emit(render_csv(*spectra_table(args.which, grid, settings)), args.out)
    return 0


def cmd_relax(args, settings):
    model = args.test_model or "lambert"
    emit(render_csv(*relax_table(args.route, args.t_max, args.steps, settings, model)), args.out)
    return 0


def cmd_figures(args, settings):
    outdir = args.out or "figures"
    for path in write_figures(outdir, settings):
        print(path)
    return 0


def _parse_tols(items) -> dict:
    tols = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            tols[name] = float(value)
        except ValueError:
            raise ConfigError(f"bad tolerance {item!r}") from None
    return tols


def cmd_validate(args, settings):
    tols = _parse_tols(args.tol)
    try:
        report = validation.run_identity_suite(
            settings.spectral_quad, settings.inversion, tols, include_slow=not args.quick
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    emit(report.to_json() if args.format == "json" else report.to_text(), args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambert-creep", description="Lambert-W creep model: evaluation, spectra, relaxation and checks."
    )
    parser.add_argument("--config", help="JSON file with 'quadrature' and 'inversion' overrides")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        if grid:
            p.add_argument("--grid", help="min:max:count:lin|log")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("eval", help="evaluate W0 and related functions on a grid")
    p.add_argument("which", choices=sorted(EVAL_FUNCTIONS))
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectra", help="spectral density rho and spectra K, H")
    p.add_argument("which", choices=SPECTRA)
    common(p)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("relax", help="relaxation function phi(t)")
    p.add_argument("--route", choices=("laplace", "volterra", "both"), default="both")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--test-model", choices=("linear",), help="replace psi by the linear law psi(t) = t")
    common(p, grid=False)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("figures", help="write CSV data and gnuplot scripts for every figure")
    p.add_argument("--out", help="output directory (default ./figures)")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("validate", help="run the identity and monotonicity suite")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a check tolerance")
    p.add_argument("--quick", action="store_true", help="skip the nested spectral-consistency check")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NumericalWarning)
            return args.func(args, settings)
    except (LambertCreepError, ConfigError, ValueError) as exc:
        print(f"lambert-creep: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lambert-creep: error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
