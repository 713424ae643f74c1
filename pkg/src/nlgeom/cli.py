"""Command-line front end.

    nlgeom <scenario> [--config FILE] [flags] [--out DATA] [--report REPORT]

Scenarios: evolve, trajectory, invert-one, invert-two-a, invert-two-b,
kruskal, verify.  Every flag can also be given as a key in an INI file
section named after the scenario; flags override the file.  The JSON
report ({checks, meta, ...}) goes to --report or stdout.  Exit status is
0 when every check passes, 1 when one fails and 2 for a bad configuration.

Set NLGEOM_THREADS to evaluate grids and checks on several threads; the
output does not depend on it.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from . import kruskal as kr
from .checks import CHECKS, CheckResult, SuiteConfig, run_suite
from .core import Coupling, ModePair, NonlinearSolution, equation_residual, gamma, norms
from .diffgeo import MetricField, SingularMetricError, Signature, ricci, signature
from .free_particle import GaussianPacket, momentum_grid, orthonormalize, packet_state, trajectory_expectation, trajectory_params
from .functions import DomainError, FunctionPair, require_no_sign_change
from .inversion import (
    CaseAConstants,
    CaseBConstants,
    InversionResult,
    OneFunctionConstants,
    caseA_solution,
    caseB_constraint,
    caseB_solution,
    onefunction_solution,
    verify_gauge_roundtrip,
)
from .trajectory import TrajectoryParams, X_phi, X_psi, partition_identity, time_reversal_check

THREADS_ENV = "NLGEOM_THREADS"
GRID_COLUMNS = ("g00", "g01", "g11", "det", "R", "signature", "singular")


class ConfigError(ValueError):
    """Invalid scenario configuration (exit status 2)."""


# ---------------------------------------------------------------------------
# value parsers shared by flags and config files

def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"not a finite number: {s!r}")
    return v


def _int(s: str) -> int:
    return int(s)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in s.split(",") if p.strip())


def _complexes(s: str) -> tuple[complex, ...]:
    return tuple(complex(p.strip().replace(" ", "")) for p in s.split(",") if p.strip())


def _lines(s: str) -> tuple[tuple[float, float], ...]:
    out = []
    for part in s.split(";"):
        if part.strip():
            v = _floats(part)
            if len(v) != 2:
                raise ValueError(f"a line is 'xi,u0', got {part!r}")
            out.append(v)
    return tuple(out)


def _str(s: str) -> str:
    return s.strip()


@dataclass(frozen=True)
class Param:
    name: str
    parse: Callable[[str], Any]
    default: str
    help: str = ""


def _grid_params(t=(0.0, 1.0, 11), x=(-1.0, 1.0, 11)) -> list[Param]:
    return [
        Param("t_min", _float, str(t[0]), "first coordinate, lower end"),
        Param("t_max", _float, str(t[1]), "first coordinate, upper end"),
        Param("t_count", _int, str(t[2]), "first coordinate, number of samples"),
        Param("x_min", _float, str(x[0]), "second coordinate, lower end"),
        Param("x_max", _float, str(x[1]), "second coordinate, upper end"),
        Param("x_count", _int, str(x[2]), "second coordinate, number of samples"),
    ]


_COUPLING = [
    Param("a", _float, "0.5", "real part of the coupling"),
    Param("b", _float, "0.3", "imaginary part of the coupling"),
    Param("omega0", _float, "1.3", "omega0 > 0"),
    Param("theta", _float, "0.4", "mixing angle"),
]

SCENARIOS: dict[str, list[Param]] = {
    "evolve": _COUPLING + [
        Param("energies", _floats, "0,1,2.5", "eigen-energies of H"),
        Param("coeff_a", _complexes, "1,0,0", "|A> in the energy basis"),
        Param("coeff_b", _complexes, "0,0.7071067811865476,0.7071067811865476j", "|B> in the energy basis"),
        Param("t_min", _float, "-5"),
        Param("t_max", _float, "5"),
        Param("t_count", _int, "101"),
        Param("h", _float, "1e-4", "step of the central difference in the residual"),
        Param("tol_norm", _float, "1e-10"),
        Param("tol_residual", _float, "1e-6"),
    ],
    "trajectory": _COUPLING + [
        Param("k", _floats, "", "k1..k8; empty to fit them from the packets"),
        Param("packet_a", _floats, "-1,0.5,0.8", "x0,p0,sigma of |A>"),
        Param("packet_b", _floats, "1.5,-0.3,1.1", "x0,p0,sigma of |B>"),
        Param("grid_points", _int, "1024", "momentum grid size (>= 512)"),
        Param("t_min", _float, "-3"),
        Param("t_max", _float, "3"),
        Param("t_count", _int, "61"),
        Param("tol_partition", _float, "1e-14"),
        Param("tol_reversal", _float, "1e-12"),
        Param("tol_packets", _float, "1e-9"),
    ],
    "invert-one": [
        Param("f", _str, "exp(t)", "f(t) of the family x = k f(t) + k0"),
        Param("r", _floats, "1,0,1", "r0,r1,r2 (barred)"),
        Param("c", _floats, "0,0,-1", "c1,c2,c3"),
        Param("chart", _str, "tx", "tx or TX"),
        *_grid_params(),
        Param("tol_curvature", _float, "1e-6"),
        Param("tol_roundtrip", _float, "1e-6"),
    ],
    "invert-two-a": [
        Param("f1", _str, "exp(t)+t"),
        Param("f2", _str, "sin(t)"),
        Param("constants", _floats, "1,0.2,0.9,0.3,-0.4,1.1", "r2,q1,p0,r1,q0,r0 (barred)"),
        *_grid_params((0.0, 2.0, 11)),
        Param("tol_curvature", _float, "1e-6"),
        Param("tol_roundtrip", _float, "1e-6"),
    ],
    "invert-two-b": [
        Param("f1", _str, "sin(t)"),
        Param("f2", _str, "cos(t)"),
        Param("constants", _floats, "1,0.3,0.8,0.2,-0.1,0.5", "m1,m2,m3,alpha,beta,r0"),
        *_grid_params((0.0, 2.0, 11)),
        Param("tol_curvature", _float, "1e-6"),
        Param("tol_roundtrip", _float, "1e-6"),
        Param("tol_constraint", _float, "1e-8"),
    ],
    "kruskal": [
        Param("babs", _float, "2", "|b'| > 0"),
        Param("line", _lines, "0.5,1.0", "xi,u0 of v = xi (u - u0); several separated by ';'"),
        *_grid_params((-2.0, 2.0, 9), (-2.0, 2.0, 9)),
    ],
    "verify": [
        Param("seed", _int, str(SuiteConfig.seed)),
        Param("norm_draws", _int, str(SuiteConfig.norm_draws)),
        Param("reversal_cases", _int, str(SuiteConfig.reversal_cases)),
        Param("line_samples", _int, str(SuiteConfig.line_samples)),
        Param("timelike_samples", _int, str(SuiteConfig.timelike_samples)),
        Param("geodesic_members", _int, str(SuiteConfig.geodesic_members)),
        Param("grid", _int, str(SuiteConfig.grid)),
        Param("rk4_steps", _int, str(SuiteConfig.rk4_steps)),
        Param("tol", _str, "", "overrides as name=value pairs separated by ';'"),
    ],
}

OUTPUT_KEYS = ("out", "format", "report")


# ---------------------------------------------------------------------------
# configuration

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlgeom", description="Exact nonlinear two-state solutions and metrics from geodesics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for kind, params in SCENARIOS.items():
        sp_ = sub.add_parser(kind, help=f"run the {kind} scenario")
        sp_.add_argument("--config", help="INI file; keys of section [%s] set defaults" % kind)
        for p in params:
            help_ = f"{p.help} (default: {p.default or 'empty'})".strip()
            if p.name == "line":
                sp_.add_argument("--line", action="append", help=help_ + "; repeatable")
            elif p.name == "tol" and kind == "verify":
                sp_.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override; repeatable")
            else:
                sp_.add_argument("--" + p.name.replace("_", "-"), dest=p.name, help=help_)
        sp_.add_argument("--out", help="data file (grid CSV/JSON); omitted means no data file")
        sp_.add_argument("--format", choices=("csv", "json"), help="data format (default csv)")
        sp_.add_argument("--report", help="JSON report path (default stdout)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file section, then flags; all parsed and validated."""
    kind = args.scenario
    params = {p.name: p for p in SCENARIOS[kind]}
    raw: dict[str, str] = {name: p.default for name, p in params.items()}
    raw.update({"out": "", "format": "csv", "report": ""})
    if args.config:
        cp = configparser.ConfigParser(interpolation=None)
        try:
            with open(args.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if cp.has_section(kind):
            for key, value in cp.items(kind):
                key = key.replace("-", "_")
                if key not in raw:
                    raise ConfigError(f"unknown key {key!r} in section [{kind}]")
                raw[key] = value
    for key in raw:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key == "line":
            value = ";".join(value)
        elif key == "tol" and kind == "verify":
            value = ";".join(value)
        raw[key] = value
    cfg: dict[str, Any] = {"scenario": kind}
    for name, p in params.items():
        try:
            cfg[name] = p.parse(raw[name])
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    for key in OUTPUT_KEYS:
        cfg[key] = raw[key]
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    kind = cfg["scenario"]
    for axis in ("t", "x"):
        if f"{axis}_count" in cfg:
            if cfg[f"{axis}_count"] < 2:
                raise ConfigError(f"{axis}_count must be >= 2")
            if not cfg[f"{axis}_min"] < cfg[f"{axis}_max"]:
                raise ConfigError(f"{axis}_min must be below {axis}_max")
    for key, value in cfg.items():
        if key.startswith("tol_") and not value > 0:
            raise ConfigError(f"{key} must be positive")
    if "omega0" in cfg and not cfg["omega0"] > 0:
        raise ConfigError("omega0 must be positive")
    if kind == "trajectory":
        if cfg["k"] and len(cfg["k"]) != 8:
            raise ConfigError("k needs eight values")
        for key in ("packet_a", "packet_b"):
            if len(cfg[key]) != 3 or not cfg[key][2] > 0:
                raise ConfigError(f"{key} is x0,p0,sigma with sigma > 0")
        if cfg["grid_points"] < 512:
            raise ConfigError("grid_points must be >= 512")
    if kind == "invert-one":
        if len(cfg["r"]) != 3 or len(cfg["c"]) != 3:
            raise ConfigError("r and c need three values each")
        if cfg["r"][2] == 0:
            raise ConfigError("r2 must be nonzero")
        if cfg["chart"] not in ("tx", "TX"):
            raise ConfigError("chart must be tx or TX")
    if kind in ("invert-two-a", "invert-two-b") and len(cfg["constants"]) != 6:
        raise ConfigError("constants needs six values")
    if kind == "kruskal":
        if not cfg["babs"] > 0:
            raise ConfigError("babs must be positive")
        if not cfg["line"]:
            raise ConfigError("give at least one line")
    if kind == "verify":
        for key in ("norm_draws", "reversal_cases", "line_samples", "timelike_samples", "geodesic_members", "rk4_steps"):
            if cfg[key] < 1:
                raise ConfigError(f"{key} must be positive")
        if cfg["grid"] < 2:
            raise ConfigError("grid must be >= 2")
        _parse_tol_overrides(cfg["tol"])


def _parse_tol_overrides(s: str) -> dict[str, float]:
    out = {}
    for part in s.split(";"):
        if not part.strip():
            continue
        name, _, value = part.partition("=")
        name = name.strip()
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r} in tol")
        try:
            out[name] = _float(value)
        except ValueError as exc:
            raise ConfigError(f"tol {name}: {exc}") from exc
    return out


def config_hash(cfg: dict) -> str:
    canon = {k: v for k, v in cfg.items() if k not in OUTPUT_KEYS}
    text = json.dumps(canon, sort_keys=True, default=repr, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# grid output

@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    t_count: int
    x_min: float
    x_max: float
    x_count: int
    names: tuple[str, str] = ("T", "X")

    @classmethod
    def from_config(cls, cfg: dict, names=("T", "X")) -> "GridSpec":
        return cls(cfg["t_min"], cfg["t_max"], cfg["t_count"], cfg["x_min"], cfg["x_max"], cfg["x_count"], names)

    def points(self) -> list[tuple[float, float]]:
        ts = np.linspace(self.t_min, self.t_max, self.t_count)
        xs = np.linspace(self.x_min, self.x_max, self.x_count)
        return [(float(t), float(x)) for t in ts for x in xs]


GridRow = tuple  # (g00, g01, g11, det, R, signature, singular)


def metric_evaluator(m: MetricField, singular: Optional[Callable[[float, float], bool]] = None) -> Callable[[float, float], GridRow]:
    """Row evaluator for emit_grid; R is nan at flagged points."""

    def evaluate(T: float, X: float) -> GridRow:
        nan = float("nan")
        with np.errstate(all="ignore"):
            try:
                comps = np.asarray(m.components(T, X), dtype=float)
            except (ZeroDivisionError, FloatingPointError, SingularMetricError):
                return (nan, nan, nan, nan, nan, Signature.SINGULAR.value, True)
            det = float(comps[0] * comps[2] - comps[1] ** 2)
            sig = signature(m, T, X)
            flagged = sig is Signature.SINGULAR or (singular is not None and singular(T, X))
            R = nan
            if not flagged:
                try:
                    R = ricci(m, T, X)[1]
                except (SingularMetricError, ZeroDivisionError, FloatingPointError):
                    flagged = True
            return (*map(float, comps), det, float(R), sig.value, bool(flagged))

    return evaluate


def evaluate_grid(evaluator: Callable[[float, float], GridRow], grid: GridSpec, threads: int = 1) -> list[tuple]:
    """Rows (T, X, *evaluator(T, X)) in row-major order, T then X ascending."""
    points = grid.points()
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(lambda p: evaluator(*p), points))
    else:
        values = [evaluator(*p) for p in points]
    return [(*p, *v) for p, v in zip(points, values)]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, str):
        return v
    return "%.17g" % v


def emit_grid(evaluator, grid: GridSpec, path: str, fmt: str = "csv", threads: int = 1) -> list[tuple]:
    """Evaluate on the grid and write CSV or JSON; singular points are kept and flagged."""
    rows = evaluate_grid(evaluator, grid, threads)
    header = (*grid.names, *GRID_COLUMNS)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows([_fmt(v) for v in row] for row in rows)
    elif fmt == "json":
        payload = {"columns": list(header), "rows": [[_json_value(v) for v in row] for row in rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, allow_nan=False)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return rows


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    if isinstance(v, list):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def _write_series(path: str, fmt: str, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows([_fmt(v) for v in row] for row in rows)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"columns": list(header), "rows": _json_value([list(r) for r in rows])}, fh, indent=1)
            fh.write("\n")


def _result(name: str, value: float, tol: float) -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tol, bool(math.isfinite(value) and value <= tol))


# ---------------------------------------------------------------------------
# scenarios; each returns (checks, extra report entries)

def run_evolve(cfg: dict, threads: int):
    modes = ModePair(cfg["energies"], cfg["coeff_a"], cfg["coeff_b"])
    sol = NonlinearSolution(Coupling(cfg["a"], cfg["b"]), cfg["omega0"], cfg["theta"], modes)
    rows = []
    for t in np.linspace(cfg["t_min"], cfg["t_max"], cfg["t_count"]):
        t = float(t)
        g = gamma(sol, t)
        n_psi, n_phi = norms(sol, t)
        r_psi, r_phi = equation_residual(sol, t, cfg["h"])
        rows.append((t, g.real, g.imag, n_psi, n_phi, n_psi + n_phi, r_psi, r_phi))
    arr = np.array(rows)
    checks = [
        _result("evolve.norm_sum", np.max(np.abs(arr[:, 5] - sol.N)) / sol.N, cfg["tol_norm"]),
        _result("evolve.equation_residual", np.max(arr[:, 6:]), cfg["tol_residual"]),
    ]
    if cfg["out"]:
        header = ("t", "gamma_re", "gamma_im", "norm_psi", "norm_phi", "norm_sum", "residual_psi", "residual_phi")
        _write_series(cfg["out"], cfg["format"], header, rows)
    return checks, {"N": sol.N}


def run_trajectory(cfg: dict, threads: int):
    sol = NonlinearSolution(Coupling(cfg["a"], cfg["b"]), cfg["omega0"], cfg["theta"])
    ts = [float(t) for t in np.linspace(cfg["t_min"], cfg["t_max"], cfg["t_count"])]
    checks = []
    states = None
    if cfg["k"]:
        p = TrajectoryParams(cfg["k"], sol.omega0, sol.coupling.a, sol.coupling.b, sol.theta)
    else:
        pa, pb = (GaussianPacket(*cfg[key]) for key in ("packet_a", "packet_b"))
        grid = momentum_grid([pa, pb], cfg["grid_points"])
        states = orthonormalize(packet_state(pa, grid), packet_state(pb, grid))
        p = trajectory_params(sol, *states)
    rows = []
    for t in ts:
        try:
            xphi = float(X_phi(p, t))
        except ZeroDivisionError:
            xphi = float("nan")
        rows.append((t, float(X_psi(p, t)), xphi, float(partition_identity(p, t))))
    arr = np.array(rows)
    checks.append(_result("trajectory.partition_identity", np.max(np.abs(arr[:, 3] - 1.0)), cfg["tol_partition"]))
    finite = [t for t, r in zip(ts, rows) if math.isfinite(r[2])]
    checks.append(_result("trajectory.time_reversal", max(float(time_reversal_check(p, t)) for t in finite), cfg["tol_reversal"]))
    if states is not None:
        dev = max(abs(trajectory_expectation(sol, *states, t) - r[1]) for t, r in zip(ts, rows))
        checks.append(_result("trajectory.packet_expectation", dev, cfg["tol_packets"]))
    if cfg["out"]:
        _write_series(cfg["out"], cfg["format"], ("t", "X_psi", "X_phi", "partition"), rows)
    return checks, {"k": list(p.k), "N": p.N}


def _inversion_checks(res: InversionResult, rows, cfg, name: str, metric_points_are_tx: bool = True):
    good = [r for r in rows if not r[-1]]
    checks = []
    if not good:
        return [CheckResult(f"{name}.constant_curvature", math.inf, cfg["tol_curvature"], False)]
    R = res.scalar_curvature
    dev = max(abs(r[6] - R) / (1 + abs(R)) for r in good)
    checks.append(_result(f"{name}.constant_curvature", dev, cfg["tol_curvature"]))
    if metric_points_are_tx:
        dets = np.array([abs(res.det_a(r[0], r[1])) for r in good])
        wellcond = [r for r, d in zip(good, dets) if d >= 1e-3 * dets.max()]
        step = max(1, len(wellcond) // 6)
        pts = [(r[0], r[1]) for r in wellcond[::step]][:6]
        rt = verify_gauge_roundtrip(res, pts, analytic=False)
        checks.append(_result(f"{name}.gauge_roundtrip", rt.max_deviation, cfg["tol_roundtrip"]))
    return checks


def _require_domain(fn, cfg, name):
    try:
        require_no_sign_change(fn, (cfg["t_min"], cfg["t_max"]), name, positive=True)
    except DomainError as exc:
        raise ConfigError(f"{exc}; the closed forms need {name} > 0 on the grid") from exc


def _grid_scenario(res: InversionResult, metric: MetricField, cfg, threads, name, singular, tx: bool):
    grid = GridSpec.from_config(cfg, ("T", "X") if not tx else ("t", "x"))
    evaluator = metric_evaluator(metric, singular)
    if cfg["out"]:
        rows = emit_grid(evaluator, grid, cfg["out"], cfg["format"], threads)
    else:
        rows = evaluate_grid(evaluator, grid, threads)
    checks = _inversion_checks(res, rows, cfg, name, metric_points_are_tx=tx)
    extra = {"scalar_curvature": res.scalar_curvature, "singular_points": sum(1 for r in rows if r[-1]), "grid_points": len(rows)}
    return checks, extra


def run_invert_one(cfg: dict, threads: int):
    c = OneFunctionConstants(*cfg["r"], *cfg["c"])
    tx = cfg["chart"] == "tx"
    res = onefunction_solution(cfg["f"], c)
    if tx:
        _require_domain(res.pair.f1.d(1), cfg, "f'")
        metric, singular = res.metric, lambda t, x: res.is_singular(t, x)
    else:
        metric, singular = res.h_metric, lambda T, X: abs(res.D(T, X)) < 1e-12
    checks, extra = _grid_scenario(res, metric, cfg, threads, "invert-one", singular, tx)
    extra.update({"a_prime": c.a_prime, "b_prime": c.b_prime, "c_prime": c.c_prime, "chart": cfg["chart"]})
    return checks, extra


def run_invert_two_a(cfg: dict, threads: int):
    pair = FunctionPair(cfg["f1"], cfg["f2"])
    _require_domain(pair.f1.d(1), cfg, "f1'")
    res = caseA_solution(pair, CaseAConstants(*cfg["constants"]))
    checks, extra = _grid_scenario(res, res.metric, cfg, threads, "invert-two-a", res.is_singular, True)
    extra.update(res.extras)
    return checks, extra


def run_invert_two_b(cfg: dict, threads: int):
    pair = FunctionPair(cfg["f1"], cfg["f2"])
    _require_domain(pair.v, cfg, "v")
    c = CaseBConstants(*cfg["constants"])
    res = caseB_solution(pair, c)
    checks, extra = _grid_scenario(res, res.metric, cfg, threads, "invert-two-b", res.is_singular, True)
    drift = max(
        abs(caseB_constraint(pair, res.coefficients(t), t) - c.constraint_value)
        for t in np.linspace(cfg["t_min"], cfg["t_max"], cfg["t_count"])
    )
    checks.append(_result("invert-two-b.constraint", drift, cfg["tol_constraint"]))
    extra.update(res.extras)
    return checks, extra


def run_kruskal(cfg: dict, threads: int):
    chart = kr.KruskalChart(cfg["babs"])
    lines_out, checks = [], []
    for i, (xi, u0) in enumerate(cfg["line"]):
        line = kr.LineGeodesic(xi, u0)
        ctype = kr.classify(chart, line)
        tan = kr.tangency_check(chart, line)
        trav = kr.traversability(chart, line)
        lines_out.append({
            "xi": xi,
            "u0": u0,
            "K": kr.K_value(chart, line),
            "classification": ctype.value,
            "tangency": {"status": tan.status.value, "touch_point": tan.touch_point, "discriminant": tan.discriminant},
            "singular_hits_u": kr.singular_hits(chart, line),
            "traversability": trav.as_dict(),
        })
        agree = (ctype is kr.CausalType.NULL) == tan.is_tangent
        checks.append(_result(f"kruskal.line{i}.tangency_iff_null", 0.0 if agree else 1.0, 0.0))
    if cfg["out"]:
        grid = GridSpec.from_config(cfg, ("v", "u"))
        emit_grid(
            metric_evaluator(kr.metric_uv_field(chart), lambda v, u: abs(float(chart.D(u, v))) < 1e-12),
            grid, cfg["out"], cfg["format"], threads,
        )
    extra = {
        "chart": {
            "babs": chart.b_abs,
            "throat_half_width": chart.throat_half_width,
            "scalar_curvature": chart.constants().ricci_scalar,
            "note": "throat segment |v| < sqrt(|b'|/2) on u = 0, the value forced by D = 0",
        },
        "lines": lines_out,
    }
    return checks, extra


def run_verify(cfg: dict, threads: int):
    suite = SuiteConfig(
        seed=cfg["seed"],
        norm_draws=cfg["norm_draws"],
        reversal_cases=cfg["reversal_cases"],
        line_samples=cfg["line_samples"],
        timelike_samples=cfg["timelike_samples"],
        geodesic_members=cfg["geodesic_members"],
        grid=cfg["grid"],
        rk4_steps=cfg["rk4_steps"],
        tolerances=_parse_tol_overrides(cfg["tol"]),
    )
    return run_suite(suite, threads=threads), {}


RUNNERS = {
    "evolve": run_evolve,
    "trajectory": run_trajectory,
    "invert-one": run_invert_one,
    "invert-two-a": run_invert_two_a,
    "invert-two-b": run_invert_two_b,
    "kruskal": run_kruskal,
    "verify": run_verify,
}


def run(cfg: dict, threads: Optional[int] = None) -> tuple[int, dict]:
    """Execute a resolved config; returns (exit status, report)."""
    threads = thread_count() if threads is None else threads
    checks, extra = RUNNERS[cfg["scenario"]](cfg, threads)
    report = {
        "checks": [c.as_dict() for c in checks],
        "meta": {"config_hash": config_hash(cfg), "version": __version__, "scenario": cfg["scenario"]},
    }
    report.update(extra)
    status = 0 if all(c.passed for c in checks) else 1
    return status, _json_value(report)


def write_report(report: dict, path: str) -> None:
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        status, report = run(cfg)
    except (ConfigError, DomainError, ValueError, OSError) as exc:
        print(f"nlgeom {args.scenario}: error: {exc}", file=sys.stderr)
        return 2
    try:
        write_report(report, cfg["report"])
    except OSError as exc:
        print(f"nlgeom: cannot write report: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
