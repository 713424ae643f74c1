"""Named invariant checks used by the ``verify`` scenario.

Every check returns a ``CheckResult`` (name, value, tol, passed) where
``value`` is the measured defect and the check passes when value <= tol.
Random draws use a generator seeded from the suite seed and the check
name, so results do not depend on execution order.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from . import kruskal as kr
from .core import Coupling, ModePair, NonlinearSolution, equation_residual, gamma, norms
from .diffgeo import MetricField, connection_field, einstein_2d_defect, geodesic_residual, ricci
from .free_particle import (
    GaussianPacket,
    matrix_element_X,
    momentum_grid,
    orthonormalize,
    packet_state,
    trajectory_expectation,
    trajectory_params,
)
from .functions import FunctionPair
from .inversion import (
    COEFF_NAMES,
    CaseAConstants,
    CaseBConstants,
    OneFunctionConstants,
    ansatz_rhs,
    caseA_solution,
    caseB_constraint,
    caseB_solution,
    derive_ansatz_system,
    integrate_ansatz,
    onefunction_constants_matching,
    onefunction_solution,
    verify_gauge_roundtrip,
)
from .trajectory import TrajectoryParams, X_psi, partition_identity, time_reversal_check


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed}


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 20240611
    norm_draws: int = 1000
    reversal_cases: int = 10000
    line_samples: int = 10000
    timelike_samples: int = 1000
    geodesic_members: int = 20
    grid: int = 20
    rk4_steps: int = 400
    tolerances: dict = field(default_factory=dict)

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, CHECKS[name][1]))


CHECKS: dict[str, tuple[Callable[[SuiteConfig], float], float]] = {}


def check(name: str, tol: float):
    def register(fn):
        CHECKS[name] = (fn, tol)
        return fn

    return register


def run_check(name: str, cfg: SuiteConfig) -> CheckResult:
    fn, _ = CHECKS[name]
    tol = cfg.tol(name)
    try:
        value = float(fn(cfg))
    except Exception:  # a crashing check is a failing check
        value = math.inf
    passed = bool(math.isfinite(value) and value <= tol)
    return CheckResult(name, value, tol, passed)


def run_suite(cfg: Optional[SuiteConfig] = None, names=None, threads: int = 1) -> list[CheckResult]:
    """Run checks (all by default); results come back in registry order."""
    cfg = cfg or SuiteConfig()
    names = list(CHECKS) if names is None else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda n: run_check(n, cfg), names))
    else:
        results = [run_check(n, cfg) for n in names]
    order = {n: i for i, n in enumerate(CHECKS)}
    return sorted(results, key=lambda r: order[r.name])


# ---------------------------------------------------------------------------
# fixtures

def reference_solution() -> NonlinearSolution:
    modes = ModePair(
        energies=[0.0, 1.0, 2.5],
        coeff_a=[1.0, 0.0, 0.0],
        coeff_b=np.array([0.0, 1.0, 1.0j]) / math.sqrt(2.0),
    )
    return NonlinearSolution(Coupling(0.5, 0.3), 1.3, 0.4, modes)


def reference_packets(points: int = 1024):
    pa = GaussianPacket(x0=-1.0, p0=0.5, sigma=0.8)
    pb = GaussianPacket(x0=1.5, p0=-0.3, sigma=1.1)
    p = momentum_grid([pa, pb], points)
    return orthonormalize(packet_state(pa, p), packet_state(pb, p))


ONE_F = "exp(t)"
ONE_C = OneFunctionConstants(r0=1.3, r1=0.4, r2=0.9, c1=0.2, c2=-0.3, c3=0.7)
PAIR_A = ("exp(t)+t", "sin(t)")
CONST_A = CaseAConstants(r2=1.0, q1=0.2, p0=0.9, r1=0.3, q0=-0.4, r0=1.1)
PAIR_B = ("sin(t)", "cos(t)")
CONST_B = CaseBConstants(m1=1.0, m2=0.3, m3=0.8, alpha=0.2, beta=-0.1, r0=0.5)
T_RANGE = (0.0, 2.0)
X_RANGE = (-1.0, 1.0)


def one_result():
    return onefunction_solution(ONE_F, ONE_C)


def caseA_result():
    return caseA_solution(FunctionPair(*PAIR_A), CONST_A)


def caseB_result():
    return caseB_solution(FunctionPair(*PAIR_B), CONST_B)


def _sample_points(cfg: SuiteConfig, name: str, n: int = 12):
    rng = cfg.rng(name)
    return list(zip(rng.uniform(*T_RANGE, n), rng.uniform(*X_RANGE, n)))


def _rel(got: float, want: float) -> float:
    return abs(got - want) / (1.0 + abs(want))


# ---------------------------------------------------------------------------
# exact nonlinear solution

@check("core.equation_residual", 1e-6)
def _(cfg):
    sol = reference_solution()
    return max(max(equation_residual(sol, t, 1e-4)) for t in (-1.3, 0.0, 0.7, 2.1))


@check("core.residual_convergence_order", 0.5)
def _(cfg):
    # central differences: halving h should cut the residual by four
    sol = reference_solution()
    worst = 0.0
    for t in (-1.3, 0.7, 2.1):
        r1 = max(equation_residual(sol, t, 1e-2))
        r2 = max(equation_residual(sol, t, 5e-3))
        worst = max(worst, abs(r1 / r2 - 4.0))
    return worst


@check("core.norm_sum_conserved", 1e-10)
def _(cfg):
    rng = cfg.rng("core.norm_sum_conserved")
    worst = 0.0
    for _ in range(cfg.norm_draws):
        sol = NonlinearSolution(
            Coupling(rng.uniform(-2, 2), rng.uniform(-2, 2)), rng.uniform(0.1, 3), rng.uniform(-2, 2)
        )
        for t in rng.uniform(-5, 5, 4):
            n_psi, n_phi = norms(sol, float(t))
            worst = max(worst, abs(n_psi + n_phi - sol.N) / sol.N)
    return worst


@check("core.gamma_modulus", 1e-12)
def _(cfg):
    sol = reference_solution()
    w0, b = sol.omega0, sol.coupling.b
    return max(
        abs(abs(gamma(sol, t)) - w0 / math.cosh(2 * w0 * b * t)) / w0 for t in np.linspace(-5, 5, 41)
    )


@check("core.gamma_small_b_expansion", 1e-12)
def _(cfg):
    # log(gamma/w0) = (ia/b - 1) log cosh(2 w0 b t) = 2i a w0^2 b t^2 + O(b^2)
    base = reference_solution()
    w0, a = base.omega0, 0.5
    worst = 0.0
    for b in (0.0, 1e-6, -1e-7, 1e-9):
        sol = NonlinearSolution(Coupling(a, b), w0, base.theta)
        for t in (-3.0, 0.5, 4.0):
            want = w0 * np.exp(2j * a * w0**2 * b * t * t - 2 * (w0 * b * t) ** 2)
            worst = max(worst, abs(gamma(sol, t) - want) / w0)
    return worst


# ---------------------------------------------------------------------------
# free-particle realization and trajectories

@check("free.orthonormal_packets", 1e-12)
def _(cfg):
    sa, sb = reference_packets()
    return max(abs(sa.norm() - 1), abs(sb.norm() - 1), abs(np.vdot(sa.amp, sb.amp) * sa.dp))


@check("free.matrix_element_linear", 1e-7)
def _(cfg):
    sa, sb = reference_packets()
    worst = 0.0
    for s1, s2 in ((sa, sb), (sa, sa), (sb, sb)):
        for t, h in ((0.0, 0.5), (1.0, 0.25), (-2.0, 1.0)):
            z = [matrix_element_X(s1, s2, t + k * h) for k in (-1, 0, 1)]
            scale = max(abs(v) for v in z) + 1.0
            worst = max(worst, abs(z[0] - 2 * z[1] + z[2]) / scale)
    return worst


@check("free.trajectory_formula", 1e-9)
def _(cfg):
    sol = reference_solution()
    sa, sb = reference_packets()
    p = trajectory_params(sol, sa, sb)
    return max(
        abs(trajectory_expectation(sol, sa, sb, t) - float(X_psi(p, t))) for t in np.linspace(-3, 3, 13)
    )


def _random_trajectory(rng) -> TrajectoryParams:
    return TrajectoryParams(
        rng.uniform(-2, 2, 8), rng.uniform(0.1, 2), rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-1.5, 1.5)
    )


@check("trajectory.partition_identity", 1e-14)
def _(cfg):
    rng = cfg.rng("trajectory.partition_identity")
    worst = 0.0
    for _ in range(200):
        p = _random_trajectory(rng)
        t = rng.uniform(-3, 3, 25)
        worst = max(worst, float(np.max(np.abs(partition_identity(p, t) - 1.0))))
    return worst


@check("trajectory.time_reversal", 1e-12)
def _(cfg):
    rng = cfg.rng("trajectory.time_reversal")
    worst = 0.0
    for _ in range(cfg.reversal_cases):
        p = _random_trajectory(rng)
        t = rng.uniform(-3, 3)
        worst = max(worst, float(time_reversal_check(p, t)))
    return worst


# ---------------------------------------------------------------------------
# differential geometry toolkit on known metrics

def _sphere() -> MetricField:
    return MetricField(lambda T, X: np.array([1.0, 0.0, math.sin(T) ** 2]))


@check("diffgeo.sphere_curvature", 1e-6)
def _(cfg):
    m = _sphere()
    return max(abs(ricci(m, T, X, analytic=False)[1] - 2.0) for T, X in ((0.7, 0.1), (1.3, -2.0), (2.2, 0.4)))


@check("diffgeo.flat_curvature", 1e-8)
def _(cfg):
    m = MetricField(lambda T, X: np.array([-1.0, 0.3, 2.0]))
    return max(abs(ricci(m, T, X, analytic=False)[1]) for T, X in ((0.0, 0.0), (1.0, -1.0)))


# ---------------------------------------------------------------------------
# one-function inversion

@check("one.ansatz_system_derivation", 1e-12)
def _(cfg):
    system = derive_ansatz_system()
    names = (*COEFF_NAMES, "k00", "k01", "k1")
    vals = cfg.rng("one.ansatz_system_derivation").uniform(-2, 2, len(names))
    subs = dict(zip(names, vals))
    got = np.array([float(system[n].subs({s: subs[s.name] for s in system[n].free_symbols})) for n in COEFF_NAMES])
    return float(np.max(np.abs(got - ansatz_rhs(vals[:6], *vals[6:]))))


@check("one.line_geodesics", 1e-9)
def _(cfg):
    res = one_result()
    conn = connection_field(res.h_metric)
    rng = cfg.rng("one.line_geodesics")
    worst = 0.0
    for _ in range(cfg.geodesic_members):
        k, X0 = rng.uniform(-1, 1, 2)
        path = (lambda T, k=k, X0=X0: k * T + X0, lambda T, k=k: k, lambda T: 0.0)
        for T in rng.uniform(0.2, 1.2, 3):
            worst = max(worst, abs(geodesic_residual(path, conn, T)))
    return worst


def _one_grid(cfg):
    return [(T, X) for T in np.linspace(0.2, 1.2, cfg.grid) for X in np.linspace(-1, 1, cfg.grid)]


@check("one.einstein_defect", 1e-7)
def _(cfg):
    res = one_result()
    return max(einstein_2d_defect(res.h_metric, T, X) for T, X in _one_grid(cfg))


@check("one.constant_curvature", 1e-9)
def _(cfg):
    res = one_result()
    return max(abs(ricci(res.h_metric, T, X)[1] - ONE_C.ricci_scalar) for T, X in _one_grid(cfg))


@check("one.tx_chart_curvature", 1e-6)
def _(cfg):
    res = one_result()
    return max(_rel(ricci(res.metric, t, x)[1], ONE_C.ricci_scalar) for t, x in _sample_points(cfg, "one.tx"))


@check("one.printed_metric", 1e-12)
def _(cfg):
    res = one_result()
    worst = 0.0
    for t, x in _sample_points(cfg, "one.printed_metric"):
        got, want = res.metric.components(t, x), res.printed_g(t, x)
        worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
    return worst


@check("one.printed_determinant", 1e-12)
def _(cfg):
    res = one_result()
    return max(_rel(res.det_a(t, x), res.printed_det(t, x)) for t, x in _sample_points(cfg, "one.det"))


@check("one.printed_connection", 1e-10)
def _(cfg):
    from .diffgeo import christoffel

    res = one_result()
    worst = 0.0
    for T, X in _sample_points(cfg, "one.conn"):
        got = christoffel(res.h_metric, T, X).components
        want = res.printed_connection(T, X)
        worst = max(worst, max(_rel(got[k], want[k]) for k in want))
    return worst


def _roundtrip(res, cfg, name):
    return verify_gauge_roundtrip(res, _sample_points(cfg, name), analytic=False).max_deviation


def _rk4_vs_closed(res, cfg, t0: float = 0.0) -> float:
    sampled = integrate_ansatz(res.gauge, res.coefficients(t0), (t0, t0 + 2.0), cfg.rk4_steps)
    worst = 0.0
    for t, c in zip(sampled.t, sampled.values):
        want = res.coefficients(t)
        worst = max(worst, float(np.max(np.abs(c - want) / (1 + np.abs(want)))))
    return worst


@check("one.gauge_roundtrip", 1e-6)
def _(cfg):
    return _roundtrip(one_result(), cfg, "one.roundtrip")


@check("one.rk4_vs_closed_form", 1e-6)
def _(cfg):
    return _rk4_vs_closed(one_result(), cfg)


# ---------------------------------------------------------------------------
# two-function case A

def _family_residual(res, cfg, name, draw) -> float:
    conn = connection_field(res.metric)
    rng = cfg.rng(name)
    worst = 0.0
    for _ in range(cfg.geodesic_members):
        path = res.geodesic(*draw(rng))
        for t in rng.uniform(*T_RANGE, 2):
            x = float(path[0](t))
            if res.is_singular(t, x, 1e-6):
                continue
            worst = max(worst, abs(geodesic_residual(path, conn, t)))
    return worst


@check("caseA.family_geodesics", 1e-6)
def _(cfg):
    return _family_residual(caseA_result(), cfg, "caseA.geo", lambda rng: (rng.uniform(-1, 1),))


@check("caseA.scalar_curvature", 1e-6)
def _(cfg):
    res = caseA_result()
    worst = max(_rel(ricci(res.metric, t, x)[1], CONST_A.ricci_scalar) for t, x in _sample_points(cfg, "caseA.R"))
    return max(worst, _rel(CONST_A.ricci_scalar_expanded, CONST_A.ricci_scalar))


@check("caseA.printed_determinant", 1e-12)
def _(cfg):
    res = caseA_result()
    return max(_rel(res.det_a(t, x), res.printed_det(t, x)) for t, x in _sample_points(cfg, "caseA.det"))


@check("caseA.gauge_roundtrip", 1e-6)
def _(cfg):
    return _roundtrip(caseA_result(), cfg, "caseA.roundtrip")


@check("caseA.rk4_vs_closed_form", 1e-6)
def _(cfg):
    return _rk4_vs_closed(caseA_result(), cfg)


@check("caseA.f2_zero_reduction", 1e-9)
def _(cfg):
    one = onefunction_solution(ONE_F, ONE_C)
    red = caseA_solution(FunctionPair(ONE_F, 0), CaseAConstants.from_onefunction(ONE_C))
    worst = 0.0
    for t, x in _sample_points(cfg, "caseA.reduction"):
        got, want = red.metric.components(t, x), one.metric.components(t, x)
        worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
    return worst


# ---------------------------------------------------------------------------
# two-function case B

@check("caseB.family_geodesics", 1e-6)
def _(cfg):
    return _family_residual(caseB_result(), cfg, "caseB.geo", lambda rng: tuple(rng.uniform(-1, 1, 2)))


@check("caseB.scalar_curvature", 1e-6)
def _(cfg):
    res = caseB_result()
    worst = max(_rel(ricci(res.metric, t, x)[1], CONST_B.ricci_scalar) for t, x in _sample_points(cfg, "caseB.R"))
    return max(worst, _rel(CONST_B.ricci_scalar_expanded, CONST_B.ricci_scalar))


@check("caseB.printed_determinant", 1e-12)
def _(cfg):
    res = caseB_result()
    return max(_rel(res.det_a(t, x), res.printed_det(t, x)) for t, x in _sample_points(cfg, "caseB.det"))


def caseB_constraint_symbolic() -> sp.Expr:
    """A2 B2 - C^2 - (m1 m3 - m2^2/4) with f1, f2, f1', f2' as free symbols; simplifies to 0."""
    f1, f2, d1, d2 = sp.symbols("f1 f2 d1 d2", real=True)
    m1, m2, m3 = sp.symbols("m1 m2 m3", real=True)
    v = d1 * f2 - d2 * f1
    A2 = m1 * f1**2 + m2 * f1 * f2 + m3 * f2**2
    B2 = (m1 * d1**2 + m2 * d1 * d2 + m3 * d2**2) / v**2
    C = -(m1 * f1 * d1 + m3 * f2 * d2 + m2 * (d1 * f2 + d2 * f1) / 2) / v
    return sp.simplify(A2 * B2 - C**2 - (m1 * m3 - m2**2 / 4))


@check("caseB.constraint_algebraic", 0.0)
def _(cfg):
    return 0.0 if caseB_constraint_symbolic() == 0 else 1.0


@check("caseB.constraint_drift", 1e-8)
def _(cfg):
    res = caseB_result()
    pair = res.pair
    sampled = integrate_ansatz(res.gauge, res.coefficients(0.0), (0.0, 2.0), cfg.rk4_steps)
    target = CONST_B.constraint_value
    return max(abs(caseB_constraint(pair, c, t) - target) for t, c in zip(sampled.t, sampled.values))


@check("caseB.gauge_roundtrip", 1e-6)
def _(cfg):
    return _roundtrip(caseB_result(), cfg, "caseB.roundtrip")


@check("caseB.rk4_vs_closed_form", 1e-6)
def _(cfg):
    return _rk4_vs_closed(caseB_result(), cfg)


@check("caseB.w_zero_reduction", 1e-9)
def _(cfg):
    # f1 = t, f2 = 1: v = 1, w = 0, so K0 = K1 = 0 as for the one-function family with f = t
    res = caseB_solution(FunctionPair("t", 1), CONST_B)
    t0 = 0.3
    consts = onefunction_constants_matching("t", res.coefficients(t0), t0)
    one = onefunction_solution("t", consts)
    worst = 0.0
    for t in np.linspace(t0, t0 + 2.0, 9):
        got, want = res.coefficients(t), one.coefficients(t)
        worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
    return worst


# ---------------------------------------------------------------------------
# causal structure of the a' = c' = 0 chart

@check("kruskal.null_slope_at_origin", 0.0)
def _(cfg):
    return max(abs(kr.null_slope(kr.KruskalChart(b), 0.0) - 1.0) for b in (0.1, 1.0, 2.0, 7.5))


@check("kruskal.uv_pullback", 1e-12)
def _(cfg):
    ch = kr.KruskalChart(2.0)
    h = ch.th_metric()
    worst = 0.0
    for u, v in _sample_points(cfg, "kruskal.pullback"):
        if abs(ch.D(u, v)) < 1e-3:
            continue
        h00, h01, h11 = h.components(v + u, v - u)
        pulled = np.array([h00 + 2 * h01 + h11, h00 - h11, h00 - 2 * h01 + h11])
        want = kr.metric_uv(ch, u, v)
        worst = max(worst, float(np.max(np.abs(pulled - want) / (1 + np.abs(want)))))
    return worst


@check("kruskal.uv_curvature", 1e-9)
def _(cfg):
    ch = kr.KruskalChart(2.0)
    m = kr.metric_uv_field(ch)
    want = ch.constants().ricci_scalar
    return max(_rel(ricci(m, v, u)[1], want) for u, v in ((0.3, 0.1), (2.0, 0.5), (-1.0, 3.0)))


@check("kruskal.tangency_iff_null", 0.0)
def _(cfg):
    rng = cfg.rng("kruskal.tangency_iff_null")
    bad = 0
    for i in range(cfg.line_samples):
        ch = kr.KruskalChart(rng.uniform(0.1, 5.0))
        u0 = rng.uniform(-3, 3)
        if i % 2:
            xi = rng.choice([-1.0, 1.0]) * math.sqrt(kr.null_slope(ch, u0))
        else:
            xi = rng.uniform(-3, 3)
        line = kr.LineGeodesic(xi, u0)
        null = kr.classify(ch, line) is kr.CausalType.NULL
        bad += null != kr.tangency_check(ch, line).is_tangent
    return bad


@check("kruskal.spacelike_axis_traverses", 0.0)
def _(cfg):
    rep = kr.traversability(kr.KruskalChart(2.0), kr.LineGeodesic(0.0, 1.0))
    ok = rep.causal_type is kr.CausalType.SPACELIKE and rep.crosses_throat and rep.regions == ["III", "I"]
    return 0.0 if ok else 1.0


@check("kruskal.timelike_never_traverse", 0.0)
def _(cfg):
    rng = cfg.rng("kruskal.timelike_never_traverse")
    bad = found = 0
    while found < cfg.timelike_samples:
        ch = kr.KruskalChart(rng.uniform(0.1, 5.0))
        line = kr.LineGeodesic(rng.uniform(-5, 5), rng.uniform(-3, 3))
        if kr.classify(ch, line) is not kr.CausalType.TIMELIKE:
            continue
        found += 1
        bad += kr.traversability(ch, line).crosses_throat
    return bad


@check("kruskal.null_directions_iff_lorentzian", 0.0)
def _(cfg):
    rng = cfg.rng("kruskal.null_directions")
    ch = kr.KruskalChart(2.0)
    bad = 0
    for u, v in rng.uniform(-3, 3, (500, 2)):
        D = float(ch.D(u, v))
        if abs(D) < 1e-9:
            continue
        bad += (len(kr.null_directions(ch, u, v)) == 2) != (D < 0)
    return bad
