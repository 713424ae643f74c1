"""Causal structure of the one-function spacetime with a' = c' = 0, b' < 0.

In u, v coordinates (T = v + u, X = v - u) the line element is

    ds^2 = (2/D^2) [(2u^2 + |b'|) dv^2 - 4uv du dv + (2v^2 - |b'|) du^2],
    D = |b'| (2(v^2 - u^2) - |b'|),

so the metric is singular on the hyperbola v^2 - u^2 = |b'|/2.  Geodesics
are the straight lines v = xi (u - u0), and along them ds^2 = (2K/D^2) du^2
with K = xi^2 (2 u0^2 + |b'|) - |b'|.

Regions: I (u > |v|), II (v > |u|), III (u < -|v|), IV (v < -|u|).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diffgeo import MetricField, density_metric
from .inversion import OneFunctionConstants, onefunction_h_metric

CLASSIFY_TOL = 1e-12
TANGENT_TOL = 1e-10
SINGULAR_TOL = 1e-12


class CausalType(enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


class Tangency(enum.Enum):
    TANGENT = "tangent"
    ASYMPTOTIC = "asymptotically tangent"
    TRANSVERSAL = "transversal"
    DISJOINT = "disjoint"


@dataclass(frozen=True)
class KruskalChart:
    b_abs: float

    def __post_init__(self):
        if not self.b_abs > 0:
            raise ValueError("|b'| must be positive")

    @property
    def throat_half_width(self) -> float:
        """v at which the hyperbola crosses u = 0."""
        return math.sqrt(self.b_abs / 2.0)

    def D(self, u, v):
        return self.b_abs * (2.0 * (np.asarray(v) ** 2 - np.asarray(u) ** 2) - self.b_abs)

    def constants(self) -> OneFunctionConstants:
        return OneFunctionConstants.from_primes(0.0, -self.b_abs, 0.0, r2=1.0)

    def th_metric(self) -> MetricField:
        """The (T, X) chart metric this chart is a linear change of."""
        return onefunction_h_metric(self.constants())


@dataclass(frozen=True)
class LineGeodesic:
    """v = xi (u - u0)."""

    xi: float
    u0: float

    def v(self, u):
        return self.xi * (np.asarray(u) - self.u0)


class SingularPointError(ValueError):
    pass


def metric_uv(chart: KruskalChart, u: float, v: float, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Components (g_vv, g_vu, g_uu), coordinate order (v, u)."""
    D = float(chart.D(u, v))
    if abs(D) < tol:
        raise SingularPointError(f"D = 0 at (u, v) = ({u}, {v})")
    b = chart.b_abs
    pref = 2.0 / D**2
    return pref * np.array([2 * u * u + b, -2 * u * v, 2 * v * v - b])


def metric_uv_field(chart: KruskalChart) -> MetricField:
    """metric_uv as a MetricField in (v, u) order, with an exact jet."""
    b = chart.b_abs
    return density_metric(lambda v, u: _uv_density_jet(b, v, u))


def _uv_density_jet(b: float, v: float, u: float):
    # bracket P = [2u^2+b, -2uv, 2v^2-b] has det P = D; a = 2^(-1/3) P gives a / Det(a)^2 = 2P/D^2
    s = 2.0 ** (-1.0 / 3.0)
    a = s * np.array([2 * u * u + b, -2 * u * v, 2 * v * v - b])
    da = s * np.array([[0.0, -2 * u, 4 * v], [4 * u, -2 * v, 0.0]])
    dda = s * np.array([[0.0, 0.0, 4.0], [0.0, -2.0, 0.0], [4.0, 0.0, 0.0]])
    return a, da, dda


def K_value(chart: KruskalChart, line: LineGeodesic) -> float:
    return line.xi**2 * (2 * line.u0**2 + chart.b_abs) - chart.b_abs


def null_slope(chart: KruskalChart, u0: float) -> float:
    """xi^2 of the null line with intercept u0."""
    return chart.b_abs / (2 * u0 * u0 + chart.b_abs)


def classify(chart: KruskalChart, line: LineGeodesic, tol: float = CLASSIFY_TOL) -> CausalType:
    K = K_value(chart, line)
    if abs(K) <= tol * max(1.0, chart.b_abs):
        return CausalType.NULL
    return CausalType.TIMELIKE if K > 0 else CausalType.SPACELIKE


def _intersection_quadratic(chart: KruskalChart, line: LineGeodesic) -> tuple[float, float, float]:
    """Coefficients (A, B, C) of A u^2 + B u + C = 0 for line ∩ {v^2 - u^2 = |b'|/2}."""
    xi2 = line.xi**2
    return xi2 - 1.0, -2.0 * xi2 * line.u0, xi2 * line.u0**2 - chart.b_abs / 2.0


def singular_hits(chart: KruskalChart, line: LineGeodesic) -> list[float]:
    """u-values where the line meets the singular hyperbola, ascending."""
    A, B, C = _intersection_quadratic(chart, line)
    scale = max(abs(A), abs(B), abs(C), 1.0)
    if abs(A) <= 1e-15 * scale:
        return [] if abs(B) <= 1e-15 * scale else [-C / B]
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    r = math.sqrt(disc)
    # numerically stable pair of roots
    q = -0.5 * (B + math.copysign(r, B))
    roots = {q / A, C / q} if q != 0 else {0.0}
    return sorted(roots)


@dataclass(frozen=True)
class TangencyResult:
    status: Tangency
    touch_point: Optional[tuple[float, float]]
    discriminant: float

    @property
    def is_tangent(self) -> bool:
        return self.status in (Tangency.TANGENT, Tangency.ASYMPTOTIC)


def tangency_check(chart: KruskalChart, line: LineGeodesic, tol: float = TANGENT_TOL) -> TangencyResult:
    """Tangency of the line to the singular hyperbola.

    The reduced discriminant B^2/4 - AC of the intersection quadratic equals
    K/2, so tangency and nullity coincide.  When xi^2 = 1 the quadratic is
    degenerate; the u0 = 0 lines are then asymptotic to both branches.
    """
    A, B, C = _intersection_quadratic(chart, line)
    disc = B * B / 4 - A * C
    scale = max(B * B / 4, abs(A * C), chart.b_abs, 1e-300)
    degenerate = abs(A) <= tol
    if abs(disc) <= tol * scale:
        # xi^2 ~ 1: the touch point runs off to infinity
        if degenerate:
            return TangencyResult(Tangency.ASYMPTOTIC, None, disc)
        u = -B / (2 * A)
        return TangencyResult(Tangency.TANGENT, (u, float(line.v(u))), disc)
    if degenerate:
        u = -C / B
        return TangencyResult(Tangency.TRANSVERSAL, (u, float(line.v(u))), disc)
    if disc < 0:
        return TangencyResult(Tangency.DISJOINT, None, disc)
    return TangencyResult(Tangency.TRANSVERSAL, None, disc)


def region(u: float, v: float) -> Optional[str]:
    if u > abs(v):
        return "I"
    if v > abs(u):
        return "II"
    if u < -abs(v):
        return "III"
    if v < -abs(u):
        return "IV"
    return None  # on a horizon line


@dataclass
class TraversabilityReport:
    causal_type: CausalType
    regions: list[str]
    crosses_throat: bool
    hits_singularity: bool
    throat_point: Optional[tuple[float, float]]
    first_hit_forward: Optional[tuple[float, float]]
    first_hit_backward: Optional[tuple[float, float]]
    horizon: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "causal_type": self.causal_type.value,
            "regions": self.regions,
            "crosses_throat": self.crosses_throat,
            "hits_singularity": self.hits_singularity,
            "throat_point": self.throat_point,
            "first_hit_forward": self.first_hit_forward,
            "first_hit_backward": self.first_hit_backward,
            "horizon": self.horizon,
            "notes": self.notes,
        }


def traversability(chart: KruskalChart, line: LineGeodesic) -> TraversabilityReport:
    """Walk the line through u = 0 and record what its singularity-free piece visits.

    The piece of the line containing its u = 0 point is bounded by the
    nearest singular hits on either side.  The line crosses the throat when
    that piece lies in D < 0 at u = 0 and reaches both region I and
    region III.
    """
    hits = singular_hits(chart, line)
    v_axis = float(line.v(0.0)) + 0.0  # no -0.0 in reports
    fwd = [u for u in hits if u > 0]
    bwd = [u for u in hits if u < 0]
    on_axis = [u for u in hits if u == 0]
    lo = max(bwd) if bwd else -math.inf
    hi = min(fwd) if fwd else math.inf
    regions = _regions_on_segment(line, lo, hi) if not on_axis else []
    in_throat = abs(v_axis) < chart.throat_half_width and not on_axis
    crosses = in_throat and "I" in regions and "III" in regions
    notes = []
    horizon = False
    ctype = classify(chart, line)
    if ctype is CausalType.NULL and abs(line.u0) <= CLASSIFY_TOL and abs(abs(line.xi) - 1) <= CLASSIFY_TOL:
        horizon = True
        notes.append("null line through the origin: horizon between escaping and captured timelike lines")
    return TraversabilityReport(
        causal_type=ctype,
        regions=regions,
        crosses_throat=crosses,
        hits_singularity=bool(hits),
        throat_point=(0.0, v_axis) if in_throat else None,
        first_hit_forward=(hi, float(line.v(hi))) if fwd else None,
        first_hit_backward=(lo, float(line.v(lo))) if bwd else None,
        horizon=horizon,
        notes=notes,
    )


def _regions_on_segment(line: LineGeodesic, lo: float, hi: float) -> list[str]:
    """Ordered region labels visited for u in (lo, hi)."""
    cuts = {0.0}
    for s in (1.0, -1.0):  # v = s u
        if line.xi != s:
            cuts.add(line.xi * line.u0 / (line.xi - s))
    pts = sorted(c for c in cuts if lo < c < hi)
    left = lo if math.isfinite(lo) else (pts[0] if pts else 0.0) - 1e6
    right = hi if math.isfinite(hi) else (pts[-1] if pts else 0.0) + 1e6
    edges = [left, *pts, right]
    out: list[str] = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        r = region(m, float(line.v(m)))
        if r is not None and (not out or out[-1] != r):
            out.append(r)
    return out


def null_directions(chart: KruskalChart, u: float, v: float) -> list[float]:
    """Slopes xi = dv/du of the null lines through (u, v); two exactly where D < 0.

    Solves (2u^2 + |b'|) xi^2 - 4uv xi + (2v^2 - |b'|) = 0.
    """
    b = chart.b_abs
    A, B, C = 2 * u * u + b, -4 * u * v, 2 * v * v - b
    disc = B * B - 4 * A * C  # = -4 D
    if disc < 0:
        return []
    if disc == 0:
        return [-B / (2 * A)]
    r = math.sqrt(disc)
    return sorted({(-B - r) / (2 * A), (-B + r) / (2 * A)})


def line_through(u: float, v: float, xi: float) -> LineGeodesic:
    if xi == 0:
        raise ValueError("horizontal lines v = const have no finite intercept unless v = 0")
    return LineGeodesic(xi, u - v / xi)
