"""Two-dimensional metric toolkit: connection, curvature, geodesics.

Coordinates are (x0, x1), written (T, X) here; index 0 is the evolution
parameter.  A metric is stored as its three independent components
(g00, g01, g11).  Derivatives come from an analytic jet when the field
provides one, otherwise from fourth-order central differences.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

SINGULAR_DET = 1e-12
BLOWUP_DET = 1e12

# (g00, g01, g11) -> full symmetric matrix
_SYM = np.array([[0, 1], [1, 2]])


class SingularMetricError(ValueError):
    pass


class Signature(enum.Enum):
    EUCLIDEAN = "Euclidean"
    MINKOWSKI = "Minkowski"
    SINGULAR = "Singular"


Jet = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class MetricField:
    """Metric components on a 2D chart.

    ``components(T, X)`` returns (g00, g01, g11).  ``jet(T, X)``, if given,
    returns (g, dg, ddg) with dg[a] = d_a g and ddg[k] for the second
    partials ordered (TT, TX, XX); each entry is a component triple.
    """

    components: Callable[[float, float], np.ndarray]
    jet: Optional[Callable[[float, float], Jet]] = None
    fd_step: Optional[float] = None

    def matrix(self, T: float, X: float) -> np.ndarray:
        return _full(np.asarray(self.components(T, X), dtype=float))

    def det(self, T: float, X: float) -> float:
        g00, g01, g11 = self.components(T, X)
        with np.errstate(invalid="ignore"):
            return float(g00 * g11 - g01 * g01)


def _full(c: np.ndarray) -> np.ndarray:
    """Component triples (..., 3) -> symmetric matrices (..., 2, 2)."""
    return c[..., _SYM]


def _step(coord: float, base: Optional[float]) -> float:
    return (base if base is not None else 1e-4) * (1.0 + abs(coord))


def fd_jet(m: MetricField, T: float, X: float, second_step_scale: float = 10.0) -> Jet:
    """Metric jet from central differences.

    First partials use a five-point stencil with step fd_step*(1+|coord|).
    Second partials use a wider step (``second_step_scale`` times larger) to
    keep the h^-2 rounding amplification in check.
    """
    f = lambda a, b: np.asarray(m.components(a, b), dtype=float)
    hT, hX = _step(T, m.fd_step), _step(X, m.fd_step)
    g = f(T, X)
    dT = (f(T - 2 * hT, X) - 8 * f(T - hT, X) + 8 * f(T + hT, X) - f(T + 2 * hT, X)) / (12 * hT)
    dX = (f(T, X - 2 * hX) - 8 * f(T, X - hX) + 8 * f(T, X + hX) - f(T, X + 2 * hX)) / (12 * hX)

    HT, HX = second_step_scale * hT, second_step_scale * hX

    def d2(fun, h):
        return (-fun(-2 * h) + 16 * fun(-h) - 30 * fun(0.0) + 16 * fun(h) - fun(2 * h)) / (12 * h * h)

    dTT = d2(lambda s: f(T + s, X), HT)
    dXX = d2(lambda s: f(T, X + s), HX)

    def dx_at(Tp):
        return (f(Tp, X - 2 * HX) - 8 * f(Tp, X - HX) + 8 * f(Tp, X + HX) - f(Tp, X + 2 * HX)) / (12 * HX)

    dTX = (dx_at(T - 2 * HT) - 8 * dx_at(T - HT) + 8 * dx_at(T + HT) - dx_at(T + 2 * HT)) / (12 * HT)
    return g, np.array([dT, dX]), np.array([dTT, dTX, dXX])


def metric_jet(m: MetricField, T: float, X: float, analytic: bool = True) -> Jet:
    if analytic and m.jet is not None:
        g, dg, ddg = m.jet(T, X)
        return np.asarray(g, float), np.asarray(dg, float), np.asarray(ddg, float)
    return fd_jet(m, T, X)


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols Gamma^i_jk at one point, as a (2, 2, 2) array [i, j, k]."""

    gamma: np.ndarray

    def __getitem__(self, idx):
        return self.gamma[idx]

    @property
    def components(self) -> dict[str, float]:
        G = self.gamma
        return {
            "G0_00": G[0, 0, 0], "G0_01": G[0, 0, 1], "G0_11": G[0, 1, 1],
            "G1_00": G[1, 0, 0], "G1_01": G[1, 0, 1], "G1_11": G[1, 1, 1],
        }


@dataclass(frozen=True)
class GaugeInvariants:
    """The four projectively invariant combinations, as functions of (t, x)."""

    k0: Callable[[float, float], float]
    k1: Callable[[float, float], float]
    k2: Callable[[float, float], float]
    k3: Callable[[float, float], float]

    def at(self, t: float, x: float) -> np.ndarray:
        return np.array([self.k0(t, x), self.k1(t, x), self.k2(t, x), self.k3(t, x)], dtype=float)


def gauge_combinations(conn: Connection) -> np.ndarray:
    """(K0, K1, K2, K3) = (-G1_00, G0_00 - 2 G1_01, -G1_11 + 2 G0_01, G0_11)."""
    G = conn.gamma
    return np.array([
        -G[1, 0, 0],
        G[0, 0, 0] - 2 * G[1, 0, 1],
        -G[1, 1, 1] + 2 * G[0, 0, 1],
        G[0, 1, 1],
    ])


def _inverse(g: np.ndarray, tol: float = SINGULAR_DET) -> np.ndarray:
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    if abs(det) < tol or not np.isfinite(det):
        raise SingularMetricError(f"metric is singular (det = {det:.3e})")
    return np.array([[g[1, 1], -g[0, 1]], [-g[0, 1], g[0, 0]]]) / det


def _christoffel_from_jet(g: np.ndarray, dg: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gamma[i,j,k] plus the inverse metric and the lowered symbols Gamma_{l,jk}."""
    G = _full(g)
    dG = _full(dg)  # dG[k, j, l] = d_k g_jl
    ginv = _inverse(G)
    # lowered[l, j, k] = 1/2 (g_jl,k + g_lk,j - g_jk,l)
    lowered = 0.5 * (
        np.einsum("kjl->ljk", dG) + np.einsum("jlk->ljk", dG) - np.einsum("ljk->ljk", dG)
    )
    return np.einsum("il,ljk->ijk", ginv, lowered), ginv, lowered


def christoffel(m: MetricField, T: float, X: float, analytic: bool = True) -> Connection:
    g, dg, _ = metric_jet(m, T, X, analytic)
    gamma, _, _ = _christoffel_from_jet(g, dg)
    return Connection(gamma)


def _second_full(ddg: np.ndarray) -> np.ndarray:
    """ddg ordered (TT, TX, XX) -> H[a, b, i, j] = d_a d_b g_ij."""
    H = np.empty((2, 2, 2, 2))
    full = _full(ddg)
    H[0, 0], H[0, 1], H[1, 0], H[1, 1] = full[0], full[1], full[1], full[2]
    return H


def connection_derivative(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(Gamma[i,j,k], dGamma[c,i,j,k] = d_c Gamma^i_jk) from a metric jet."""
    gamma, ginv, lowered = _christoffel_from_jet(g, dg)
    dG = _full(dg)
    H = _second_full(ddg)  # H[c, k, j, l] = d_c d_k g_jl
    # d_c lowered[l, j, k]
    dlow = 0.5 * (
        np.einsum("ckjl->cljk", H) + np.einsum("cjlk->cljk", H) - np.einsum("cljk->cljk", H)
    )
    # d_c g^il = -g^im (d_c g_mn) g^nl
    dginv = -np.einsum("im,cmn,nl->cil", ginv, dG, ginv)
    dgamma = np.einsum("cil,ljk->cijk", dginv, lowered) + np.einsum("il,cljk->cijk", ginv, dlow)
    return gamma, dgamma


def ricci(m: MetricField, T: float, X: float, analytic: bool = True) -> tuple[np.ndarray, float]:
    """Ricci tensor R_bd = d_a G^a_bd - d_d G^a_ba + G^a_ae G^e_bd - G^a_de G^e_ba, and R."""
    g, dg, ddg = metric_jet(m, T, X, analytic)
    gamma, dgamma = connection_derivative(g, dg, ddg)
    ric = (
        np.einsum("aabd->bd", dgamma)
        - np.einsum("daba->bd", dgamma)
        + np.einsum("aae,ebd->bd", gamma, gamma)
        - np.einsum("ade,eba->bd", gamma, gamma)
    )
    ginv = _inverse(_full(g))
    return ric, float(np.einsum("bd,bd->", ginv, ric))


def einstein_2d_defect(m: MetricField, T: float, X: float, analytic: bool = True) -> float:
    """max |R_ab - (R/2) g_ab|; zero for any genuine 2D metric."""
    ric, scalar = ricci(m, T, X, analytic)
    return float(np.max(np.abs(ric - 0.5 * scalar * m.matrix(T, X))))


def signature(m: MetricField, T: float, X: float, tol: float = SINGULAR_DET, blowup: float = BLOWUP_DET) -> Signature:
    try:
        det = m.det(T, X)
    except ZeroDivisionError:
        return Signature.SINGULAR
    if not np.isfinite(det) or abs(det) < tol or abs(det) > blowup:
        return Signature.SINGULAR
    return Signature.EUCLIDEAN if det > 0 else Signature.MINKOWSKI


# ---------------------------------------------------------------------------
# geodesics in the non-affine form x'' + ... = 0 with t = x0 as parameter

ConnectionField = Callable[[float, float], Connection]


def connection_field(m: MetricField, analytic: bool = True) -> ConnectionField:
    return lambda T, X: christoffel(m, T, X, analytic)


def geodesic_acceleration(conn: Connection, xdot: float) -> float:
    """x'' required by the geodesic equation for slope xdot."""
    G = conn.gamma
    return -(
        (2 * G[1, 1, 0] - G[0, 0, 0]) * xdot
        + (G[1, 1, 1] - 2 * G[0, 1, 0]) * xdot**2
        - G[0, 1, 1] * xdot**3
        + G[1, 0, 0]
    )


def geodesic_residual(path, conn_field: ConnectionField, t: float, h: float = 1e-4) -> float:
    """Left side of the 2D geodesic equation along x1 = path(t).

    ``path`` is either a callable returning x1(t), or a tuple
    (x, xdot, xddot) of callables for analytic derivatives, or a pair of
    arrays (ts, xs) of samples (interpolated with a cubic spline).
    """
    x, xd, xdd = _path_derivatives(path, t, h)
    return float(xdd - geodesic_acceleration(conn_field(t, x), xd))


def _path_derivatives(path, t: float, h: float):
    if callable(path):
        f = path
        x = f(t)
        xd = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
        H = 10 * h
        xdd = (-f(t - 2 * H) + 16 * f(t - H) - 30 * x + 16 * f(t + H) - f(t + 2 * H)) / (12 * H * H)
        return x, xd, xdd
    if len(path) == 3 and all(callable(p) for p in path):
        return path[0](t), path[1](t), path[2](t)
    ts, xs = (np.asarray(v, dtype=float) for v in path)
    if len(ts) < 4:
        raise ValueError("need at least four path samples")
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(ts, xs)
    return float(spline(t)), float(spline(t, 1)), float(spline(t, 2))


@dataclass
class GeodesicPath:
    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    halted: bool = False
    reason: str = ""


def integrate_geodesic(
    conn_field: ConnectionField,
    x0: float,
    xdot0: float,
    t_span: tuple[float, float],
    steps: int,
    metric: Optional[MetricField] = None,
    singular_tol: float = SINGULAR_DET,
    blowup: float = BLOWUP_DET,
) -> GeodesicPath:
    """Classic RK4 on (x1, dx1/dt).

    If ``metric`` is given the integration halts when |det g| leaves
    [singular_tol, blowup] or det g changes sign between steps, i.e. the
    path reaches or crosses a singular locus.
    """
    if steps < 16:
        raise ValueError("use at least 16 steps")
    t0, t1 = t_span
    h = (t1 - t0) / steps
    if h == 0 or abs(h) < 1e-14 * max(1.0, abs(t0)):
        raise ValueError("step size underflow")

    def rhs(t, y):
        return np.array([y[1], geodesic_acceleration(conn_field(t, y[0]), y[1])])

    ts = t0 + h * np.arange(steps + 1)
    ys = np.empty((steps + 1, 2))
    ys[0] = (x0, xdot0)
    prev_sign = 0.0
    for n in range(steps):
        t, y = ts[n], ys[n]
        if metric is not None:
            det = metric.det(t, y[0])
            # a sign flip between steps means the locus was stepped over
            if not (singular_tol <= abs(det) <= blowup) or det * prev_sign < 0:
                return GeodesicPath(ts[: n + 1], ys[: n + 1, 0], ys[: n + 1, 1], True, "singular locus")
            prev_sign = np.sign(det)
        try:
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
        except SingularMetricError as exc:
            return GeodesicPath(ts[: n + 1], ys[: n + 1, 0], ys[: n + 1, 1], True, str(exc))
        ys[n + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(ys[n + 1])):
            return GeodesicPath(ts[: n + 1], ys[: n + 1, 0], ys[: n + 1, 1], True, "non-finite state")
    return GeodesicPath(ts, ys[:, 0], ys[:, 1])


# ---------------------------------------------------------------------------
# building jets from a density a_ij with g = a / Det(a)^2

def density_metric(a_jet: Callable[[float, float], Jet], fd_step: Optional[float] = None) -> MetricField:
    """MetricField for g_ij = a_ij / Det(a)^2 given the jet of a_ij."""

    def components(T, X):
        a = np.asarray(a_jet(T, X)[0], dtype=float)
        det = a[0] * a[2] - a[1] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):  # inf/nan on the singular locus
            return a / det**2

    def jet(T, X):
        return _density_to_metric_jet(*a_jet(T, X))

    return MetricField(components, jet, fd_step)


def _density_to_metric_jet(a, da, dda) -> Jet:
    a, da, dda = (np.asarray(v, dtype=float) for v in (a, da, dda))

    def det_of(p, q):
        # bilinear form B(p, q) with Det(a) = B(a, a)
        return 0.5 * (p[0] * q[2] + q[0] * p[2]) - p[1] * q[1]

    det = det_of(a, a)
    ddet = np.array([2 * det_of(a, da[c]) for c in range(2)])
    # second partials ordered (TT, TX, XX) -> index pairs
    pairs = ((0, 0), (0, 1), (1, 1))
    dddet = np.array([2 * det_of(da[i], da[j]) + 2 * det_of(a, dda[n]) for n, (i, j) in enumerate(pairs)])
    s = det**-2.0
    ds = -2.0 * det**-3.0 * ddet
    dds = np.array([6.0 * det**-4.0 * ddet[i] * ddet[j] - 2.0 * det**-3.0 * dddet[n] for n, (i, j) in enumerate(pairs)])
    g = a * s
    dg = np.array([da[c] * s + a * ds[c] for c in range(2)])
    ddg = np.array([
        dda[n] * s + da[i] * ds[j] + da[j] * ds[i] + a * dds[n] for n, (i, j) in enumerate(pairs)
    ])
    return g, dg, ddg
