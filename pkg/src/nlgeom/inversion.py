"""Metrics whose geodesics are a prescribed family of curves x = x(t).

The geodesic family fixes four gauge-invariant combinations K0..K3 of the
connection.  The density a_ij = |det g|^(-2/3) g_ij then obeys a linear
first-order system driven by the K_i, and the metric follows from
g_ij = a_ij / |Det a|^2.  For the families handled here K2 = K3 = 0,
K1 = K1(t) and K0 = k00(t) + k01(t) x, so a_ij is polynomial in x:

    a11 = p0,   a01 = q0 + q1 x,   a00 = r0 + r1 x + r2 x^2

and matching powers of x leaves six ODEs in t (``ansatz_rhs``).

Three families are covered:

    one-function   x = k f(t) + k0
    case A         x = k f1(t) + f2(t)
    case B         x = kappa1 f1(t) + kappa2 f2(t)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp

from .diffgeo import (
    GaugeInvariants,
    MetricField,
    christoffel,
    density_metric,
    gauge_combinations,
)
from .functions import T_SYM, DomainError, FunctionPair, TimeFunction, require_nonvanishing

COEFF_NAMES = ("p0", "q0", "q1", "r0", "r1", "r2")
P0, Q0, Q1, R0, R1, R2 = range(6)


# ---------------------------------------------------------------------------
# gauge invariants of each family

def k_onefunction(f) -> GaugeInvariants:
    """K1 = f''/f', the rest zero."""
    f = TimeFunction.of(f)

    def k1(t, x=0.0):
        d1 = f.d(1)(t)
        require_nonvanishing(f.d(1), t, "f'")
        return f.d(2)(t) / d1

    zero = lambda t, x=0.0: 0.0 * np.asarray(t, dtype=float)
    return GaugeInvariants(zero, k1, zero, zero)


def k_caseA(pair: FunctionPair) -> GaugeInvariants:
    """K1 = f1''/f1', K0 = -w/f1'."""

    def k0(t, x=0.0):
        require_nonvanishing(pair.f1.d(1), t, "f1'")
        return -pair.w(t) / pair.f1.d(1)(t)

    def k1(t, x=0.0):
        require_nonvanishing(pair.f1.d(1), t, "f1'")
        return pair.f1.d(2)(t) / pair.f1.d(1)(t)

    zero = lambda t, x=0.0: 0.0 * np.asarray(t, dtype=float)
    return GaugeInvariants(k0, k1, zero, zero)


def k_caseB(pair: FunctionPair) -> GaugeInvariants:
    """K1 = v'/v, K0 = -(w/v) x."""

    def k0(t, x=0.0):
        require_nonvanishing(pair.v, t, "v")
        return -(pair.w(t) / pair.v(t)) * x

    def k1(t, x=0.0):
        require_nonvanishing(pair.v, t, "v")
        return pair.vdot(t) / pair.v(t)

    zero = lambda t, x=0.0: 0.0 * np.asarray(t, dtype=float)
    return GaugeInvariants(k0, k1, zero, zero)


# ---------------------------------------------------------------------------
# the six-coefficient system

def ansatz_rhs(c: np.ndarray, k00: float, k01: float, k1: float) -> np.ndarray:
    """d/dt of (p0, q0, q1, r0, r1, r2) for K0 = k00 + k01 x, K1 = k1, K2 = K3 = 0."""
    p0, q0, q1, r0, r1, r2 = c
    return np.array([
        -4.0 / 3.0 * k1 * p0 - 2.0 * q1,
        -k1 / 3.0 * q0 - 0.5 * r1 - k00 * p0,
        -k1 / 3.0 * q1 - r2 - k01 * p0,
        2.0 / 3.0 * k1 * r0 - 2.0 * k00 * q0,
        2.0 / 3.0 * k1 * r1 - 2.0 * k00 * q1 - 2.0 * k01 * q0,
        2.0 / 3.0 * k1 * r2 - 2.0 * k01 * q1,
    ])


def derive_ansatz_system() -> dict[str, sp.Expr]:
    """Symbolically insert the polynomial ansatz into the general density equations.

    Returns d(coefficient)/dt for each coefficient, as sympy expressions in
    symbols k00, k01, k1 and the coefficient names.  Used to cross-check
    ``ansatz_rhs``.
    """
    x = sp.Symbol("x")
    k00, k01, k1 = sp.symbols("k00 k01 k1")
    c = sp.symbols(" ".join(COEFF_NAMES))
    dc = sp.symbols(" ".join("d" + n for n in COEFF_NAMES))
    p0, q0, q1, r0, r1, r2 = c
    dp0, dq0, dq1, dr0, dr1, dr2 = dc
    a00, a01, a11 = r0 + r1 * x + r2 * x**2, q0 + q1 * x, p0
    da00, da01, da11 = dr0 + dr1 * x + dr2 * x**2, dq0 + dq1 * x, dp0
    K0, K1, K2, K3 = k00 + k01 * x, k1, 0, 0
    third = sp.Rational(1, 3)
    eqs = [
        da00 + 2 * K0 * a01 - 2 * third * K1 * a00,
        2 * da01 + sp.diff(a00, x) + 2 * K0 * a11 + 2 * third * K1 * a01 - 4 * third * K2 * a00,
        da11 + 2 * sp.diff(a01, x) + 4 * third * K1 * a11 - 2 * third * K2 * a01 - 2 * K3 * a00,
        sp.diff(a11, x) + 2 * third * K2 * a11 - 2 * K3 * a01,
    ]
    matched = []
    for eq in eqs:
        poly = sp.Poly(sp.expand(eq), x)
        matched.extend(coef for coef in poly.all_coeffs() if coef != 0)
    sol = sp.solve(matched, dc, dict=True)
    if len(sol) != 1:
        raise RuntimeError("ansatz system is not uniquely solvable")
    return {name: sp.simplify(sol[0][d]) for name, d in zip(COEFF_NAMES, dc)}


def density_components(c: np.ndarray, x: float) -> np.ndarray:
    p0, q0, q1, r0, r1, r2 = c
    return np.array([r0 + r1 * x + r2 * x * x, q0 + q1 * x, p0])


def density_jet(c: np.ndarray, cd: np.ndarray, cdd: np.ndarray, x: float):
    """(a, da, dda) in the (t, x) chart from coefficient values and t-derivatives."""
    a = density_components(c, x)
    da_t = density_components(cd, x)
    da_x = np.array([c[R1] + 2 * c[R2] * x, c[Q1], 0.0])
    dda_tt = density_components(cdd, x)
    dda_tx = np.array([cd[R1] + 2 * cd[R2] * x, cd[Q1], 0.0])
    dda_xx = np.array([2 * c[R2], 0.0, 0.0])
    return a, np.array([da_t, da_x]), np.array([dda_tt, dda_tx, dda_xx])


def density_det(c: np.ndarray, x: float) -> float:
    a00, a01, a11 = density_components(c, x)
    return float(a00 * a11 - a01 * a01)


@dataclass(frozen=True)
class AnsatzCoefficients:
    """Closed-form coefficient functions; ``jet(t)`` returns a (3, 6) array of values and t-derivatives."""

    jet: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return self.jet(t)[0]

    def density(self, t: float, x: float) -> np.ndarray:
        return density_components(self(t), x)

    def density_jet(self, t: float, x: float):
        c, cd, cdd = self.jet(t)
        return density_jet(c, cd, cdd, x)

    def det(self, t: float, x: float) -> float:
        return density_det(self(t), x)


@dataclass
class SampledCoefficients:
    t: np.ndarray
    values: np.ndarray  # (n, 6)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, COEFF_NAMES.index(name)]


def _split_gauge(K: GaugeInvariants, t: float) -> tuple[float, float, float]:
    k00 = float(K.k0(t, 0.0))
    k01 = float(K.k0(t, 1.0)) - k00
    return k00, k01, float(K.k1(t, 0.0))


def check_polynomial_gauge(K: GaugeInvariants, t: float, tol: float = 1e-12) -> None:
    """The polynomial ansatz needs K2 = K3 = 0, K1 independent of x and K0 linear in x."""
    for x in (0.0, 1.0, -2.0):
        if abs(K.k2(t, x)) > tol or abs(K.k3(t, x)) > tol:
            raise ValueError("polynomial ansatz requires K2 = K3 = 0")
    if abs(K.k1(t, -2.0) - K.k1(t, 0.0)) > tol * (1 + abs(K.k1(t, 0.0))):
        raise ValueError("polynomial ansatz requires K1 independent of x")
    k00, k01, _ = _split_gauge(K, t)
    if abs(K.k0(t, -2.0) - (k00 - 2.0 * k01)) > tol * (1 + abs(k00) + abs(k01)):
        raise ValueError("polynomial ansatz requires K0 linear in x")


def integrate_ansatz(
    K: GaugeInvariants, init: Sequence[float], t_span: tuple[float, float], steps: int
) -> SampledCoefficients:
    """RK4 for the six coefficient functions, seeded with ``init`` at t_span[0]."""
    if steps < 1:
        raise ValueError("steps must be positive")
    t0, t1 = t_span
    h = (t1 - t0) / steps
    if h == 0 or abs(h) < 1e-14 * max(1.0, abs(t0)):
        raise ValueError("step size underflow")
    check_polynomial_gauge(K, t0)

    def rhs(t, c):
        k00, k01, k1 = _split_gauge(K, t)
        if not all(map(math.isfinite, (k00, k01, k1))):
            raise DomainError(f"gauge invariants singular at t = {t!r}")
        return ansatz_rhs(c, k00, k01, k1)

    ts = t0 + h * np.arange(steps + 1)
    cs = np.empty((steps + 1, 6))
    cs[0] = init
    for n in range(steps):
        t, c = ts[n], cs[n]
        s1 = rhs(t, c)
        s2 = rhs(t + h / 2, c + h / 2 * s1)
        s3 = rhs(t + h / 2, c + h / 2 * s2)
        s4 = rhs(t + h, c + h * s3)
        cs[n + 1] = c + h / 6 * (s1 + 2 * s2 + 2 * s3 + s4)
    return SampledCoefficients(ts, cs)


def ansatz_residual(coeffs: AnsatzCoefficients, K: GaugeInvariants, t: float, h: float = 1e-3) -> float:
    """max |c' - rhs(c)| with c' from a five-point difference of the closed form."""
    c = lambda s: coeffs(s)
    cd = (c(t - 2 * h) - 8 * c(t - h) + 8 * c(t + h) - c(t + 2 * h)) / (12 * h)
    k00, k01, k1 = _split_gauge(K, t)
    return float(np.max(np.abs(cd - ansatz_rhs(c(t), k00, k01, k1))))


# ---------------------------------------------------------------------------
# integration constants

@dataclass(frozen=True)
class OneFunctionConstants:
    r0: float
    r1: float
    r2: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if self.r2 == 0:
            raise ValueError("r2 must be nonzero")

    @property
    def a_prime(self) -> float:
        return self.r0 / self.r2 - self.r1**2 / (4 * self.r2**2)

    @property
    def b_prime(self) -> float:
        return (self.c1 - self.c2) * self.r1 / (2 * self.r2)

    @property
    def c_prime(self) -> float:
        return self.c3 - self.c2**2

    @property
    def alpha(self) -> float:
        return self.r1 / (2 * self.r2)

    @property
    def beta(self) -> float:
        return self.c2

    @property
    def ricci_scalar(self) -> float:
        return 2 * self.r2**3 * (self.a_prime * self.c_prime - self.b_prime**2)

    @classmethod
    def from_primes(cls, a_prime: float, b_prime: float, c_prime: float, r2: float = 1.0) -> "OneFunctionConstants":
        """Constants with beta = 0 realizing the given (a', b', c').

        b' needs r1 != 0, so r1 = 2 r2 (alpha = 1) when b' != 0 and alpha = 0
        otherwise."""
        if b_prime == 0:
            return cls(a_prime * r2, 0.0, r2, 0.0, 0.0, c_prime)
        r1 = 2.0 * r2
        r0 = r2 * (a_prime + r1**2 / (4 * r2**2))
        c1 = 2 * r2 * b_prime / r1
        return cls(r0, r1, r2, c1, 0.0, c_prime)


@dataclass(frozen=True)
class CaseAConstants:
    r2: float
    q1: float
    p0: float
    r1: float
    q0: float
    r0: float

    @property
    def e(self) -> tuple[float, ...]:
        r2, q1, p0, r1, q0, r0 = self.r2, self.q1, self.p0, self.r1, self.q0, self.r0
        return (
            q1**2 - p0 * r2,
            -(q0**2) + 4 * p0 * r0,
            r1**2 - 4 * r0 * r2,
            q0 * q1 - p0 * r1,
            -4 * q1 * r0 + q0 * r1,
            q1 * r1 - q0 * r2,
        )

    @property
    def ricci_scalar(self) -> float:
        e1, _, _, e4, _, e6 = self.e
        return -2 * self.r0 * e1 + 0.5 * self.r1 * e4 + 0.5 * self.q0 * e6

    @property
    def ricci_scalar_expanded(self) -> float:
        r2, q1, p0, r1, q0, r0 = self.r2, self.q1, self.p0, self.r1, self.q0, self.r0
        return 2 * r0 * (p0 * r2 - q1**2) + q0 * q1 * r1 - 0.5 * (p0 * r1**2 + r2 * q0**2)

    @classmethod
    def from_onefunction(cls, c: OneFunctionConstants) -> "CaseAConstants":
        """Constants making case A with f2 = 0 coincide with the one-function solution."""
        return cls(r2=c.r2, q1=-c.c2 * c.r2, p0=c.r2 * c.c3, r1=c.r1, q0=-c.c1 * c.r1, r0=c.r0)


@dataclass(frozen=True)
class CaseBConstants:
    m1: float
    m2: float
    m3: float
    alpha: float
    beta: float
    r0: float

    @property
    def n(self) -> tuple[float, ...]:
        m1, m2, m3, al, be, r0 = self.m1, self.m2, self.m3, self.alpha, self.beta, self.r0
        return (
            -(m2**2) + 4 * m1 * m3,
            -4 * m2 * al + 8 * m1 * be,
            -8 * m3 * al + 4 * m2 * be,
            m1 * r0 - al**2,
            m2 * r0 - 2 * al * be,
            m3 * r0 - be**2,
        )

    @property
    def constraint_value(self) -> float:
        return self.m1 * self.m3 - 0.25 * self.m2**2

    @property
    def ricci_scalar(self) -> float:
        n1, n2, n3, *_ = self.n
        return 0.5 * self.r0 * n1 + 0.25 * (n3 * self.alpha - n2 * self.beta)

    @property
    def ricci_scalar_expanded(self) -> float:
        m1, m2, m3, al, be, r0 = self.m1, self.m2, self.m3, self.alpha, self.beta, self.r0
        return -0.5 * m2**2 * r0 + 2 * m1 * m3 * r0 - 2 * m3 * al**2 + 2 * m2 * al * be - 2 * m1 * be**2


# ---------------------------------------------------------------------------
# closed forms, built symbolically and lambdified with their t-derivatives

_CONST = sp.symbols("K0:6", real=True)


def _onefunction_exprs(f: sp.Expr):
    r0, r1, r2, c1, c2, c3 = _CONST
    d = sp.diff(f, T_SYM)
    cr = d ** sp.Rational(1, 3)
    return (
        r2 * (c3 + 2 * c2 * f + f**2) / cr**4,
        -(c1 + f) * r1 / (2 * cr),
        -r2 * (c2 + f) / cr,
        r0 * cr**2,
        r1 * cr**2,
        r2 * cr**2,
    )


def _caseA_exprs(f1: sp.Expr, f2: sp.Expr):
    r2b, q1b, p0b, r1b, q0b, r0b = _CONST
    d1, d2 = sp.diff(f1, T_SYM), sp.diff(f2, T_SYM)
    u = d2 / d1
    v = d1 * f2 - d2 * f1
    cr = d1 ** sp.Rational(1, 3)
    vd = v / d1
    return (
        (p0b - 2 * q1b * f1 + r2b * f1**2) / cr**4,
        (q0b + 2 * r2b * vd * f1 - 2 * p0b * u - r1b * f1 + 2 * q1b * (u * f1 - vd)) / (2 * cr),
        (q1b - r2b * f1) / cr,
        cr**2 * (r0b - q0b * u + r2b * vd**2 + p0b * u**2 - r1b * vd + 2 * u * q1b * vd),
        cr**2 * (r1b - 2 * q1b * u - 2 * r2b * vd),
        r2b * cr**2,
    )


def _caseB_exprs(f1: sp.Expr, f2: sp.Expr):
    m1, m2, m3, al, be, r0b = _CONST
    d1, d2 = sp.diff(f1, T_SYM), sp.diff(f2, T_SYM)
    v = d1 * f2 - d2 * f1
    vr = v ** sp.Rational(1, 3)
    return (
        (m1 * f1**2 + m2 * f1 * f2 + m3 * f2**2) / vr**4,
        (al * f1 + be * f2) / vr,
        -(m1 * f1 * d1 + m3 * f2 * d2 + m2 * (d1 * f2 + d2 * f1) / 2) / vr**4,
        r0b * vr**2,
        -2 * (al * d1 + be * d2) / vr,
        (m1 * d1**2 + m2 * d1 * d2 + m3 * d2**2) / vr**4,
    )


_BUILDERS = {"one": _onefunction_exprs, "A": _caseA_exprs, "B": _caseB_exprs}


@lru_cache(maxsize=64)
def _coefficient_jet_fn(kind: str, f1: sp.Expr, f2: Optional[sp.Expr]):
    exprs = _BUILDERS[kind](f1) if kind == "one" else _BUILDERS[kind](f1, f2)
    rows = [list(exprs), [sp.diff(e, T_SYM) for e in exprs], [sp.diff(e, T_SYM, 2) for e in exprs]]
    return sp.lambdify((T_SYM, *_CONST), rows, "numpy", cse=True)


def closed_form_coefficients(kind: str, pair: FunctionPair, consts: Sequence[float]) -> AnsatzCoefficients:
    """Closed-form (p0, q0, q1, r0, r1, r2) for family ``kind`` in {'one', 'A', 'B'}.

    Fractional powers need f1' > 0 (one-function, case A) or v > 0 (case B).
    """
    f2 = None if kind == "one" else pair.f2.expr
    fn = _coefficient_jet_fn(kind, pair.f1.expr, f2)
    consts = tuple(float(c) for c in consts)
    base, base_name = (pair.v, "v") if kind == "B" else (pair.f1.d(1), "f1'")

    def jet(t):
        require_nonvanishing(base, t, base_name, positive=True)
        rows = fn(float(t), *consts)
        return np.array([[float(v) for v in row] for row in rows])

    return AnsatzCoefficients(jet)


# ---------------------------------------------------------------------------
# assembled solutions

@dataclass
class InversionResult:
    kind: str
    pair: FunctionPair
    constants: object
    coefficients: AnsatzCoefficients
    gauge: GaugeInvariants
    scalar_curvature: float
    metric: MetricField  # (t, x) chart
    printed_det: Callable[[float, float], float]
    extras: dict = field(default_factory=dict)

    def det_a(self, t: float, x: float) -> float:
        """Signed Det(a)."""
        return self.coefficients.det(t, x)

    def abs_det_a(self, t: float, x: float) -> float:
        return abs(self.det_a(t, x))

    def is_singular(self, t: float, x: float, tol: float = 1e-12) -> bool:
        return abs(self.det_a(t, x)) < tol

    def geodesic(self, *params: float):
        """(x, x', x'') callables for the family member with the given parameters."""
        f1, f2 = self.pair.f1, self.pair.f2
        if self.kind == "one":
            k, k0 = params
            return (lambda t: k * f1(t) + k0, lambda t: k * f1.d(1)(t), lambda t: k * f1.d(2)(t))
        if self.kind == "A":
            (k,) = params
            return tuple((lambda n: lambda t: k * f1.d(n)(t) + f2.d(n)(t))(n) for n in range(3))
        k1, k2 = params
        return tuple((lambda n: lambda t: k1 * f1.d(n)(t) + k2 * f2.d(n)(t))(n) for n in range(3))


def _assemble_metric(coeffs: AnsatzCoefficients, fd_step: Optional[float]) -> MetricField:
    return density_metric(coeffs.density_jet, fd_step=fd_step)


@dataclass
class OneFunctionResult(InversionResult):
    h_metric: Optional[MetricField] = None

    def to_TX(self, t: float, x: float) -> tuple[float, float]:
        c: OneFunctionConstants = self.constants
        return float(self.pair.f1(t) + c.beta), float(x + c.alpha)

    def D(self, T: float, X: float) -> float:
        c: OneFunctionConstants = self.constants
        ap, bp, cp = c.a_prime, c.b_prime, c.c_prime
        return -((bp + T * X) ** 2) + (cp + T * T) * (ap + X * X)

    def printed_g(self, t: float, x: float) -> np.ndarray:
        """Printed (t, x) components (1/(r2^3 D^2)) [(a'+X^2) f'^2, -(b'+TX) f', c'+T^2]."""
        c: OneFunctionConstants = self.constants
        T, X = self.to_TX(t, x)
        d = self.pair.f1.d(1)(t)
        pref = 1.0 / (c.r2**3 * self.D(T, X) ** 2)
        return pref * np.array([(c.a_prime + X * X) * d * d, -(c.b_prime + T * X) * d, c.c_prime + T * T])

    def printed_h(self, T: float, X: float) -> np.ndarray:
        c: OneFunctionConstants = self.constants
        pref = 1.0 / (c.r2**3 * self.D(T, X) ** 2)
        return pref * np.array([c.a_prime + X * X, -(c.b_prime + T * X), c.c_prime + T * T])

    def printed_h_inverse(self, T: float, X: float) -> np.ndarray:
        c: OneFunctionConstants = self.constants
        pref = c.r2**3 * self.D(T, X)
        return pref * np.array([[c.c_prime + T * T, c.b_prime + T * X], [c.b_prime + T * X, c.a_prime + X * X]])

    def printed_connection(self, T: float, X: float) -> dict[str, float]:
        c: OneFunctionConstants = self.constants
        ap, bp, cp = c.a_prime, c.b_prime, c.c_prime
        D = self.D(T, X)
        return {
            "G0_00": 2 * (bp * X - ap * T) / D,
            "G0_01": (bp * T - cp * X) / D,
            "G0_11": 0.0,
            "G1_00": 0.0,
            "G1_01": (bp * X - ap * T) / D,
            "G1_11": 2 * (bp * T - cp * X) / D,
        }

    def printed_ricci(self, T: float, X: float) -> np.ndarray:
        c: OneFunctionConstants = self.constants
        k = c.a_prime * c.c_prime - c.b_prime**2
        return k * c.r2**3 * self.h_metric.matrix(T, X)


def h_density_jet(c: OneFunctionConstants):
    ap, bp, cp, r2 = c.a_prime, c.b_prime, c.c_prime, c.r2

    def jet(T, X):
        a = r2 * np.array([ap + X * X, -(bp + T * X), cp + T * T])
        da = r2 * np.array([[0.0, -X, 2 * T], [2 * X, -T, 0.0]])
        dda = r2 * np.array([[0.0, 0.0, 2.0], [0.0, -1.0, 0.0], [2.0, 0.0, 0.0]])
        return a, da, dda

    return jet


def onefunction_h_metric(c: OneFunctionConstants, fd_step: Optional[float] = None) -> MetricField:
    """The (T, X) chart metric, depending only on a', b', c' and r2."""
    return density_metric(h_density_jet(c), fd_step=fd_step)


def onefunction_solution(f, c: OneFunctionConstants, fd_step: Optional[float] = None) -> OneFunctionResult:
    pair = FunctionPair(TimeFunction.of(f))
    coeffs = closed_form_coefficients("one", pair, (c.r0, c.r1, c.r2, c.c1, c.c2, c.c3))
    result = OneFunctionResult(
        kind="one",
        pair=pair,
        constants=c,
        coefficients=coeffs,
        gauge=k_onefunction(pair.f1),
        scalar_curvature=c.ricci_scalar,
        metric=_assemble_metric(coeffs, fd_step),
        printed_det=None,
        extras={"a_prime": c.a_prime, "b_prime": c.b_prime, "c_prime": c.c_prime},
        h_metric=onefunction_h_metric(c, fd_step),
    )

    def printed_det(t, x):
        T, X = result.to_TX(t, x)
        return c.r2**2 * result.D(T, X) / pair.f1.d(1)(t) ** (2.0 / 3.0)

    result.printed_det = printed_det
    return result


def caseA_solution(pair: FunctionPair, c: CaseAConstants, fd_step: Optional[float] = None) -> InversionResult:
    coeffs = closed_form_coefficients("A", pair, (c.r2, c.q1, c.p0, c.r1, c.q0, c.r0))
    e1, e2, e3, e4, e5, e6 = c.e

    def printed_det(t, x):
        f1, f2 = pair.f1(t), pair.f2(t)
        bracket = (
            e2 - 4 * e4 * x - 4 * e1 * x * x - e3 * f1**2 + 4 * (e4 + 2 * e1 * x) * f2
            - 4 * e1 * f2**2 + 2 * f1 * (e5 - 2 * e6 * x + 2 * e6 * f2)
        )
        return bracket / (4 * pair.f1.d(1)(t) ** (2.0 / 3.0))

    return InversionResult(
        kind="A",
        pair=pair,
        constants=c,
        coefficients=coeffs,
        gauge=k_caseA(pair),
        scalar_curvature=c.ricci_scalar,
        metric=_assemble_metric(coeffs, fd_step),
        printed_det=printed_det,
        extras={f"e{i + 1}": v for i, v in enumerate(c.e)},
    )


def caseB_solution(pair: FunctionPair, c: CaseBConstants, fd_step: Optional[float] = None) -> InversionResult:
    coeffs = closed_form_coefficients("B", pair, (c.m1, c.m2, c.m3, c.alpha, c.beta, c.r0))
    n1, n2, n3, n4, n5, n6 = c.n

    def printed_det(t, x):
        f1, f2 = pair.f1(t), pair.f2(t)
        D = n1 * x * x + x * (n2 * f1 + n3 * f2) + 4 * (n4 * f1**2 + n6 * f2**2 + n5 * f1 * f2)
        return D / (4 * pair.v(t) ** (2.0 / 3.0))

    extras = {f"n{i + 1}": v for i, v in enumerate(c.n)}
    extras["constraint"] = c.constraint_value
    return InversionResult(
        kind="B",
        pair=pair,
        constants=c,
        coefficients=coeffs,
        gauge=k_caseB(pair),
        scalar_curvature=c.ricci_scalar,
        metric=_assemble_metric(coeffs, fd_step),
        printed_det=printed_det,
        extras=extras,
    )


def caseB_rescaled(pair: FunctionPair, coeff_values: np.ndarray, t: float) -> tuple[float, float, float]:
    """(A2, B2, C) = (v^(4/3) p0, v^(-2/3) r2, v^(1/3) q1)."""
    v = pair.v(t)
    require_nonvanishing(pair.v, t, "v", positive=True)
    c = np.asarray(coeff_values)
    return v ** (4 / 3) * c[P0], v ** (-2 / 3) * c[R2], v ** (1 / 3) * c[Q1]


def caseB_constraint(pair: FunctionPair, coeff_values: np.ndarray, t: float) -> float:
    """A2 B2 - C^2, conserved along any solution of the case B system."""
    A2, B2, C = caseB_rescaled(pair, coeff_values, t)
    return A2 * B2 - C * C


def onefunction_constants_matching(f, coeff_values: np.ndarray, t0: float) -> OneFunctionConstants:
    """One-function constants whose closed form takes ``coeff_values`` at t0.

    Any solution of the one-function system is fixed by its value at t0, so
    this identifies e.g. a reduced two-function solution with a one-function one.
    """
    f = TimeFunction.of(f)
    p0, q0, q1, r0, r1, r2 = coeff_values
    F, d = float(f(t0)), float(f.d(1)(t0))
    require_nonvanishing(f.d(1), t0, "f'", positive=True)
    s = d ** (1.0 / 3.0)
    rb = np.array([r0, r1, r2]) / s**2
    if rb[2] == 0:
        raise ValueError("r2 vanishes; no one-function form")
    c2 = -q1 * s / rb[2] - F
    if rb[1] == 0:
        if abs(q0) > 1e-14:
            raise ValueError("q0 != 0 with r1 = 0 is outside the one-function parametrization")
        c1 = 0.0
    else:
        c1 = -2 * q0 * s / rb[1] - F
    c3 = p0 * s**4 / rb[2] - 2 * c2 * F - F * F
    return OneFunctionConstants(rb[0], rb[1], rb[2], c1, c2, c3)


# ---------------------------------------------------------------------------
# verification helpers

@dataclass
class RoundtripReport:
    max_deviation: float
    per_invariant: tuple[float, float, float, float]
    points: int
    analytic: bool

    def passed(self, tol: float) -> bool:
        return self.max_deviation < tol


def verify_gauge_roundtrip(
    result: InversionResult, points: Sequence[tuple[float, float]], analytic: bool = False
) -> RoundtripReport:
    """Christoffels of the assembled metric, reduced to K0..K3, against the input K_i."""
    devs = np.zeros(4)
    for t, x in points:
        got = gauge_combinations(christoffel(result.metric, t, x, analytic))
        want = result.gauge.at(t, x)
        scale = 1.0 + np.abs(want)
        devs = np.maximum(devs, np.abs(got - want) / scale)
    return RoundtripReport(float(devs.max()), tuple(float(d) for d in devs), len(points), analytic)


def density_equation_residual(m: MetricField, K: GaugeInvariants, t: float, x: float, h: float = 1e-4) -> np.ndarray:
    """Residuals of the four general density equations for a = |det g|^(-2/3) g.

    K is evaluated from the supplied invariants; derivatives of a by
    five-point differences.  Independent of the polynomial ansatz.
    """

    def a_at(tt, xx):
        g = np.asarray(m.components(tt, xx), dtype=float)
        det = g[0] * g[2] - g[1] ** 2
        return abs(det) ** (-2.0 / 3.0) * g

    def d(fun, s):
        return (fun(-2 * s) - 8 * fun(-s) + 8 * fun(s) - fun(2 * s)) / (12 * s)

    a00, a01, a11 = a_at(t, x)
    dt = d(lambda s: a_at(t + s, x), h)
    dx = d(lambda s: a_at(t, x + s), h)
    K0, K1, K2, K3 = K.at(t, x)
    return np.array([
        dt[0] + 2 * K0 * a01 - 2 / 3 * K1 * a00,
        2 * dt[1] + dx[0] + 2 * K0 * a11 + 2 / 3 * K1 * a01 - 4 / 3 * K2 * a00,
        dt[2] + 2 * dx[1] + 4 / 3 * K1 * a11 - 2 / 3 * K2 * a01 - 2 * K3 * a00,
        dx[2] + 2 / 3 * K2 * a11 - 2 * K3 * a01,
    ])
