"""Closed-form position trajectories generated by |psi> and |phi>.

With y = 2 omega0 t and N = 2 omega0 cosh(2 theta),

    X_psi(t) = (2/Delta)  [(k1 t + k2) cosh(by) + (k3 t + k4) sinh(by)
                           + (k5 t + k6) cos(ay) + (k7 t + k8) sin(ay)]
    X_phi(t) = (2/Delta') [(k1 t + k2) cosh(by) - (k3 t + k4) sinh(by)
                           - (k5 t + k6) cos(ay) - (k7 t + k8) sin(ay)]

where Delta = N cosh(by) + 2 omega0 sinh(by) and Delta' flips the sinh sign.

Numerically the hyperbolic parts are evaluated as combinations of e^(+by)
and e^(-by), both scaled by e^(-|by|).  Since N >= 2 omega0 the two terms
of Delta are then non-negative, so nothing cancels for large |by| (the
printed cosh + sinh form loses all digits once e^(-|by|) drops below
rounding of cosh) and nothing overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SINGULAR_TOL = 1e-12

# k -> (-k1, k2, -k3, k4, k5, -k6, -k7, k8) turns X_psi at -t into X_phi at t
TIME_REVERSAL_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True)
class TrajectoryParams:
    k: tuple[float, ...]
    omega0: float
    a: float
    b: float
    theta: float

    def __post_init__(self):
        k = tuple(float(v) for v in self.k)
        if len(k) != 8:
            raise ValueError("need exactly eight k constants")
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if not all(math.isfinite(v) for v in (*k, self.omega0, self.a, self.b, self.theta)):
            raise ValueError("trajectory parameters must be finite")
        object.__setattr__(self, "k", k)

    @property
    def N(self) -> float:
        return 2.0 * self.omega0 * math.cosh(2.0 * self.theta)

    def with_k(self, k) -> "TrajectoryParams":
        return TrajectoryParams(tuple(k), self.omega0, self.a, self.b, self.theta)

    def delta(self, t):
        # both terms are non-negative, so only overflow (|by| > ~709) is lost
        by = self.b * 2.0 * self.omega0 * np.asarray(t, dtype=float)
        return _delta_scaled(self, np.exp(by), np.exp(-by))

    def delta_prime(self, t):
        by = self.b * 2.0 * self.omega0 * np.asarray(t, dtype=float)
        return _delta_scaled(self, np.exp(-by), np.exp(by))


def _exp_parts(p: TrajectoryParams, t):
    """e^(by), e^(-by) and 1, each divided by e^|by|, plus by itself."""
    by = p.b * 2.0 * p.omega0 * np.asarray(t, dtype=float)
    m = np.abs(by)
    return np.exp(by - m), np.exp(-by - m), np.exp(-m), by


def _delta_scaled(p: TrajectoryParams, ep, em):
    # N +- 2 omega0 = 4 omega0 cosh^2(theta), 4 omega0 sinh^2(theta); no cancellation near theta = 0
    plus = 4.0 * p.omega0 * math.cosh(p.theta) ** 2
    minus = 4.0 * p.omega0 * math.sinh(p.theta) ** 2
    return 0.5 * (plus * ep + minus * em)


def _numerator_scaled(p: TrajectoryParams, t, ep, em, scale, sign):
    t = np.asarray(t, dtype=float)
    y = 2.0 * p.omega0 * t
    k1, k2, k3, k4, k5, k6, k7, k8 = p.k
    c, s = k1 * t + k2, k3 * t + k4
    trig = (k5 * t + k6) * np.cos(p.a * y) + (k7 * t + k8) * np.sin(p.a * y)
    # c cosh(by) + sign s sinh(by) + sign trig, times e^-|by|
    return 0.5 * ((c + sign * s) * ep + (c - sign * s) * em) + sign * trig * scale


def X_psi(p: TrajectoryParams, t):
    ep, em, scale, _ = _exp_parts(p, t)
    return 2.0 * _numerator_scaled(p, t, ep, em, scale, 1.0) / _delta_scaled(p, ep, em)


def X_phi(p: TrajectoryParams, t):
    ep, em, scale, by = _exp_parts(p, t)
    dp = _delta_scaled(p, em, ep)
    with np.errstate(divide="ignore"):
        log_dp = np.log(dp) + np.abs(by)
    if np.any(log_dp < math.log(SINGULAR_TOL)):
        raise ZeroDivisionError("Delta' vanishes (or underflows) at the requested time")
    return 2.0 * _numerator_scaled(p, t, ep, em, scale, -1.0) / dp


def partition_identity(p: TrajectoryParams, t):
    """N cosh(by)/Delta + 2 omega0 sinh(by)/Delta with Delta the sum of the two numerators.

    Identically one.  Evaluated from e^-|by|-scaled pieces so it cannot
    overflow; when Delta << N cosh(by) (theta near 0, b t large and negative)
    the two terms cancel and the rounding error grows like N cosh(by)/Delta.
    """
    ep, em, _, _ = _exp_parts(p, t)
    ch, sh = 0.5 * (ep + em), 0.5 * (ep - em)
    a, b = p.N * ch, 2.0 * p.omega0 * sh
    d = a + b
    return a / d + b / d


def time_reversed(p: TrajectoryParams, signs=TIME_REVERSAL_SIGNS) -> TrajectoryParams:
    return p.with_k(np.asarray(signs) * np.asarray(p.k))


def time_reversal_check(p: TrajectoryParams, t, signs=TIME_REVERSAL_SIGNS):
    """|X_psi(mapped k; -t) - X_phi(k; t)|.

    ``signs`` exists so a deliberately wrong sign map can be tested.
    """
    t = np.asarray(t, dtype=float)
    return np.abs(X_psi(time_reversed(p, signs), -t) - X_phi(p, t))
