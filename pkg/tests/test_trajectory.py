import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nlgeom.trajectory import (
    TIME_REVERSAL_SIGNS,
    TrajectoryParams,
    X_phi,
    X_psi,
    partition_identity,
    time_reversal_check,
)


def mp_trajectory(k, omega0, a, b, theta, t, sign=1, dps=50):
    """Printed closed form at high precision; sign=-1 gives X_phi."""
    with mp.workdps(dps):
        k = [mp.mpf(v) for v in k]
        w0, a, b, th, t = (mp.mpf(v) for v in (omega0, a, b, theta, t))
        y = 2 * w0 * t
        N = 2 * w0 * mp.cosh(2 * th)
        delta = N * mp.cosh(b * y) + sign * 2 * w0 * mp.sinh(b * y)
        num = (k[0] * t + k[1]) * mp.cosh(b * y) + sign * (
            (k[2] * t + k[3]) * mp.sinh(b * y) + (k[4] * t + k[5]) * mp.cos(a * y) + (k[6] * t + k[7]) * mp.sin(a * y)
        )
        return float(2 * num / delta)


def test_zero_constants_give_origin():
    p = TrajectoryParams((0.0,) * 8, 1.2, 0.7, 0.4, 0.3)
    assert np.all(X_psi(p, np.linspace(-3, 3, 7)) == 0.0)


def test_linear_limit_is_straight_line():
    k = (0.4, -1.1, 0.3, 0.2, 0.5, 0.6, 0.7, 0.8)
    p = TrajectoryParams(k, 1.5, 0.0, 0.0, 0.2)
    ts = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(X_psi(p, ts), 2 * (0.4 * ts - 1.1 + 0.5 * ts + 0.6) / p.N, atol=1e-14)


def test_reference_example_against_oracle():
    k = (1, 0, 0, 1, 0, 0, 0, 0)
    p = TrajectoryParams(k, 1.0, 1.0, 0.3, 0.5)
    want = mp_trajectory(k, 1.0, 1.0, 0.3, 0.5, 0.8)
    assert float(X_psi(p, 0.8)) == pytest.approx(want, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=8, max_size=8),
    st.floats(0.2, 3.0),
    st.floats(-2, 2),
    st.floats(-1.5, 1.5),
    st.floats(-1.5, 1.5),
    st.floats(-4, 4),
)
def test_matches_oracle(k, w0, a, b, theta, t):
    p = TrajectoryParams(k, w0, a, b, theta)
    want = mp_trajectory(k, w0, a, b, theta, t)
    assert float(X_psi(p, t)) == pytest.approx(want, abs=1e-11 * (1 + abs(want)))
    want_phi = mp_trajectory(k, w0, a, b, theta, t, sign=-1)
    if math.isfinite(want_phi) and abs(theta) > 0.05:
        assert float(X_phi(p, t)) == pytest.approx(want_phi, abs=1e-10 * (1 + abs(want_phi)))


def test_phi_trajectory_without_damping():
    k = (0.5, 0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0)
    p = TrajectoryParams(k, 1.0, 0.5, 0.0, 0.4)
    t = 1.3
    want = 2 * ((0.5 * t + 0.1) - 0.4 * t * math.cos(0.5 * 2 * t)) / p.N
    assert float(X_phi(p, t)) == pytest.approx(want, abs=1e-14)


def test_asymptotic_velocity():
    k = (0.4, 0.3, 0.9, -0.2, 0.1, 0.5, 0.2, 0.1)
    p = TrajectoryParams(k, 1.0, 0.7, 0.5, 0.3)
    t = 40.0
    v = (X_psi(p, t + 1) - X_psi(p, t - 1)) / 2
    assert v == pytest.approx(2 * (k[0] + k[2]) / (p.N + 2 * p.omega0), rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(-50, 50))
def test_delta_positive(w0, b, theta, t):
    p = TrajectoryParams((0,) * 8, w0, 0.3, b, theta)
    assert p.delta(t) > 0


def test_phi_denominator_guard():
    # theta = 0 makes Delta' = 2 omega0 e^(-by), which underflows for large by
    p = TrajectoryParams((1,) * 8, 1.0, 0.2, 1.0, 0.0)
    with pytest.raises(ZeroDivisionError):
        X_phi(p, 20.0)
    assert math.isfinite(float(X_phi(p, 2.0)))


def test_no_overflow_far_out():
    p = TrajectoryParams((1, 0, 1, 0, 0, 0, 0, 0), 1.0, 0.2, 1.0, 0.3)
    assert math.isfinite(float(X_psi(p, 1e3)))
    assert math.isfinite(float(X_psi(p, -1e3)))


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 3), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-5, 5))
def test_partition_identity(w0, b, theta, t):
    p = TrajectoryParams((0,) * 8, w0, 0.0, b, theta)
    # bound grows with the cancellation between the two terms
    by = 2 * w0 * b * t
    cond = (p.N * math.cosh(by) + 2 * w0 * abs(math.sinh(by))) / float(p.delta(t))
    assume(cond < 1e10)
    assert abs(float(partition_identity(p, t)) - 1.0) < 4e-16 * cond + 1e-15


def test_time_reversal_random_cases():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(2000):
        p = TrajectoryParams(rng.uniform(-2, 2, 8), rng.uniform(0.3, 2), rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0.1, 1))
        worst = max(worst, float(time_reversal_check(p, rng.uniform(-2, 2))))
    assert worst < 1e-12


@pytest.mark.parametrize("flip", [(0, 1), (4,)])
def test_wrong_sign_map_fails(flip):
    # (0, 1) moves the minus sign from k1 to k2
    signs = TIME_REVERSAL_SIGNS.copy()
    for i in flip:
        signs[i] = -signs[i]
    p = TrajectoryParams((0.1, 0.2, 0.3, 0.4, 1.0, 0.6, 0.7, 0.8), 1.0, 0.8, 0.4, 0.5)
    assert float(time_reversal_check(p, 0.9, signs)) > 1e-3


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(k=(0,) * 7, omega0=1, a=0, b=0, theta=0),
        dict(k=(0,) * 8, omega0=0, a=0, b=0, theta=0),
        dict(k=(0,) * 8, omega0=1, a=math.nan, b=0, theta=0),
    ],
)
def test_validation(kwargs):
    with pytest.raises(ValueError):
        TrajectoryParams(**kwargs)
