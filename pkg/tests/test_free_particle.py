import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlgeom.core import Coupling, NonlinearSolution
from nlgeom.free_particle import (
    GaussianPacket,
    LinearCoeffs,
    MomentumGridState,
    extract_k,
    fit_linear,
    matrix_element_X,
    momentum_grid,
    orthonormalize,
    packet_state,
    sample_matrix_element,
    trajectory_expectation,
    trajectory_params,
)
from nlgeom.trajectory import X_psi


def pair_states(points=1024):
    pa = GaussianPacket(-1.0, 0.5, 0.8)
    pb = GaussianPacket(1.5, -0.3, 1.1)
    p = momentum_grid([pa, pb], points)
    return orthonormalize(packet_state(pa, p), packet_state(pb, p))


def test_centered_packet_at_rest_position():
    pk = GaussianPacket(0.0, 1.0, 1.0)
    s = packet_state(pk, momentum_grid([pk]))
    assert abs(matrix_element_X(s, s, 0.0)) < 1e-12


@pytest.mark.parametrize("t", [-2.0, 0.5, 3.0])
def test_packet_moves_with_group_velocity(t):
    pk = GaussianPacket(0.0, 1.0, 1.0)
    s = packet_state(pk, momentum_grid([pk]))
    assert matrix_element_X(s, s, t) == pytest.approx(t, abs=1e-10)


@pytest.mark.parametrize("mass,x0,p0", [(1.0, 0.7, -0.4), (2.5, -1.0, 2.0)])
def test_general_packet_trajectory(mass, x0, p0):
    # off-centre packets oscillate in p; a finer grid keeps the stencil error below 1e-10
    pk = GaussianPacket(x0, p0, 0.6, mass)
    s = packet_state(pk, momentum_grid([pk], 4096))
    for t in (-1.0, 2.0):
        assert matrix_element_X(s, s, t).real == pytest.approx(x0 + p0 * t / mass, abs=1e-10)


def test_even_odd_pair_is_linear():
    p = np.linspace(-8, 8, 1024)
    even = MomentumGridState(p, np.exp(-p * p / 2)).normalized()
    odd = MomentumGridState(p, p * np.exp(-p * p / 2)).normalized()
    assert abs(np.vdot(even.amp, odd.amp)) * even.dp < 1e-14
    for t in np.linspace(-2, 2, 9):
        z = [matrix_element_X(even, odd, t + k * 1e-2) for k in (-1, 0, 1)]
        assert abs(z[0] - 2 * z[1] + z[2]) < 1e-8


def test_linearity_over_range():
    sa, sb = pair_states()
    for s1, s2 in ((sa, sb), (sb, sa), (sa, sa)):
        for t in np.linspace(-2, 2, 11):
            z = [matrix_element_X(s1, s2, t + k * 1e-2) for k in (-1, 0, 1)]
            assert abs(z[0] - 2 * z[1] + z[2]) < 1e-7 * (1 + abs(z[1]))


def test_diagonal_elements_real():
    sa, sb = pair_states()
    for t in (-1.5, 0.0, 2.2):
        assert abs(matrix_element_X(sa, sa, t).imag) < 1e-12
        assert abs(matrix_element_X(sb, sb, t).imag) < 1e-12


def test_grid_refinement():
    sa, sb = pair_states(1024)
    fa, fb = pair_states(2048)
    for t in (-1.0, 1.0):
        assert abs(matrix_element_X(sa, sb, t) - matrix_element_X(fa, fb, t)) < 1e-8


def test_orthonormalize():
    sa, sb = pair_states()
    assert sa.norm() == pytest.approx(1, abs=1e-13)
    assert sb.norm() == pytest.approx(1, abs=1e-13)
    assert abs(np.vdot(sa.amp, sb.amp) * sa.dp) < 1e-12


def test_mismatched_grids_rejected():
    pk = GaussianPacket(0.0, 0.0, 1.0)
    s1 = packet_state(pk, np.linspace(-4, 4, 64))
    s2 = packet_state(pk, np.linspace(-5, 5, 64))
    with pytest.raises(ValueError):
        matrix_element_X(s1, s2, 0.0)


def test_state_validation():
    with pytest.raises(ValueError):
        MomentumGridState(np.linspace(0, 1, 8), np.ones(8))
    with pytest.raises(ValueError):
        MomentumGridState(np.r_[np.linspace(0, 1, 20), 3.0], np.ones(21))
    with pytest.raises(ValueError):
        GaussianPacket(0, 0, -1.0)
    with pytest.raises(ValueError):
        GaussianPacket(0, 0, 1.0, mass=0.0)


def test_fit_exact_line():
    fit = fit_linear([(t, 2 * t - 1) for t in range(5)])
    assert fit.alpha == pytest.approx(2)
    assert fit.beta == pytest.approx(-1)
    assert fit.residual < 1e-14


def test_fit_detects_curvature():
    assert fit_linear([(t, t * t) for t in np.linspace(-1, 1, 5)]).residual > 1e-2


def test_fit_needs_distinct_times():
    with pytest.raises(ValueError):
        fit_linear([(0.0, 1), (0.0, 2), (0.0, 3)])
    with pytest.raises(ValueError):
        fit_linear([(0.0, 1), (1.0, 2)])


def test_fitted_matrix_elements_are_lines():
    sa, sb = pair_states()
    assert sample_matrix_element(sa, sb, np.linspace(-2, 2, 7)).residual < 1e-8


def test_extract_k_zero():
    z = LinearCoeffs(0j, 0j)
    assert extract_k(z, z, z, 1.3, 0.4) == (0.0,) * 8


def test_extract_k_theta_zero():
    aa, bb, ab = LinearCoeffs(0.3, -1.0), LinearCoeffs(0.7, 2.0), LinearCoeffs(0.1 + 0.2j, -0.5j)
    k = extract_k(aa, bb, ab, 1.5, 0.0)
    assert k == pytest.approx((1.05, 3.0, 1.05, 3.0, 0.0, 0.0, 0.0, 0.0))


def test_extract_k_rejects_complex_diagonal():
    with pytest.raises(ValueError):
        extract_k(LinearCoeffs(1j, 0), LinearCoeffs(0, 0), LinearCoeffs(0, 0), 1.0, 0.3)


def test_expectation_theta_zero_real_coupling():
    sa, sb = pair_states()
    sol = NonlinearSolution(Coupling(0.8, 0.0), 1.1, 0.0)
    for t in (-1.0, 0.5, 2.0):
        want = matrix_element_X(sb, sb, t).real
        assert trajectory_expectation(sol, sa, sb, t) == pytest.approx(want, abs=1e-12)


def test_expectation_denominator_at_origin():
    from nlgeom.free_particle import state_norm

    sa, sb = pair_states()
    sol = NonlinearSolution(Coupling(0.5, 0.3), 1.3, 0.4)
    assert state_norm(sol, sa, sb, 0.0) == pytest.approx(sol.N / 2, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.3, 2.0), st.floats(-1.0, 1.0), st.integers(0, 2**31 - 1)
)
def test_expectation_matches_closed_form(a, b, w0, theta, seed):
    sa, sb = pair_states(512)
    sol = NonlinearSolution(Coupling(a, b), w0, theta)
    p = trajectory_params(sol, sa, sb)
    for t in np.random.default_rng(seed).uniform(-3, 3, 20):
        assert trajectory_expectation(sol, sa, sb, t) == pytest.approx(float(X_psi(p, t)), abs=1e-9)


def test_degenerate_state_rejected():
    p = np.linspace(-4, 4, 64)
    z = MomentumGridState(p, np.zeros(64))
    sol = NonlinearSolution(Coupling(0.5, 0.3), 1.3, 0.4)
    with pytest.raises(ValueError):
        trajectory_expectation(sol, z, z, 0.0)
