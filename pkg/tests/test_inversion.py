import math

import numpy as np
import pytest
import sympy as sp

from nlgeom.diffgeo import Signature, christoffel, ricci, signature
from nlgeom.functions import DomainError, FunctionPair
from nlgeom.inversion import (
    COEFF_NAMES,
    CaseAConstants,
    CaseBConstants,
    OneFunctionConstants,
    ansatz_rhs,
    caseA_solution,
    caseB_constraint,
    caseB_rescaled,
    caseB_solution,
    closed_form_coefficients,
    density_equation_residual,
    derive_ansatz_system,
    integrate_ansatz,
    k_caseA,
    k_caseB,
    k_onefunction,
    onefunction_solution,
    verify_gauge_roundtrip,
)

ONE_C = OneFunctionConstants(1.3, 0.4, 0.9, 0.2, -0.3, 0.7)
POINTS = [(0.2, -0.6), (0.7, 0.1), (1.3, 0.8), (1.8, -0.2)]


def test_k_onefunction_examples():
    assert k_onefunction("t").k1(0.7) == 0.0
    assert k_onefunction("exp(2*t)").k1(0.7) == pytest.approx(2.0, rel=1e-14)
    for t in (-1.0, 0.3, 1.2):
        assert k_onefunction("tanh(t)").k1(t) == pytest.approx(-2 * math.tanh(t), rel=1e-13)


def test_k_onefunction_rejects_stationary_point():
    with pytest.raises(DomainError, match="t = 0.0"):
        k_onefunction("t**3").k1(0.0)


def test_k_caseA_examples():
    K = k_caseA(FunctionPair("t", "t**2"))
    assert K.k0(0.5) == pytest.approx(2.0)
    assert K.k1(0.5) == 0.0
    assert k_caseA(FunctionPair("exp(t)", 0)).k0(0.3) == 0.0


def test_k_caseA_against_symbolic():
    t = sp.Symbol("t")
    f1, f2 = sp.exp(t), sp.sin(t)
    w = sp.diff(f1, t, 2) * sp.diff(f2, t) - sp.diff(f2, t, 2) * sp.diff(f1, t)
    K = k_caseA(FunctionPair("exp(t)", "sin(t)"))
    for tv in (0.1, 0.9):
        assert K.k0(tv) == pytest.approx(float((-w / sp.diff(f1, t)).subs(t, tv)), abs=1e-12)
        assert K.k1(tv) == pytest.approx(1.0, abs=1e-12)


def test_k_caseB_examples():
    K = k_caseB(FunctionPair("t", "t**2"))
    assert K.k1(0.5) == pytest.approx(2 / 0.5)
    # v = -t^2, w = -2, so K0 = -(w/v) x = -(2/t^2) x
    assert K.k0(0.5, 1.0) == pytest.approx(-8.0)
    K = k_caseB(FunctionPair("cos(t)", "sin(t)"))
    assert K.k1(0.4) == pytest.approx(0.0, abs=1e-15)
    assert K.k0(0.4, 1.5) == pytest.approx(-1.5)
    # w = 0 when f2 is affine in f1
    assert k_caseB(FunctionPair("exp(t)", "3*exp(t) + 2")).k0(0.2, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_ansatz_rhs_matches_symbolic_derivation():
    derived = derive_ansatz_system()
    rng = np.random.default_rng(3)
    syms = {s.name: s for e in derived.values() for s in e.free_symbols}
    for _ in range(5):
        c = rng.normal(size=6)
        k00, k01, k1 = rng.normal(size=3)
        vals = dict(zip(COEFF_NAMES, c), k00=k00, k01=k01, k1=k1)
        subs = {syms[n]: v for n, v in vals.items() if n in syms}
        want = [float(derived[n].subs(subs)) for n in COEFF_NAMES]
        np.testing.assert_allclose(ansatz_rhs(c, k00, k01, k1), want, atol=1e-13)


def test_flat_drift():
    c = np.array([0.5, 0.2, -0.3, 1.0, 0.4, 0.7])
    p0, q0, q1, r0, r1, r2 = c
    np.testing.assert_allclose(ansatz_rhs(c, 0.0, 0.0, 0.0), [-2 * q1, -r1 / 2, -r2, 0, 0, 0])


@pytest.mark.parametrize(
    "kind,pair,consts",
    [
        ("one", FunctionPair("exp(t)"), (1.3, 0.4, 0.9, 0.2, -0.3, 0.7)),
        ("A", FunctionPair("exp(t)+t", "sin(t)"), (1.0, 0.2, 0.9, 0.3, -0.4, 1.1)),
        ("B", FunctionPair("sin(t)", "cos(t)"), (1.0, 0.3, 0.8, 0.2, -0.1, 0.5)),
    ],
)
def test_rk4_reproduces_closed_form(kind, pair, consts):
    coeffs = closed_form_coefficients(kind, pair, consts)
    K = {"one": lambda: k_onefunction(pair.f1), "A": lambda: k_caseA(pair), "B": lambda: k_caseB(pair)}[kind]()
    t0 = 0.1
    sampled = integrate_ansatz(K, coeffs(t0), (t0, t0 + 2.0), 400)
    for t, c in zip(sampled.t[::40], sampled.values[::40]):
        np.testing.assert_allclose(c, coeffs(t), rtol=1e-6, atol=1e-6)


def test_closed_forms_solve_ansatz_system():
    res = onefunction_solution("exp(t)", ONE_C)
    for t in (0.3, 1.1):
        c, cd, _ = res.coefficients.jet(t)
        np.testing.assert_allclose(cd, ansatz_rhs(c, 0.0, 0.0, 1.0), atol=1e-12)


def test_onefunction_example_values():
    c = OneFunctionConstants.from_primes(0.0, -1.0, 0.0)
    assert (c.a_prime, c.b_prime, c.c_prime) == pytest.approx((0.0, -1.0, 0.0))
    res = onefunction_solution("t", c)
    assert res.D(2.0, 1.0) == pytest.approx(3.0)
    assert res.printed_h(2.0, 1.0)[0] == pytest.approx(1 / 9)
    assert res.h_metric.components(2.0, 1.0)[0] == pytest.approx(1 / 9, rel=1e-14)
    assert c.ricci_scalar == pytest.approx(-2.0)
    assert ricci(res.h_metric, 2.0, 1.0)[1] == pytest.approx(-2.0, rel=1e-10)


def test_onefunction_euclidean_everywhere():
    res = onefunction_solution("t", OneFunctionConstants.from_primes(1.0, 0.0, 2.0))
    for T in np.linspace(-3, 3, 7):
        for X in np.linspace(-3, 3, 7):
            assert res.D(T, X) > 0
            assert signature(res.h_metric, T, X) is Signature.EUCLIDEAN


def test_onefunction_printed_metric_and_det():
    res = onefunction_solution("exp(t)", ONE_C)
    for t, x in POINTS:
        np.testing.assert_allclose(res.metric.components(t, x), res.printed_g(t, x), rtol=1e-12)
        assert res.det_a(t, x) == pytest.approx(res.printed_det(t, x), rel=1e-12)


def test_onefunction_printed_connection():
    res = onefunction_solution("exp(t)", ONE_C)
    for T, X in [(0.5, 0.2), (2.0, -0.4)]:
        got = christoffel(res.h_metric, T, X).components
        for key, val in res.printed_connection(T, X).items():
            assert got[key] == pytest.approx(val, abs=1e-10), key


def test_from_primes_roundtrip():
    for primes in [(0.3, -0.7, 1.1), (2.0, 0.0, -1.0)]:
        c = OneFunctionConstants.from_primes(*primes, r2=1.5)
        assert (c.a_prime, c.b_prime, c.c_prime) == pytest.approx(primes)


def test_caseA_trivial_constants():
    c = CaseAConstants(r2=1.0, q1=0.0, p0=1.0, r1=0.0, q0=0.0, r0=1.0)
    e1, _, _, e4, _, e6 = c.e
    assert (e1, e4, e6) == (-1.0, 0.0, 0.0)
    assert c.ricci_scalar == 2.0
    assert c.ricci_scalar_expanded == 2.0


def test_caseA_curvature_and_det():
    c = CaseAConstants(r2=1.0, q1=0.2, p0=0.9, r1=0.3, q0=-0.4, r0=1.1)
    res = caseA_solution(FunctionPair("exp(t)+t", "sin(t)"), c)
    assert c.ricci_scalar == pytest.approx(c.ricci_scalar_expanded, rel=1e-14)
    for t, x in POINTS:
        assert ricci(res.metric, t, x)[1] == pytest.approx(c.ricci_scalar, rel=1e-6)
        assert res.det_a(t, x) == pytest.approx(res.printed_det(t, x), rel=1e-12)


def test_caseA_reduces_to_onefunction():
    one = onefunction_solution("exp(t)", ONE_C)
    red = caseA_solution(FunctionPair("exp(t)", 0), CaseAConstants.from_onefunction(ONE_C))
    for t, x in POINTS:
        np.testing.assert_allclose(red.metric.components(t, x), one.metric.components(t, x), rtol=1e-12)


def test_caseB_rotation_example():
    pair = FunctionPair("sin(t)", "cos(t)")
    res = caseB_solution(pair, CaseBConstants(1.0, 0.0, 1.0, 0.0, 0.0, 1.0))
    for t in (0.1, 0.8, 1.7):
        A2, B2, C = caseB_rescaled(pair, res.coefficients(t), t)
        assert (A2, B2, C) == pytest.approx((1.0, 1.0, 0.0), abs=1e-14)
        assert caseB_constraint(pair, res.coefficients(t), t) == pytest.approx(1.0, abs=1e-14)


def test_caseB_degenerate_constants():
    c = CaseBConstants(1.0, 2.0, 1.0, 0.0, 0.0, 0.7)
    assert c.constraint_value == 0.0
    assert c.ricci_scalar == 0.0


def test_caseB_curvature_det_and_drift():
    c = CaseBConstants(1.0, 0.3, 0.8, 0.2, -0.1, 0.5)
    pair = FunctionPair("sin(t)", "cos(t)")
    res = caseB_solution(pair, c)
    assert c.ricci_scalar == pytest.approx(c.ricci_scalar_expanded, rel=1e-14)
    for t, x in POINTS:
        assert ricci(res.metric, t, x)[1] == pytest.approx(c.ricci_scalar, rel=1e-6)
        assert res.det_a(t, x) == pytest.approx(res.printed_det(t, x), rel=1e-12)
    sampled = integrate_ansatz(res.gauge, res.coefficients(0.0), (0.0, 2.0), 400)
    drift = [caseB_constraint(pair, v, t) - c.constraint_value for t, v in zip(sampled.t, sampled.values)]
    assert max(map(abs, drift)) < 1e-8


def test_caseB_rejects_negative_v():
    # (cos, sin) has v = -1; swapping the pair fixes the sign
    res = caseB_solution(FunctionPair("cos(t)", "sin(t)"), CaseBConstants(1.0, 0.0, 1.0, 0.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        res.coefficients(0.3)


def test_onefunction_rejects_decreasing_f():
    res = onefunction_solution("-exp(t)", ONE_C)
    with pytest.raises(DomainError):
        res.coefficients(0.3)


@pytest.mark.parametrize(
    "make",
    [
        lambda: onefunction_solution("exp(t)", ONE_C),
        lambda: caseA_solution(FunctionPair("exp(t)+t", "sin(t)"), CaseAConstants(1.0, 0.2, 0.9, 0.3, -0.4, 1.1)),
        lambda: caseB_solution(FunctionPair("sin(t)", "cos(t)"), CaseBConstants(1.0, 0.3, 0.8, 0.2, -0.1, 0.5)),
    ],
)
def test_gauge_roundtrip(make):
    res = make()
    assert verify_gauge_roundtrip(res, POINTS, analytic=True).max_deviation < 1e-9
    assert verify_gauge_roundtrip(res, POINTS, analytic=False).max_deviation < 1e-6


def test_flat_case_roundtrip_zero():
    res = onefunction_solution("t", OneFunctionConstants.from_primes(1.0, 0.2, 2.0))
    report = verify_gauge_roundtrip(res, POINTS, analytic=True)
    assert report.max_deviation < 1e-12


def test_density_equations_hold():
    res = caseA_solution(FunctionPair("exp(t)+t", "sin(t)"), CaseAConstants(1.0, 0.2, 0.9, 0.3, -0.4, 1.1))
    for t, x in POINTS:
        assert np.max(np.abs(density_equation_residual(res.metric, res.gauge, t, x))) < 1e-7


def test_family_members_are_geodesics():
    from nlgeom.diffgeo import connection_field, geodesic_residual

    res = caseB_solution(FunctionPair("sin(t)", "cos(t)"), CaseBConstants(1.0, 0.3, 0.8, 0.2, -0.1, 0.5))
    field = connection_field(res.metric)
    for k1, k2 in [(0.3, -0.5), (0.9, 0.1)]:
        path = res.geodesic(k1, k2)
        for t in (0.4, 1.2):
            assert abs(geodesic_residual(path, field, t)) < 1e-6
