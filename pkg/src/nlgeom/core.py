"""Exact solution of the coupled two-state nonlinear Schrodinger pair.

The pair obeys

    i d|psi>/dt = H|psi> + g |phi><phi|psi>
    i d|phi>/dt = H|phi> + g* |psi><psi|phi>

and is built from two orthonormal solutions |A>, |B> of the linear problem.
H is represented by its eigenvalues, so states are coefficient vectors over
the energy eigenbasis.  Natural units (hbar = 1) throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

NORM_TOL = 1e-10


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Coupling:
    """Complex coupling g = a + ib."""

    a: float
    b: float

    def __post_init__(self):
        _require_finite(a=self.a, b=self.b)

    @property
    def g(self) -> complex:
        return complex(self.a, self.b)


@dataclass(frozen=True)
class ModePair:
    """Orthonormal states |A>, |B> given as coefficients over eigenstates of H."""

    energies: np.ndarray
    coeff_a: np.ndarray
    coeff_b: np.ndarray
    tol: float = NORM_TOL

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        ca = np.asarray(self.coeff_a, dtype=complex)
        cb = np.asarray(self.coeff_b, dtype=complex)
        if not (e.ndim == ca.ndim == cb.ndim == 1):
            raise ValueError("energies and coefficients must be 1-d")
        if not (len(e) == len(ca) == len(cb) >= 1):
            raise ValueError("energies, coeff_a and coeff_b need equal length >= 1")
        _require_finite(energies=e, coeff_a=ca, coeff_b=cb)
        if abs(np.vdot(ca, ca) - 1) > self.tol or abs(np.vdot(cb, cb) - 1) > self.tol:
            raise ValueError("|A> and |B> must be normalized")
        if abs(np.vdot(ca, cb)) > self.tol:
            raise ValueError("|A> and |B> must be orthogonal")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "coeff_a", ca)
        object.__setattr__(self, "coeff_b", cb)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def evolved(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Linear evolution of |A> and |B> to time t."""
        phase = np.exp(-1j * self.energies * t)
        return self.coeff_a * phase, self.coeff_b * phase


@dataclass(frozen=True)
class NonlinearSolution:
    """Parameters (g, omega0, theta) of the exact solution, plus the mode pair.

    ``modes`` may be omitted when only the scalar functions (gamma, norms,
    mixing coefficients) are needed, e.g. for continuum realizations.
    """

    coupling: Coupling
    omega0: float
    theta: float
    modes: Optional[ModePair] = field(default=None)

    def __post_init__(self):
        _require_finite(omega0=self.omega0, theta=self.theta)
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")

    @property
    def N(self) -> float:
        return 2.0 * self.omega0 * math.cosh(2.0 * self.theta)


@dataclass(frozen=True)
class StatePairAt:
    t: float
    psi: np.ndarray
    phi: np.ndarray


def _log_cosh(x: float) -> float:
    ax = abs(x)
    if ax < 1e-3:
        x2 = x * x
        return x2 / 2 - x2 * x2 / 12 + x2 * x2 * x2 / 45
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


def _gamma_exponent(sol: NonlinearSolution, t: float) -> complex:
    """log(gamma / omega0) = (ig/b) log cosh(2 omega0 b t), continuous in b."""
    _require_finite(t=t)
    a, b = sol.coupling.a, sol.coupling.b
    if b == 0.0:
        return 0j
    x = 2.0 * sol.omega0 * b * t
    lc = _log_cosh(x)
    # (ig/b) lc = i a lc / b - lc, and lc / b -> 2 omega0^2 b t^2 as b -> 0
    if abs(x) < 1e-3:
        x2 = x * x
        lc_over_b = 2.0 * sol.omega0 * t * x * (0.5 - x2 / 12 + x2 * x2 / 45)
    else:
        lc_over_b = lc / b
    return complex(-lc, a * lc_over_b)


def gamma(sol: NonlinearSolution, t: float) -> complex:
    """<phi|psi> = omega0 (cosh 2 omega0 b t)^(ig/b); equals omega0 when b = 0."""
    return sol.omega0 * complex(np.exp(_gamma_exponent(sol, t)))


def gamma_sqrt(sol: NonlinearSolution, t: float) -> complex:
    """gamma^(1/2) on the branch continuous in t with gamma^(1/2)(0) = sqrt(omega0)."""
    return math.sqrt(sol.omega0) * complex(np.exp(0.5 * _gamma_exponent(sol, t)))


def mixing_coefficients(sol: NonlinearSolution, t: float) -> tuple[complex, complex, complex, complex]:
    """Weights of |A(t)>, |B(t)> in |psi(t)> and |phi(t)>.

    Returns (psi_a, psi_b, phi_a, phi_b) so that
    |psi> = psi_a |A(t)> + psi_b |B(t)> and |phi> = phi_a |A(t)> + phi_b |B(t)>.
    """
    g = sol.coupling.g
    w0 = sol.omega0
    sh, ch = math.sinh(sol.theta), math.cosh(sol.theta)
    root = gamma_sqrt(sol, t)
    root_c = root.conjugate()
    gc = g.conjugate()
    psi_a = root * np.exp(1j * g * w0 * t) * sh
    psi_b = root * np.exp(-1j * g * w0 * t) * ch
    phi_a = -root_c * np.exp(1j * gc * w0 * t) * sh
    phi_b = root_c * np.exp(-1j * gc * w0 * t) * ch
    return complex(psi_a), complex(psi_b), complex(phi_a), complex(phi_b)


def evolve_pair(sol: NonlinearSolution, t: float) -> StatePairAt:
    if sol.modes is None:
        raise ValueError("evolve_pair needs a ModePair")
    at, bt = sol.modes.evolved(t)
    psi_a, psi_b, phi_a, phi_b = mixing_coefficients(sol, t)
    return StatePairAt(t=t, psi=psi_a * at + psi_b * bt, phi=phi_a * at + phi_b * bt)


def norms(sol: NonlinearSolution, t: float) -> tuple[float, float]:
    """Closed-form (<psi|psi>, <phi|phi>) = ((N + tau)/2, (N - tau)/2)."""
    _require_finite(t=t)
    tau = 2.0 * sol.omega0 * math.tanh(2.0 * sol.omega0 * sol.coupling.b * t)
    return 0.5 * (sol.N + tau), 0.5 * (sol.N - tau)


def equation_residual(
    sol: NonlinearSolution,
    t: float,
    h: float,
    evolve: Callable[[NonlinearSolution, float], StatePairAt] = evolve_pair,
) -> tuple[float, float]:
    """Max-norm residuals of both equations of motion, time derivative by central difference.

    ``evolve`` can be swapped for a perturbed evolution to check that the
    residual actually detects wrong states.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if sol.modes is None:
        raise ValueError("equation_residual needs a ModePair")
    g = sol.coupling.g
    energies = sol.modes.energies
    fwd, bwd, mid = evolve(sol, t + h), evolve(sol, t - h), evolve(sol, t)
    dpsi = (fwd.psi - bwd.psi) / (2 * h)
    dphi = (fwd.phi - bwd.phi) / (2 * h)
    overlap = np.vdot(mid.phi, mid.psi)
    res_psi = 1j * dpsi - (energies * mid.psi + g * mid.phi * overlap)
    res_phi = 1j * dphi - (energies * mid.phi + g.conjugate() * mid.psi * overlap.conjugate())
    return float(np.max(np.abs(res_psi))), float(np.max(np.abs(res_phi)))
