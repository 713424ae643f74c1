"""Free-particle realization of |A>, |B> on a uniform momentum grid.

Position acts as X = i d/dp in momentum space.  Free evolution multiplies
amplitudes by exp(-i p^2 t / 2m); X is applied to the evolved state with the
product rule, a fourth-order central difference acting on the t = 0 envelope
and the phase derivative taken exactly.  That keeps <A(t)|X|B(t)> linear in t
to rounding error instead of carrying a t-dependent stencil error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import NonlinearSolution, mixing_coefficients
from .trajectory import TrajectoryParams

DEFAULT_POINTS = 1024
DEFAULT_WIDTH = 8.0  # half-width in units of the momentum spread
ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class GaussianPacket:
    """Minimum-uncertainty packet with position spread ``sigma``."""

    x0: float
    p0: float
    sigma: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def sigma_p(self) -> float:
        return 1.0 / (2.0 * self.sigma)

    def amplitude(self, p: np.ndarray) -> np.ndarray:
        norm = (2.0 * self.sigma**2 / math.pi) ** 0.25
        return norm * np.exp(-self.sigma**2 * (p - self.p0) ** 2 - 1j * p * self.x0)


@dataclass(frozen=True)
class MomentumGridState:
    p: np.ndarray
    amp: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        amp = np.asarray(self.amp, dtype=complex)
        if p.ndim != 1 or len(p) < 16:
            raise ValueError("momentum grid needs at least 16 points")
        if amp.shape != p.shape:
            raise ValueError("amplitudes must match the grid")
        steps = np.diff(p)
        if not np.all(steps > 0) or np.ptp(steps) > 1e-9 * steps[0]:
            raise ValueError("momentum grid must be uniform and increasing")
        if not np.isfinite(np.sum(np.abs(amp) ** 2)):
            raise ValueError("state norm is not finite")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "amp", amp)

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2) * self.dp))

    def normalized(self) -> "MomentumGridState":
        return MomentumGridState(self.p, self.amp / self.norm(), self.mass)

    def free_phase(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.p**2 * t / (2.0 * self.mass))

    def evolved(self, t: float) -> np.ndarray:
        return self.amp * self.free_phase(t)

    def apply_X(self, t: float) -> np.ndarray:
        """X|state(t)> = exp(-ip^2 t/2m) (i d/dp + p t/m) applied to the t = 0 amplitude."""
        d_amp = fd4_derivative(self.amp, self.dp)
        return self.free_phase(t) * (1j * d_amp + (self.p * t / self.mass) * self.amp)


def fd4_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference, zero outside the grid."""
    padded = np.concatenate([np.zeros(2, values.dtype), values, np.zeros(2, values.dtype)])
    return (padded[:-4] - 8 * padded[1:-3] + 8 * padded[3:-1] - padded[4:]) / (12.0 * h)


def momentum_grid(
    packets: Sequence[GaussianPacket], points: int = DEFAULT_POINTS, width: float = DEFAULT_WIDTH
) -> np.ndarray:
    lo = min(pk.p0 - width * pk.sigma_p for pk in packets)
    hi = max(pk.p0 + width * pk.sigma_p for pk in packets)
    return np.linspace(lo, hi, points)


def packet_state(packet: GaussianPacket, p: np.ndarray) -> MomentumGridState:
    return MomentumGridState(p, packet.amplitude(p), packet.mass).normalized()


def orthonormalize(sa: MomentumGridState, sb: MomentumGridState) -> tuple[MomentumGridState, MomentumGridState]:
    """One Gram-Schmidt step: B is made orthogonal to A, both normalized."""
    _check_same_grid(sa, sb)
    sa = sa.normalized()
    overlap = np.vdot(sa.amp, sb.amp) * sa.dp
    sb = MomentumGridState(sb.p, sb.amp - overlap * sa.amp, sb.mass).normalized()
    residual = abs(np.vdot(sa.amp, sb.amp) * sa.dp)
    if residual > ORTHO_TOL:
        raise ValueError(f"Gram-Schmidt left overlap {residual:.3e}")
    return sa, sb


def _check_same_grid(sa: MomentumGridState, sb: MomentumGridState) -> None:
    if sa.p.shape != sb.p.shape or not np.array_equal(sa.p, sb.p):
        raise ValueError("states live on different momentum grids")
    if sa.mass != sb.mass:
        raise ValueError("states carry different masses")


def matrix_element_X(sa: MomentumGridState, sb: MomentumGridState, t: float) -> complex:
    """<A(t)|X|B(t)> by quadrature on the shared grid."""
    _check_same_grid(sa, sb)
    return complex(np.vdot(sa.evolved(t), sb.apply_X(t)) * sa.dp)


@dataclass(frozen=True)
class LinearCoeffs:
    alpha: complex
    beta: complex
    residual: float = 0.0

    def __call__(self, t):
        return self.alpha * np.asarray(t) + self.beta


def fit_linear(samples: Sequence[tuple[float, complex]]) -> LinearCoeffs:
    """Least-squares line through complex samples; ``residual`` is the max deviation."""
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    t = np.array([s[0] for s in samples], dtype=float)
    z = np.array([s[1] for s in samples], dtype=complex)
    if np.ptp(t) == 0 or len(np.unique(t)) != len(t):
        raise ValueError("sample times must be distinct")
    design = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(design, z, rcond=None)
    resid = float(np.max(np.abs(design @ coef - z)))
    return LinearCoeffs(complex(coef[0]), complex(coef[1]), resid)


def sample_matrix_element(sa, sb, times) -> LinearCoeffs:
    return fit_linear([(t, matrix_element_X(sa, sb, t)) for t in times])


def extract_k(
    aa: LinearCoeffs, bb: LinearCoeffs, ab: LinearCoeffs, omega0: float, theta: float, tol: float = 1e-9
) -> tuple[float, ...]:
    """Eight trajectory constants from <A|X|A>, <B|X|B>, <A|X|B> (each alpha t + beta).

    Expanding <psi|X|psi> with the exact solution gives, with s = sinh(theta),
    c = cosh(theta):

        k1 = w0 (s^2 aA + c^2 aB)     k2 = w0 (s^2 bA + c^2 bB)
        k3 = w0 (c^2 aB - s^2 aA)     k4 = w0 (c^2 bB - s^2 bA)
        k5 + i k7 = w0 sinh(2 theta) alpha_AB
        k6 + i k8 = w0 sinh(2 theta) beta_AB
    """
    for name, lc in (("<A|X|A>", aa), ("<B|X|B>", bb)):
        scale = max(1.0, abs(lc.alpha), abs(lc.beta))
        if abs(lc.alpha.imag) > tol * scale or abs(lc.beta.imag) > tol * scale:
            raise ValueError(f"{name} must have real coefficients")
    s2 = math.sinh(theta) ** 2
    c2 = math.cosh(theta) ** 2
    s2t = math.sinh(2.0 * theta)
    w0 = omega0
    return (
        w0 * (s2 * aa.alpha.real + c2 * bb.alpha.real),
        w0 * (s2 * aa.beta.real + c2 * bb.beta.real),
        w0 * (c2 * bb.alpha.real - s2 * aa.alpha.real),
        w0 * (c2 * bb.beta.real - s2 * aa.beta.real),
        w0 * s2t * ab.alpha.real,
        w0 * s2t * ab.beta.real,
        w0 * s2t * ab.alpha.imag,
        w0 * s2t * ab.beta.imag,
    )


def trajectory_params(
    sol: NonlinearSolution, sa: MomentumGridState, sb: MomentumGridState, times=(-1.0, -0.5, 0.0, 0.5, 1.0)
) -> TrajectoryParams:
    """TrajectoryParams for the given packets, constants fitted from grid matrix elements."""
    k = extract_k(
        sample_matrix_element(sa, sa, times),
        sample_matrix_element(sb, sb, times),
        sample_matrix_element(sa, sb, times),
        sol.omega0,
        sol.theta,
    )
    return TrajectoryParams(k, sol.omega0, sol.coupling.a, sol.coupling.b, sol.theta)


def trajectory_expectation(
    sol: NonlinearSolution, sa: MomentumGridState, sb: MomentumGridState, t: float, min_norm: float = 1e-12
) -> float:
    """<psi(t)|X|psi(t)> / <psi(t)|psi(t)> with |psi(t)> assembled on the grid."""
    _check_same_grid(sa, sb)
    psi_a, psi_b, _, _ = mixing_coefficients(sol, t)
    psi = psi_a * sa.evolved(t) + psi_b * sb.evolved(t)
    x_psi = psi_a * sa.apply_X(t) + psi_b * sb.apply_X(t)
    norm = float(np.vdot(psi, psi).real * sa.dp)
    if norm < min_norm:
        raise ValueError(f"degenerate state: <psi|psi> = {norm:.3e}")
    return float((np.vdot(psi, x_psi) * sa.dp).real / norm)


def state_norm(sol: NonlinearSolution, sa: MomentumGridState, sb: MomentumGridState, t: float) -> float:
    psi_a, psi_b, _, _ = mixing_coefficients(sol, t)
    psi = psi_a * sa.evolved(t) + psi_b * sb.evolved(t)
    return float(np.vdot(psi, psi).real * sa.dp)
