"""Exact solutions of a two-state nonlinear Schrodinger pair, the particle
trajectories they induce, and 2D metrics reconstructed from geodesic families."""

__version__ = "0.1.0"

from .core import Coupling, ModePair, NonlinearSolution, evolve_pair, gamma, norms
from .diffgeo import MetricField, christoffel, ricci, signature
from .inversion import (
    CaseAConstants,
    CaseBConstants,
    OneFunctionConstants,
    caseA_solution,
    caseB_solution,
    onefunction_solution,
)
from .kruskal import KruskalChart, LineGeodesic, classify, tangency_check, traversability
from .trajectory import TrajectoryParams, X_phi, X_psi

__all__ = [
    "CaseAConstants",
    "CaseBConstants",
    "Coupling",
    "KruskalChart",
    "LineGeodesic",
    "MetricField",
    "ModePair",
    "NonlinearSolution",
    "OneFunctionConstants",
    "TrajectoryParams",
    "X_phi",
    "X_psi",
    "caseA_solution",
    "caseB_solution",
    "christoffel",
    "classify",
    "evolve_pair",
    "gamma",
    "norms",
    "onefunction_solution",
    "ricci",
    "signature",
    "tangency_check",
    "traversability",
]
