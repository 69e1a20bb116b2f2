"""Kernels, geodesics and numerical certification on the model domains Im z_{n+1} > |z|^{2k}."""

from .fundamental import (
    ConvergenceError,
    SingularityError,
    a_fund,
    fundamental_solution_k1,
    k0_integral,
    k_lambda_closed_k1,
    k_lambda_integral,
    p_fund,
)
from .geometry import BoundaryPoint, KernelParams, QuasiMetricParts, heisenberg_multiply, quasi_metric, sigma_twist
from .geodesics import GeodesicSolution, cc_distance_k1, solve_geodesics_k1
from .szego import BoundaryGrid, SiegelPoint, szego_boundary, szego_full, szego_project

__version__ = "0.1.0"

__all__ = [
    "BoundaryGrid",
    "BoundaryPoint",
    "ConvergenceError",
    "GeodesicSolution",
    "KernelParams",
    "QuasiMetricParts",
    "SiegelPoint",
    "SingularityError",
    "a_fund",
    "cc_distance_k1",
    "fundamental_solution_k1",
    "heisenberg_multiply",
    "k0_integral",
    "k_lambda_closed_k1",
    "k_lambda_integral",
    "p_fund",
    "quasi_metric",
    "sigma_twist",
    "solve_geodesics_k1",
    "szego_boundary",
    "szego_full",
    "szego_project",
]
