"""Matching distance between bifiltrations via extended Pareto grids."""
from .bifiltration import (BifilteredComplex, compute_diagram, make_sphere, make_torus,
                           sup_norm_difference)
from .diagrams import DiagramPoint, Matching, PersistenceDiagram, bottleneck, bottleneck_cost
from .estimate import (EstimatorConfig, EstimateReport, boundary_domination_check, naive_estimate,
                       realizer_bound_check, reduced_estimate, verify_main_theorem)
from .geometry import LineParam
from .pareto import Contour, ExtendedParetoGrid, analytic_sphere_grid, analytic_torus_grid
from .special import CandidateSet, GridPair, Region, scan_candidates, solve_U

__version__ = "0.1.0"

__all__ = [
    "BifilteredComplex", "compute_diagram", "make_sphere", "make_torus", "sup_norm_difference",
    "DiagramPoint", "Matching", "PersistenceDiagram", "bottleneck", "bottleneck_cost",
    "EstimatorConfig", "EstimateReport", "boundary_domination_check", "naive_estimate",
    "realizer_bound_check", "reduced_estimate", "verify_main_theorem",
    "LineParam", "Contour", "ExtendedParetoGrid", "analytic_sphere_grid", "analytic_torus_grid",
    "CandidateSet", "GridPair", "Region", "scan_candidates", "solve_U",
]
