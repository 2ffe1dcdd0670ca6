"""Matching-distance estimators and the checks built on them.

The naive estimator scans a regular grid of filtering lines. The reduced
estimator evaluates only the slope-1 lines and the sampled candidate set U
derived from the two extended Pareto grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _bottleneck
from .bifiltration import BifilteredComplex, diagram_arrays, sup_norm_difference
from .geometry import LineParam
from .pareto import ExtendedParetoGrid
from .special import GridPair, Region, solve_U

__all__ = [
    "EstimatorConfig",
    "LineRecord",
    "EstimateReport",
    "VerifyReport",
    "RealizerReport",
    "BoundaryReport",
    "compute_cbar",
    "line_costs",
    "profile",
    "naive_estimate",
    "reduced_estimate",
    "verify_main_theorem",
    "realizer_bound_check",
    "boundary_domination_check",
]


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampling parameters shared by the estimators.

    ``cbar=None`` means "compute from the inputs". ``degree=None`` compares
    every homology degree and keeps the largest cost.
    """

    cbar: float | None = None
    resolution_a: int = 200
    resolution_b: int = 200
    tol: float = 1e-3
    epsilon_boundary: float = 1e-3
    special_resolution: int = 60
    special_tol: float = 1e-6
    window_margin: float = 0.05
    degree: int | None = None

    def __post_init__(self):
        if self.resolution_a < 2 or self.resolution_b < 2 or self.special_resolution < 2:
            raise ValueError("resolutions must be at least 2")
        if not self.tol > 0 or not self.special_tol > 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.epsilon_boundary < 0.5:
            raise ValueError("epsilon_boundary must lie in ]0, 1/2[")
        if self.cbar is not None and not (self.cbar > 0 and math.isfinite(self.cbar)):
            raise ValueError("cbar must be positive and finite")
        if self.degree is not None and self.degree < 0:
            raise ValueError("degree must be non-negative")


@dataclass(frozen=True)
class LineRecord:
    a: float
    b: float
    costs: tuple[float, ...]

    @property
    def cost(self) -> float:
        return max(self.costs) if self.costs else 0.0

    @property
    def line(self) -> LineParam:
        return LineParam(self.a, self.b)


@dataclass(frozen=True)
class EstimateReport:
    value: float
    realizer: LineParam | None
    per_line: tuple[LineRecord, ...]
    method: str
    degrees: tuple[int, ...]
    witness: str | None = None

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def compute_cbar(cx1: BifilteredComplex, cx2: BifilteredComplex) -> float:
    return max(cx1.sup_norm(), cx2.sup_norm())


def _degrees(cx1, cx2, degree):
    if degree is not None:
        return (int(degree),)
    return tuple(range(max(cx1.dimension, cx2.dimension) + 1))


def line_costs(cx1: BifilteredComplex, cx2: BifilteredComplex, a: float, b: float,
               degrees: Sequence[int]) -> tuple[float, ...]:
    """Bottleneck cost per degree between the two diagrams along ``r_(a,b)``."""
    top = max(degrees)
    d1 = diagram_arrays(cx1, a, b, top)
    d2 = diagram_arrays(cx2, a, b, top)
    out = []
    for k in degrees:
        b1, e1, s1 = d1[k]
        b2, e2, s2 = d2[k]
        out.append(float(_bottleneck.bottleneck_cost(b1, e1, b2, e2, s1, s2)))
    return tuple(out)


def profile(cx1, cx2, params, degrees) -> list[LineRecord]:
    return [LineRecord(float(a), float(b), line_costs(cx1, cx2, a, b, degrees)) for a, b in params]


def _essential_counts(cx, a, b, k):
    return len(diagram_arrays(cx, a, b, k)[k][2])


def _report(cx1, cx2, records, method, degrees) -> EstimateReport:
    if not records:
        return EstimateReport(0.0, None, (), method, degrees)
    costs = np.array([r.cost for r in records])
    best = int(np.argmax(costs))
    rec = records[best]
    witness = None
    if math.isinf(rec.cost):
        k = degrees[int(np.argmax(rec.costs))]
        n1 = _essential_counts(cx1, rec.a, rec.b, k)
        n2 = _essential_counts(cx2, rec.a, rec.b, k)
        witness = (f"line (a={rec.a:.17g}, b={rec.b:.17g}) degree {k}: "
                   f"{n1} vs {n2} essential points")
    return EstimateReport(float(costs[best]), rec.line, tuple(records), method, degrees, witness)


def _cbar(cx1, cx2, config):
    cbar = config.cbar if config.cbar is not None else compute_cbar(cx1, cx2)
    return cbar if cbar > 0 else 1.0


def naive_grid(cbar: float, config: EstimatorConfig) -> tuple[np.ndarray, np.ndarray]:
    eps = config.epsilon_boundary
    A = np.linspace(eps, 1.0 - eps, config.resolution_a)
    B = np.linspace(-cbar, cbar, config.resolution_b)
    return A, B


def naive_estimate(cx1: BifilteredComplex, cx2: BifilteredComplex,
                   config: EstimatorConfig = EstimatorConfig()) -> EstimateReport:
    """Largest bottleneck cost over a regular grid of lines in the open strip."""
    degrees = _degrees(cx1, cx2, config.degree)
    A, B = naive_grid(_cbar(cx1, cx2, config), config)
    params = [(a, b) for a in A for b in B]
    return _report(cx1, cx2, profile(cx1, cx2, params, degrees), "naive", degrees)


def slope_one_params(cbar: float, resolution: int) -> list[tuple[float, float]]:
    return [(0.5, float(b)) for b in np.linspace(-cbar, cbar, resolution)]


def candidate_params(grid1: ExtendedParetoGrid, grid2: ExtendedParetoGrid, cbar: float,
                     config: EstimatorConfig, window=(0.0, math.inf)) -> list[tuple[float, float]]:
    """Unique solved points of U inside the strip ``|b| <= cbar``."""
    region = Region.strip(cbar, config.epsilon_boundary)
    U = solve_U(GridPair(grid1, grid2), region, config.special_resolution, config.special_tol, window)
    if not len(U):
        return []
    pts = np.unique(np.column_stack([U.a, U.b]), axis=0)
    return [(float(a), float(b)) for a, b in pts]


def value_window(cx1, cx2, segment_max: float, margin: float) -> tuple[float, float]:
    """Range of witness values ``c |gap|`` that can beat the slope-1 maximum.

    At a realizer the bottleneck cost is a witness gap or half of it, so only
    values in ``[D_seg, 2 D_max]`` matter, where ``D_max`` bounds the distance
    (the sup-norm difference for inputs on one complex).
    """
    upper = sup_norm_difference(cx1, cx2) if cx1.same_structure(cx2) else math.inf
    return max(segment_max - margin, 0.0), 2.0 * upper + margin


def reduced_estimate(cx1: BifilteredComplex, cx2: BifilteredComplex,
                     grid1: ExtendedParetoGrid, grid2: ExtendedParetoGrid,
                     config: EstimatorConfig = EstimatorConfig()) -> EstimateReport:
    """Largest bottleneck cost over the slope-1 lines and the solved set U."""
    degrees = _degrees(cx1, cx2, config.degree)
    cbar = _cbar(cx1, cx2, config)
    records = profile(cx1, cx2, slope_one_params(cbar, config.resolution_b), degrees)
    top = max(r.cost for r in records)
    if math.isfinite(top):
        window = value_window(cx1, cx2, top, config.window_margin)
        records += profile(cx1, cx2, candidate_params(grid1, grid2, cbar, config, window), degrees)
    return _report(cx1, cx2, records, "reduced", degrees)


@dataclass(frozen=True)
class VerifyReport:
    naive: EstimateReport
    reduced: EstimateReport
    tol: float

    @property
    def gap(self) -> float:
        return self.naive.value - self.reduced.value

    @property
    def passed(self) -> bool:
        if math.isinf(self.naive.value):
            return math.isinf(self.reduced.value)
        return self.reduced.value >= self.naive.value - self.tol


def verify_main_theorem(cx1, cx2, grid1, grid2, config: EstimatorConfig = EstimatorConfig()) -> VerifyReport:
    return VerifyReport(naive_estimate(cx1, cx2, config),
                        reduced_estimate(cx1, cx2, grid1, grid2, config), config.tol)


@dataclass(frozen=True)
class RealizerReport:
    norm1: float
    norm2: float
    distance: float
    hypothesis: bool
    bound: float | None
    a_bar: float | None
    satisfied: bool
    at_full_distance: bool
    message: str


def realizer_bound_check(cx1: BifilteredComplex, cx2: BifilteredComplex, report: EstimateReport,
                         tol: float = 1e-9) -> RealizerReport:
    """Check the lower bound on the realizer's ``a`` implied by a near-maximal distance."""
    if not cx1.same_structure(cx2):
        raise ValueError("complexes must share the same simplicial structure")
    diff = np.abs(cx1.values - cx2.values)
    n1, n2 = (float(diff[:, 0].max()), float(diff[:, 1].max())) if len(diff) else (0.0, 0.0)
    full = max(n1, n2)
    dist = report.value
    a_bar = report.realizer.a if report.realizer is not None else None
    at_full_distance = abs(dist - full) <= tol and n2 > n1
    hypothesis = (full - dist) < (n2 - n1)
    if not hypothesis:
        return RealizerReport(n1, n2, dist, False, None, a_bar, True, at_full_distance,
                              "hypothesis does not hold; bound not applicable")
    bound = n1 / (n1 + n2)
    if a_bar is None:
        return RealizerReport(n1, n2, dist, True, bound, None, False, at_full_distance, "no realizer available")
    ok = a_bar > bound
    msg = f"a_bar={a_bar:.6g} {'>' if ok else '<='} {bound:.6g}"
    if n1 == 0.0:
        msg += " (zero first-component change)"
    return RealizerReport(n1, n2, dist, True, bound, a_bar, ok, at_full_distance, msg)


@dataclass(frozen=True)
class BoundaryReport:
    segment_max: float
    boundary: tuple[LineRecord, ...]
    segment: tuple[LineRecord, ...]
    tol: float
    violations: tuple[LineRecord, ...] = field(default=())

    @property
    def boundary_max(self) -> float:
        return max((r.cost for r in self.boundary), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.violations


def boundary_domination_check(cx1: BifilteredComplex, cx2: BifilteredComplex,
                              config: EstimatorConfig = EstimatorConfig()) -> BoundaryReport:
    """Compare bottleneck profiles at ``a`` in {0, 1} with the slope-1 maximum."""
    degrees = _degrees(cx1, cx2, config.degree)
    cbar = _cbar(cx1, cx2, config)
    bs = np.linspace(-cbar, cbar, config.resolution_b)
    boundary = profile(cx1, cx2, [(a, b) for a in (0.0, 1.0) for b in bs], degrees)
    segment = profile(cx1, cx2, slope_one_params(cbar, config.resolution_b), degrees)
    top = max((r.cost for r in segment), default=0.0)
    bad = tuple(r for r in boundary if r.cost > top + config.tol)
    return BoundaryReport(top, tuple(boundary), tuple(segment), config.tol, bad)
