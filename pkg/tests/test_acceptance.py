"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; a summary section is also printed at the end of any pytest run that
includes this module. The two desk experiments (criteria 9 and 11) take a few
minutes in total.
"""
import math
import time

import numpy as np
import pytest

from matchdist.bifiltration import compute_diagram, edge_value_gap, make_sphere, make_torus, sup_norm_difference
from matchdist.diagrams import DELTA, DiagramPoint, PersistenceDiagram, bottleneck_cost, multiplicity_box, point_distance
from matchdist.estimate import (EstimatorConfig, boundary_domination_check, line_costs, naive_estimate,
                                realizer_bound_check, reduced_estimate)
from matchdist.geometry import LineParam
from matchdist.pareto import (Contour, ExtendedParetoGrid, analytic_sphere_grid, analytic_torus_grid,
                              hat_intersect, intersect, position_candidates, position_check, threshold_slope)
from matchdist.special import (CurveCQuadruple, GridPair, curveC_factored, curveC_residual, is_special,
                               is_ultraspecial)

from oracles import ref_bottleneck

INF = math.inf
P, E = DiagramPoint.proper, DiagramPoint.essential
RESULTS = {}

SPHERE_SHIFT = dict(center=(0.3, 0.0, 0.0))
TORUS_OTHER = dict(radii=(2.1, 0.7), center=(0.1, 0.05, 0.0))
SPHERE_RES = 32
TORUS_RES = 24
DESK = EstimatorConfig(resolution_a=200, resolution_b=200)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def rel(x: float, y: float) -> float:
    return abs(x - y) / max(abs(x), abs(y), 1e-300)


# desk instances, shared by criteria 4, 9 and 11

def _desk(cx1, cx2, g1, g2):
    t0 = time.perf_counter()
    naive = naive_estimate(cx1, cx2, DESK)
    t1 = time.perf_counter()
    reduced = reduced_estimate(cx1, cx2, g1, g2, DESK)
    t2 = time.perf_counter()
    return dict(cx=(cx1, cx2), naive=naive, reduced=reduced, t_naive=t1 - t0, t_reduced=t2 - t1)


@pytest.fixture(scope="module")
def sphere_desk():
    return _desk(make_sphere(SPHERE_RES), make_sphere(SPHERE_RES, **SPHERE_SHIFT),
                 analytic_sphere_grid(), analytic_sphere_grid(**SPHERE_SHIFT))


@pytest.fixture(scope="module")
def torus_desk():
    return _desk(make_torus(TORUS_RES), make_torus(TORUS_RES, **TORUS_OTHER),
                 analytic_torus_grid(), analytic_torus_grid(**TORUS_OTHER))


def test_criterion_01_bottleneck_exactness():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        pts = []
        for _ in range(2):
            n = rng.integers(0, 7)
            side = []
            for _ in range(n):
                u = float(rng.uniform(-1, 1))
                side.append((u, INF) if rng.random() < 0.3 else (u, u + float(rng.exponential(0.5)) + 1e-9))
            pts.append(side)
        fast = float(bottleneck_cost(PersistenceDiagram(0, pts[0]), PersistenceDiagram(0, pts[1])))
        ref = ref_bottleneck(*pts)
        err = 0.0 if fast == ref else abs(fast - ref)
        worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    record(1, worst <= 1e-12 and elapsed < 10, f"200 pairs, max error {worst:.3g}, {elapsed:.2f} s")


METRIC_TABLE = [
    # proper vs proper: coordinate shift wins
    (P(0, 10), P(1, 12), 2.0),
    (P(0, 4), P(0.5, 4.25), 0.5),
    # proper vs proper: both sent to the diagonal is cheaper
    (P(0, 1), P(5, 6), 0.5),
    (P(0, 0.5), P(3, 4), 0.5),
    # essential vs essential
    (E(0), E(2), 2.0),
    (E(-1.5), E(-1.5), 0.0),
    # proper vs diagonal, either order
    (P(1, 2), DELTA, 0.5),
    (DELTA, P(-3, 5), 4.0),
    # diagonal vs diagonal
    (DELTA, DELTA, 0.0),
    # essential vs proper and essential vs diagonal: infinite
    (E(0), P(0, 1), INF),
    (P(2, 3), E(2), INF),
    (E(1), DELTA, INF),
]


def test_criterion_02_metric_cases():
    bad = [(p, q) for p, q, d in METRIC_TABLE if float(point_distance(p, q)) != d or float(point_distance(q, p)) != d]
    record(2, not bad and len(METRIC_TABLE) == 12, f"{len(METRIC_TABLE)} pairs, {len(bad)} mismatches")


def test_criterion_03_diagram_stability():
    rng = np.random.default_rng(3)
    cx = make_sphere(SPHERE_RES)
    delta = 0.05
    worst = 0.0
    for _ in range(50):
        other = cx.with_values(cx.values + rng.uniform(-delta, delta, cx.values.shape))
        for _ in range(20):
            costs = line_costs(cx, other, float(rng.uniform(0, 1)), float(rng.uniform(-1, 1)), (0, 1, 2))
            worst = max(worst, max(costs))
    record(3, worst <= delta + 1e-9, f"max per-line cost {worst:.6g} vs delta {delta}")


def test_criterion_04_matching_distance_stability(sphere_desk, torus_desk):
    rng = np.random.default_rng(4)
    cases = []
    for desk in (sphere_desk, torus_desk):
        cases.append((desk["naive"].value, sup_norm_difference(*desk["cx"])))
    small = EstimatorConfig(resolution_a=41, resolution_b=41)
    cx = make_sphere(16)
    for shift in ((1.0, 3.0), (0.2, 0.0)):
        other = cx.with_values(cx.values + shift)
        cases.append((naive_estimate(cx, other, small).value, sup_norm_difference(cx, other)))
    for _ in range(3):
        other = cx.with_values(cx.values + rng.uniform(-0.1, 0.1, cx.values.shape))
        cases.append((naive_estimate(cx, other, small).value, sup_norm_difference(cx, other)))
    slack = min(bound + 1e-9 - est for est, bound in cases)
    record(4, slack >= 0, f"{len(cases)} instances, min slack {slack:.3g}")


def test_criterion_05_position_theorem():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    checked = failures = 0
    for cx, grid in ((make_sphere(64), analytic_sphere_grid()), (make_torus(48), analytic_torus_grid())):
        cb = cx.sup_norm()
        lines = [LineParam(rng.uniform(0.05, 0.95), rng.uniform(-cb, cb)) for _ in range(10)]
        lines += [LineParam(a, b) for a in (0.0, 1.0) for b in np.linspace(-cb, cb, 5)]
        for line in lines:
            tol = 2 * edge_value_gap(cx, line.a, line.b)
            rep = position_check(compute_diagram(cx, line), position_candidates(grid, None, line), tol)
            checked += rep.checked
            failures += len(rep.violations)
    elapsed = time.perf_counter() - t0
    record(5, failures == 0 and elapsed < 120, f"{checked} coordinates, {failures} off-grid, {elapsed:.1f} s")


def test_criterion_06_threshold_example():
    rng = np.random.default_rng(6)
    worst = 0.0
    hat_ok = flip_ok = True
    for _ in range(100):
        b = float(rng.uniform(-2, 2))
        x0, y0 = b + float(rng.uniform(0.05, 3)), -b + float(rng.uniform(0.05, 3))
        h = Contour.horizontal(x0, y0)
        A = threshold_slope(h, b)
        worst = max(worst, abs(A - (x0 - b) / (x0 + y0)))
        p = hat_intersect(LineParam(1.0, b), h)
        hat_ok &= p is not None and p.x.is_inf and float(p.y) == y0
        step = 1e-7
        flip_ok &= intersect(LineParam(A - step, b), h) is None
        flip_ok &= intersect(LineParam(min(A + step, 1 - 1e-12), b), h) is not None
    ok = worst <= 1e-9 and hat_ok and flip_ok
    record(6, ok, f"max error {worst:.3g}, hat at a=1 {'ok' if hat_ok else 'bad'}, flip {'ok' if flip_ok else 'bad'}")


def test_criterion_07_factorisation():
    rng = np.random.default_rng(7)
    quads = []
    for q in range(20):
        # every fourth quadruple has vertical contours (slope -inf)
        slopes = [-INF if (q % 4 == 0 and k < 2) or rng.random() < 0.15 else -float(rng.exponential())
                  for k in range(4)]
        quads.append(CurveCQuadruple.from_slopes(slopes, rng.uniform(-2, 2, (4, 2))))
    lines = [LineParam(float(rng.uniform(0.01, 0.99)), float(rng.uniform(-2, 2))) for _ in range(1000)]
    worst = 0.0
    for quad in quads:
        for line in lines:
            worst = max(worst, rel(curveC_residual(line, quad), curveC_factored(line, quad).value))
    n_inf = sum(any(math.isinf(m) for m in q.slopes) for q in quads)
    record(7, worst <= 1e-9, f"1000 lines x 20 quadruples ({n_inf} with vertical contours), "
                             f"max relative error {worst:.3g}")


def test_criterion_08_ultraspecial_example():
    V = Contour.vertical
    gp = GridPair(ExtendedParetoGrid([V(0, -5), V(1, -5), V(2, -5)]))
    sampled = fired = 0
    worst = 0.0
    for a in np.linspace(0.05, 0.95, 19):
        for b in np.linspace(-3, 3, 25):
            line = LineParam(float(a), float(b))
            if any(intersect(line, c) is None for c in gp.contours):
                continue
            sampled += 1
            us = is_ultraspecial(gp, line, 1e-9)
            if is_special(gp, line, 1e-9) and us is not None:
                fired += 1
                worst = max(worst, us.residual)
    ok = sampled > 0 and fired == sampled and worst <= 1e-12
    record(8, ok, f"{fired}/{sampled} lines fire, max residual {worst:.3g}")


def _desk_line(name, desk):
    n, r = desk["naive"], desk["reduced"]
    total = desk["t_naive"] + desk["t_reduced"]
    ok = r.value >= n.value - 1e-3 and total < 600
    return ok, (f"{name}: naive {n.value:.6f} reduced {r.value:.6f} (diff {r.value - n.value:+.1e}, "
                f"{len(r.per_line)} lines), {desk['t_naive']:.0f}+{desk['t_reduced']:.0f} s")


def test_criterion_09_reduced_reaches_naive(sphere_desk, torus_desk):
    ok1, d1 = _desk_line("sphere", sphere_desk)
    ok2, d2 = _desk_line("torus", torus_desk)
    record(9, ok1 and ok2, f"{d1}; {d2}")


def test_criterion_10_realizer_bound():
    cx = make_sphere(16)
    other = cx.with_values(cx.values + (1.0, 3.0))
    rep = naive_estimate(cx, other, EstimatorConfig(resolution_a=200, resolution_b=200))
    chk = realizer_bound_check(cx, other, rep)
    ok = chk.norm1 == 1.0 and chk.norm2 == 3.0 and chk.hypothesis and chk.a_bar is not None and chk.a_bar > 0.25
    record(10, ok, f"distance {rep.value:.6f}, hypothesis {chk.hypothesis}, {chk.message}")


def test_criterion_11_boundary_domination(sphere_desk, torus_desk):
    parts, ok = [], True
    for name, desk in (("sphere", sphere_desk), ("torus", torus_desk)):
        bd = boundary_domination_check(*desk["cx"], DESK)
        good = bd.boundary_max <= bd.segment_max + 1e-3 and bd.passed
        ok &= good
        parts.append(f"{name}: boundary {bd.boundary_max:.6f} vs slope-1 {bd.segment_max:.6f}")
    record(11, ok, "; ".join(parts))


def test_criterion_12_multiplicity_consistency():
    rng = np.random.default_rng(12)
    cx = make_torus(24)
    cx = cx.with_values(cx.values + rng.uniform(-0.5, 0.5, cx.values.shape))
    stored = boxes = 0
    ok = True
    for a, b in ((0.5, 0.0), (0.3, 0.4), (0.8, -0.2)):
        for d in compute_diagram(cx, LineParam(a, b)):
            pts = d.proper_points
            if not pts:
                continue
            coords = np.unique([c for p in pts for c in (p.u, p.v)])
            gap = float(np.min(np.diff(coords))) if len(coords) > 1 else 1.0
            eps = 0.49 * gap
            for p in pts:
                stored += 1
                ok &= multiplicity_box(d, p.u, p.v, eps) == p.multiplicity
    d = max((dd for dd in compute_diagram(cx, LineParam(0.5, 0.0))), key=lambda dd: len(dd.proper_points))
    pts = np.array([(p.u, p.v) for p in d.proper_points])
    lo, hi = pts.min(), pts.max()
    while boxes < 100:
        u, v = sorted(rng.uniform(lo, hi, 2))
        near = float(np.min(np.max(np.abs(pts - (u, v)), axis=1)))
        eps = min(0.49 * near, 0.49 * (v - u))
        if eps <= 0:
            continue
        boxes += 1
        ok &= multiplicity_box(d, u, v, eps) == 0
    record(12, ok, f"{stored} stored points reproduced, {boxes} empty boxes")
