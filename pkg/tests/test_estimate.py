import math

import numpy as np
import pytest

from matchdist.bifiltration import BifilteredComplex, make_sphere, make_torus, sup_norm_difference
from matchdist.estimate import (EstimatorConfig, boundary_domination_check, compute_cbar, line_costs,
                                naive_estimate, realizer_bound_check, reduced_estimate, verify_main_theorem)
from matchdist.geometry import LineParam
from matchdist.pareto import analytic_sphere_grid
from matchdist.special import ContourPair, GridPair, Region, pair_gap, scan_candidates

SMALL = EstimatorConfig(resolution_a=9, resolution_b=9, special_resolution=12)


@pytest.fixture(scope="module")
def spheres():
    return make_sphere(16), make_sphere(16, center=(0.3, 0, 0))


@pytest.fixture(scope="module")
def grids():
    return analytic_sphere_grid(), analytic_sphere_grid(center=(0.3, 0, 0))


def test_config_validation():
    for bad in (dict(resolution_a=1), dict(tol=0), dict(epsilon_boundary=0.6), dict(cbar=-1), dict(degree=-1)):
        with pytest.raises(ValueError):
            EstimatorConfig(**bad)


def test_compute_cbar(spheres):
    square = BifilteredComplex([(-1, 1), (1, -1), (0.5, 0.2)], [(0, 1), (1, 2)])
    assert compute_cbar(square, square) == 1.0
    s1, s2 = spheres
    assert compute_cbar(s1, s1) == pytest.approx(1.0, abs=1e-15)
    assert compute_cbar(s1, s2) == pytest.approx(1.3, abs=1e-15)


def test_identical_inputs_are_zero(spheres, grids):
    s1, _ = spheres
    naive = naive_estimate(s1, s1, SMALL)
    assert naive.value == 0.0 and all(r.cost == 0.0 for r in naive.per_line)
    assert reduced_estimate(s1, s1, grids[0], grids[0], SMALL).value == 0.0
    assert verify_main_theorem(s1, s1, grids[0], grids[0], SMALL).passed
    bd = boundary_domination_check(s1, s1, SMALL)
    assert bd.passed and bd.boundary_max == 0.0


def test_diagonal_shift_bounded_and_positive(spheres):
    s1, _ = spheres
    delta = 0.1
    moved = s1.with_values(s1.values + delta)
    rep = naive_estimate(s1, moved, SMALL)
    assert 0.0 < rep.value <= delta + 1e-9


def test_stability_and_symmetry(spheres, grids):
    s1, s2 = spheres
    bound = sup_norm_difference(s1, s2)
    fwd = naive_estimate(s1, s2, SMALL)
    back = naive_estimate(s2, s1, SMALL)
    assert fwd.value == back.value
    assert [r.costs for r in fwd.per_line] == [r.costs for r in back.per_line]
    assert fwd.value <= bound + 1e-9
    red = reduced_estimate(s1, s2, *grids, SMALL)
    assert red.value <= bound + 1e-9


def test_naive_monotone_on_nested_grids(spheres):
    s1, s2 = spheres
    coarse = naive_estimate(s1, s2, EstimatorConfig(resolution_a=5, resolution_b=5))
    fine = naive_estimate(s1, s2, EstimatorConfig(resolution_a=9, resolution_b=9))
    coarse_pts = {(r.a, r.b) for r in coarse.per_line}
    assert coarse_pts <= {(r.a, r.b) for r in fine.per_line}
    assert fine.value >= coarse.value


def test_reduced_lines_reproduced_by_naive_engine(spheres, grids):
    s1, s2 = spheres
    red = reduced_estimate(s1, s2, *grids, SMALL)
    degrees = red.degrees
    for r in red.per_line[:: max(1, len(red.per_line) // 40)]:
        assert line_costs(s1, s2, r.a, r.b, degrees) == r.costs
    assert red.value == max(r.cost for r in red.per_line)


def test_infinite_distance_is_reported():
    rep = naive_estimate(make_sphere(8), make_torus(8), EstimatorConfig(resolution_a=3, resolution_b=3))
    assert rep.is_infinite and rep.witness and "essential" in rep.witness


def test_degree_selection(spheres):
    s1, s2 = spheres
    rep = naive_estimate(s1, s2, EstimatorConfig(resolution_a=5, resolution_b=5, degree=1))
    assert rep.degrees == (1,)
    assert all(len(r.costs) == 1 for r in rep.per_line)


def _shift_instance(d1, d2, res=12):
    cx = make_sphere(res)
    return cx, cx.with_values(cx.values + (d1, d2))


def test_realizer_bound_zero_first_component():
    cx1, cx2 = _shift_instance(0.0, 0.5)
    rep = naive_estimate(cx1, cx2, EstimatorConfig(resolution_a=21, resolution_b=21))
    chk = realizer_bound_check(cx1, cx2, rep)
    assert chk.hypothesis and chk.bound == 0.0 and chk.satisfied


def test_realizer_bound_hypothesis_fails():
    cx1, cx2 = _shift_instance(0.5, 0.5)
    rep = naive_estimate(cx1, cx2, EstimatorConfig(resolution_a=5, resolution_b=5))
    chk = realizer_bound_check(cx1, cx2, rep)
    assert not chk.hypothesis and chk.bound is None and "not" in chk.message


def test_realizer_bound_needs_same_structure():
    with pytest.raises(ValueError):
        realizer_bound_check(make_sphere(8), make_sphere(12), naive_estimate(make_sphere(8), make_sphere(8), SMALL))


def test_boundary_domination_uniform_shift():
    cx1, cx2 = _shift_instance(1.0, 3.0)
    cfg = EstimatorConfig(resolution_b=21)
    rep = boundary_domination_check(cx1, cx2, cfg)
    assert rep.passed
    assert len(rep.boundary) == 42


def test_rotation_does_not_decrease_cost(spheres):
    # at sampled points of Sp outside U with a < 1/2, a small move increasing both
    # witness gaps never lowers the bottleneck cost
    s1, s2 = make_sphere(24), make_sphere(24, center=(0.3, 0, 0))
    gp = GridPair(analytic_sphere_grid(), analytic_sphere_grid(center=(0.3, 0, 0)))
    rep = scan_candidates(gp, Region.strip(1.3), 20)
    in_U = set(zip(rep.U.a.tolist(), rep.U.b.tolist()))
    sp = rep.special
    picks = [k for k in range(len(sp)) if sp.a[k] < 0.5 and sp.ids[k, 2] >= 0
             and (sp.a[k], sp.b[k]) not in in_U]
    rng = np.random.default_rng(0)
    cs = gp.contours
    checked = 0
    for k in rng.choice(picks, size=min(30, len(picks)), replace=False):
        a, b = float(sp.a[k]), float(sp.b[k])
        f = ContourPair(cs[sp.ids[k, 0]], cs[sp.ids[k, 1]])
        g = ContourPair(cs[sp.ids[k, 2]], cs[sp.ids[k, 3]])
        base = max(line_costs(s1, s2, a, b, (0, 1, 2)))
        best = None
        for th in np.linspace(0, 2 * math.pi, 48, endpoint=False):
            a2, b2 = a + 1e-3 * 0.05 * math.cos(th), b + 1e-3 * math.sin(th)
            if not 0 < a2 < 0.5:
                continue
            vals = [pair_gap(LineParam(x, y), p, "x") for p in (f, g) for x, y in ((a, b), (a2, b2))]
            if None in vals or not (vals[1] > vals[0] and vals[3] > vals[2]):
                continue
            cost = max(line_costs(s1, s2, a2, b2, (0, 1, 2)))
            best = cost if best is None else max(best, cost)
        if best is not None:
            checked += 1
            assert best >= base - 1e-9
    assert checked >= 5
