import xml.etree.ElementTree as ET

import numpy as np

from matchdist import svg
from matchdist.bifiltration import compute_diagram, make_sphere
from matchdist.diagrams import PersistenceDiagram, bottleneck
from matchdist.estimate import EstimatorConfig, naive_estimate
from matchdist.geometry import LineParam
from matchdist.pareto import analytic_sphere_grid
from matchdist.special import CandidateSet

SVG = "{http://www.w3.org/2000/svg}"


def parse(doc):
    return ET.fromstring(doc)


def test_empty_axes_is_valid():
    root = parse(svg.empty_axes("nothing"))
    assert root.tag == SVG + "svg"
    assert root.findall(f".//{SVG}line")


def test_grid_render_is_deterministic():
    grids = [analytic_sphere_grid(), analytic_sphere_grid(center=(0.3, 0, 0))]
    lines = [LineParam(0.5, 0.0), LineParam(0.0, 0.2), LineParam(1.0, -0.1)]
    doc = svg.render_grids(grids, lines)
    assert doc == svg.render_grids(grids, lines)
    root = parse(doc)
    assert len(root.findall(f".//{SVG}polyline")) >= 4


def test_diagram_render_with_matching_and_essential_points():
    cx = make_sphere(12)
    d1 = compute_diagram(cx, LineParam(0.5, 0.0))[0]
    d2 = compute_diagram(cx.with_values(cx.values + 0.1), LineParam(0.5, 0.0))[0]
    doc = svg.render_diagrams(d1, d2, bottleneck(d1, d2))
    root = parse(doc)
    assert len(root.findall(f".//{SVG}circle")) == len(d1) + len(d2)
    parse(svg.render_diagrams(PersistenceDiagram(1)))


def test_candidate_render_thins_large_sets():
    n = 10_000
    cs = CandidateSet.build(np.linspace(0, 1, n), np.zeros(n), "special", np.zeros(n), np.zeros((n, 4), int), np.ones((n, 2), int))
    panel = svg.candidate_panel({"special": cs}, 1.0, max_points=500)
    assert sum(item.startswith("<circle") for item in panel.items) <= 500
    parse(svg.render_candidates({"special": cs}, 1.0))


def test_profile_render():
    cx = make_sphere(8)
    rep = naive_estimate(cx, cx.with_values(cx.values + 0.05), EstimatorConfig(resolution_a=5, resolution_b=5))
    root = parse(svg.render_profiles([rep, rep]))
    assert len(root.findall(f"{SVG}g")) == 2
