import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchdist.diagrams import (DELTA, DiagramPoint, PersistenceDiagram, bottleneck, bottleneck_cost,
                                multiplicity_box, pbnf_from_diagram, point_distance)

from oracles import ref_bottleneck, ref_distance

INF = math.inf
P = DiagramPoint.proper
E = DiagramPoint.essential


def as_tuple(p):
    if p.is_delta:
        return None
    return (p.u, INF if p.is_essential else p.v)


@pytest.mark.parametrize("p,q,expected", [
    (P(1, 3), P(1, 3), 0.0),
    (E(0), E(2), 2.0),
    (P(1, 2), DELTA, 0.5),
    (P(0, 10), P(1, 12), 2.0),
])
def test_point_distance_examples(p, q, expected):
    assert float(point_distance(p, q)) == expected


def test_point_distance_infinite_cases():
    assert point_distance(P(0, 1), E(0)).is_inf
    assert point_distance(E(0), P(0, 1)).is_inf
    assert point_distance(E(0), DELTA).is_inf
    assert float(point_distance(DELTA, DELTA)) == 0.0


def test_point_validation():
    with pytest.raises(ValueError):
        P(2, 1)
    with pytest.raises(ValueError):
        P(0, INF)
    with pytest.raises(ValueError):
        E(INF)
    with pytest.raises(ValueError):
        P(0, 1, multiplicity=0)


coord = st.integers(-8, 8).map(lambda k: k / 4)


@st.composite
def points(draw):
    u = draw(coord)
    if draw(st.integers(0, 3)) == 0:
        return E(u)
    return P(u, u + draw(st.integers(1, 10)) / 4)


@st.composite
def maybe_delta(draw):
    return DELTA if draw(st.integers(0, 5)) == 0 else draw(points())


@given(maybe_delta(), maybe_delta())
def test_distance_matches_reference_and_is_symmetric(p, q):
    d = point_distance(p, q)
    assert d == point_distance(q, p)
    assert float(d) == ref_distance(as_tuple(p), as_tuple(q))


@given(maybe_delta(), maybe_delta(), maybe_delta())
def test_triangle_inequality(p, q, r):
    pq, qr, pr = (float(point_distance(*x)) for x in ((p, q), (q, r), (p, r)))
    if all(math.isfinite(x) for x in (pq, qr, pr)):
        assert pr <= pq + qr + 1e-12


def test_diagram_merges_and_drops_diagonal():
    d = PersistenceDiagram(1, [(0, 1), (0, 1), (2, 2), (3, INF)])
    assert [(p.u, p.multiplicity) for p in d.points] == [(0.0, 2), (3.0, 1)]
    assert len(d) == 3
    assert d == PersistenceDiagram(1, [(3, INF), (0, 1), (0, 1)])


@pytest.mark.parametrize("d1,d2,cost", [
    ([(0, 2)], [], 1.0),
    ([(0, INF)], [], INF),
    ([(0, INF)], [(2, INF)], 2.0),
])
def test_bottleneck_examples(d1, d2, cost):
    assert float(bottleneck(PersistenceDiagram(0, d1), PersistenceDiagram(0, d2)).cost) == cost


def test_bottleneck_identity_matching():
    d = PersistenceDiagram(0, [(0, 1), (0.5, 3), (1, INF)])
    m = bottleneck(d, d)
    assert float(m.cost) == 0.0
    assert all(p == q for p, q in m.pairs)


def test_infinite_bottleneck_has_witness():
    m = bottleneck(PersistenceDiagram(2, [(0, INF)]), PersistenceDiagram(2))
    assert m.is_infinite and "essential" in m.witness


def test_bottleneck_pairs_to_delta():
    m = bottleneck(PersistenceDiagram(0, [(0, 2)]), PersistenceDiagram(0))
    assert m.pairs == ((P(0, 2), DELTA),)


diagrams = st.lists(points(), max_size=6)


def _cost_candidates(d1, d2):
    pts1 = [as_tuple(p) for p in d1.expanded()]
    pts2 = [as_tuple(p) for p in d2.expanded()]
    cands = {0.0}
    for p in pts1 + pts2:
        cands.add(ref_distance(p, None))
    for p in pts1:
        for q in pts2:
            cands.add(ref_distance(p, q))
    return cands


@settings(max_examples=150)
@given(diagrams, diagrams)
def test_bottleneck_matches_brute_force(a, b):
    d1, d2 = PersistenceDiagram(0, a), PersistenceDiagram(0, b)
    m = bottleneck(d1, d2)
    ref = ref_bottleneck([as_tuple(p) for p in d1.expanded()], [as_tuple(p) for p in d2.expanded()])
    assert float(m.cost) == ref
    assert float(m.cost) in _cost_candidates(d1, d2)
    assert float(bottleneck(d2, d1).cost) == ref
    if not m.is_infinite:
        # the returned matching is a bijection realising the cost
        left = sorted((p for p, _ in m.pairs if not p.is_delta), key=DiagramPoint.sort_key)
        right = sorted((q for _, q in m.pairs if not q.is_delta), key=DiagramPoint.sort_key)
        assert left == sorted(d1.expanded(), key=DiagramPoint.sort_key)
        assert right == sorted(d2.expanded(), key=DiagramPoint.sort_key)
        assert max((float(point_distance(p, q)) for p, q in m.pairs), default=0.0) == float(m.cost)


def test_bottleneck_random_floats_against_reference():
    rng = np.random.default_rng(7)
    for _ in range(40):
        pts = []
        for n in rng.integers(0, 6, 2):
            u = rng.uniform(0, 1, n)
            pts.append([(x, x + rng.exponential(0.3)) for x in u])
        ref = ref_bottleneck(*pts)
        assert float(bottleneck_cost(PersistenceDiagram(1, pts[0]), PersistenceDiagram(1, pts[1]))) == ref


def test_pbnf_examples():
    assert pbnf_from_diagram(PersistenceDiagram(0), 0.3, 0.7) == 0
    assert pbnf_from_diagram(PersistenceDiagram(0, [(0, 3)]), 1, 2) == 1
    assert pbnf_from_diagram(PersistenceDiagram(0, [(0, 3), (0, INF)]), 1, 4) == 1
    with pytest.raises(ValueError):
        pbnf_from_diagram(PersistenceDiagram(0), 1, 1)


def test_multiplicity_box_examples():
    d = PersistenceDiagram(0, [(1, 5)])
    assert multiplicity_box(d, 1, 5, 0.5) == 1
    assert multiplicity_box(d, 2, 4, 0.5) == 0
    d3 = PersistenceDiagram(0, [P(1, 5, 3)])
    assert multiplicity_box(d3, 1, 5, 0.1) == 3


@given(st.lists(st.tuples(st.integers(0, 10), st.integers(1, 6)), min_size=1, max_size=8))
def test_multiplicity_box_recovers_points(raw):
    d = PersistenceDiagram(0, [(u, u + l) for u, l in raw])
    coords = sorted({c for p in d.proper_points for c in (p.u, p.v)})
    gap = min((y - x for x, y in zip(coords, coords[1:])), default=1.0)
    eps = 0.49 * min(gap, 1.0)
    for p in d.proper_points:
        assert multiplicity_box(d, p.u, p.v, eps) == p.multiplicity
    # half-integer centres never hold a point
    assert multiplicity_box(d, 0.5, 5.5, 0.25) == 0
