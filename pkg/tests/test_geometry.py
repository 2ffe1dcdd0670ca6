import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from matchdist.geometry import (ExtendedPoint, ExtendedReal, InfiniteArithmeticError, LineParam,
                                RotationSegment, line_through, normalized_value, normalized_values,
                                restrict_value)

finite = st.floats(-50, 50, allow_nan=False)
inner_a = st.floats(0.01, 0.99)


def test_extended_real_order_and_arithmetic():
    inf = ExtendedReal.inf()
    assert ExtendedReal(1e300) < inf
    assert not inf < inf and inf <= inf
    assert (ExtendedReal(2) + 3).value == 5
    assert (inf + 1).is_inf
    assert (inf - 1).is_inf
    with pytest.raises(InfiniteArithmeticError):
        inf - inf


@given(finite, finite, finite)
def test_extended_real_total_order(x, y, z):
    X, Y, Z = ExtendedReal(x), ExtendedReal(y), ExtendedReal(z)
    assert (X <= Y) or (Y <= X)
    if X <= Y and Y <= Z:
        assert X <= Z
    if X <= Y and Y <= X:
        assert X == Y
    assert X < ExtendedReal.inf()


def test_line_param_bounds():
    for a in (-0.1, 1.1, math.nan):
        with pytest.raises(ValueError):
            LineParam(a, 0.0)
    with pytest.raises(ValueError):
        LineParam(0.5, math.inf)
    assert LineParam(0.0, 1.0).is_boundary


@pytest.mark.parametrize("phi1,phi2,a,b,expected", [
    (3, 1, 0.5, 0, 6),
    (2, 5, 0.25, 1, 8),
])
def test_restrict_value_examples(phi1, phi2, a, b, expected):
    assert restrict_value(phi1, phi2, LineParam(a, b)) == expected


@given(inner_a, finite)
def test_restrict_value_zero_on_the_line_foot(a, b):
    assert restrict_value(b, -b, LineParam(a, b)) == 0.0


def test_normalized_value_examples():
    assert normalized_value(3, 1, LineParam(0.5, 0)) == 3
    assert normalized_value(3, 123.0, LineParam(0.0, 1.0)) == 2
    approach = [normalized_value(3, 1, LineParam(10.0 ** -k, 1.0)) for k in range(1, 7)]
    assert all(abs(x - 2) < 1e-12 for x in approach)


@given(finite, finite, inner_a, finite)
def test_normalized_is_scaled_restriction(p1, p2, a, b):
    line = LineParam(a, b)
    assert normalized_value(p1, p2, line) == min(a, 1 - a) * restrict_value(p1, p2, line)


@given(finite, finite, st.floats(0, 1), finite, st.floats(0, 5), st.floats(0, 5))
def test_normalized_monotone(p1, p2, a, b, d1, d2):
    line = LineParam(a, b)
    assert normalized_value(p1 + d1, p2, line) >= normalized_value(p1, p2, line)
    assert normalized_value(p1, p2 + d2, line) >= normalized_value(p1, p2, line)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.05, 0.95), st.floats(-5, 5),
       st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3))
def test_normalized_locally_lipschitz(p1, p2, a, b, da, db):
    # on a in [0.05, 0.95] with |phi|, |b| <= 5 the constant 2 * (5 + 5) / 0.05 ** 2 is safe
    L = 2 * 10 / 0.05 ** 2
    a2 = min(max(a + da, 0.05), 0.95)
    v1 = normalized_value(p1, p2, LineParam(a, b))
    v2 = normalized_value(p1, p2, LineParam(a2, b + db))
    assert abs(v1 - v2) <= L * (abs(a - a2) + abs(db)) + 1e-12


def test_normalized_values_matches_scalar():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(50, 2))
    for a, b in [(0.0, 0.3), (1.0, -0.2), (0.3, 0.1), (0.5, 0.0)]:
        vec = normalized_values(vals, a, b)
        ref = [normalized_value(x, y, LineParam(a, b)) for x, y in vals]
        assert np.array_equal(vec, ref)


@pytest.mark.parametrize("a,point,b", [(0.5, (2, 2), 0.0), (0.0, (3, 7), 3.0), (0.25, (4, 0), 3.0)])
def test_line_through_examples(a, point, b):
    assert line_through(a, point).b == b


@given(st.floats(0, 1), finite, finite)
def test_line_through_contains_point(a, x, y):
    line = line_through(a, ExtendedPoint(x, y))
    assert line.contains(x, y, 1e-12 * max(1.0, abs(x), abs(y)))


def test_line_through_rejects_infinite_point():
    with pytest.raises(ValueError):
        line_through(0.5, ExtendedPoint(1.0, math.inf))


def test_rotation_segment_kinds():
    p, q = LineParam(0.2, 0.0), LineParam(0.4, 1.0)
    assert RotationSegment(p, q).kind == "clockwise"
    assert RotationSegment(q, p).kind == "counter-clockwise"
    assert RotationSegment(p, LineParam(0.2, 3.0)).kind == "translation"
    pts = RotationSegment(p, q).sample(5)
    assert pts[0] == p and pts[-1] == q
