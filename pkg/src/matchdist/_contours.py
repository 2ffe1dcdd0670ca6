"""Line/contour intersection kernels over packed grids.

A packed grid stores, per contour, a kind code (0 proper, 1 vertical,
2 horizontal), the start point ``(x0, y0)`` of improper contours, and a
slice ``ptr[c]:ptr[c + 1]`` into the flat polyline arrays ``px``/``py``.
Polylines run with x non-decreasing and y non-increasing.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

PROPER = 0
VERTICAL = 1
HORIZONTAL = 2

HIT = 0
ENDPOINT = 1
AMBIGUOUS = 2
MISS = 3

SNAP = 1e-9


def intersect_one(kind, x0, y0, px, py, lo, hi, a, b):
    """Intersection of ``r_(a,b)`` (0 < a < 1) with one contour.

    Returns ``(x, y, segment, status)``; segment is the polyline segment
    index (or -1) and status one of HIT, ENDPOINT, AMBIGUOUS, MISS.
    """
    if kind == VERTICAL:
        y = ((1.0 - a) * x0 - b) / a
        if y >= y0:
            return x0, y, -1, HIT
        return np.nan, np.nan, -1, MISS
    if kind == HORIZONTAL:
        x = (a * y0 + b) / (1.0 - a)
        if x >= x0:
            return x, y0, -1, HIT
        return np.nan, np.nan, -1, MISS
    n = hi - lo
    f_first = (1.0 - a) * px[lo] - a * py[lo] - b
    f_last = (1.0 - a) * px[hi - 1] - a * py[hi - 1] - b
    if f_first > SNAP or f_last < -SNAP:
        return np.nan, np.nan, -1, MISS
    if abs(f_first) <= SNAP:
        if n > 1 and (1.0 - a) * px[lo + 1] - a * py[lo + 1] - b == 0.0 and f_first == 0.0:
            return px[lo], py[lo], 0, AMBIGUOUS
        return px[lo], py[lo], 0, ENDPOINT
    if abs(f_last) <= SNAP:
        if n > 1 and (1.0 - a) * px[hi - 2] - a * py[hi - 2] - b == 0.0 and f_last == 0.0:
            return px[hi - 1], py[hi - 1], n - 2, AMBIGUOUS
        return px[hi - 1], py[hi - 1], n - 2, ENDPOINT
    # first vertex with F >= 0; F is monotone along the polyline
    left = lo
    right = hi - 1
    while right - left > 1:
        mid = (left + right) // 2
        if (1.0 - a) * px[mid] - a * py[mid] - b >= 0.0:
            right = mid
        else:
            left = mid
    f0 = (1.0 - a) * px[left] - a * py[left] - b
    f1 = (1.0 - a) * px[right] - a * py[right] - b
    if f1 == 0.0:
        if right + 1 < hi and (1.0 - a) * px[right + 1] - a * py[right + 1] - b == 0.0:
            return px[right], py[right], right - lo, AMBIGUOUS
        return px[right], py[right], right - lo, HIT
    t = -f0 / (f1 - f0)
    x = px[left] + t * (px[right] - px[left])
    y = py[left] + t * (py[right] - py[left])
    return x, y, left - lo, HIT


def intersect_grid(kinds, x0, y0, ptr, px, py, a, b):
    """Intersections of one line with every contour of a packed grid."""
    m = kinds.shape[0]
    xs = np.empty(m)
    ys = np.empty(m)
    seg = np.empty(m, dtype=np.int64)
    status = np.empty(m, dtype=np.int64)
    for c in range(m):
        x, y, s, st = intersect_one(kinds[c], x0[c], y0[c], px, py, ptr[c], ptr[c + 1], a, b)
        xs[c] = x
        ys[c] = y
        seg[c] = s
        status[c] = st
    return xs, ys, seg, status


def intersect_grid_np(kinds, x0, y0, ptr, px, py, a, b):
    """Vectorised fallback for :func:`intersect_grid`."""
    m = kinds.shape[0]
    xs = np.full(m, np.nan)
    ys = np.full(m, np.nan)
    seg = np.full(m, -1, dtype=np.int64)
    status = np.full(m, MISS, dtype=np.int64)

    vert = kinds == VERTICAL
    yv = ((1.0 - a) * x0 - b) / a
    ok = vert & (yv >= y0)
    xs[ok], ys[ok], status[ok] = x0[ok], yv[ok], HIT

    horiz = kinds == HORIZONTAL
    xh = (a * y0 + b) / (1.0 - a)
    ok = horiz & (xh >= x0)
    xs[ok], ys[ok], status[ok] = xh[ok], y0[ok], HIT

    for c in np.flatnonzero(kinds == PROPER):
        xs[c], ys[c], seg[c], status[c] = intersect_one(
            PROPER, 0.0, 0.0, px, py, ptr[c], ptr[c + 1], a, b)
    return xs, ys, seg, status


def intersect_points(kinds, x0, y0, ptr, px, py, A, B):
    """Intersections of every contour with the lines ``(A[k], B[k])``; shape (n, m)."""
    n = A.shape[0]
    m = kinds.shape[0]
    xs = np.empty((n, m))
    ys = np.empty((n, m))
    seg = np.empty((n, m), dtype=np.int64)
    status = np.empty((n, m), dtype=np.int64)
    for k in range(n):
        for c in range(m):
            x, y, s, st = intersect_one(kinds[c], x0[c], y0[c], px, py, ptr[c], ptr[c + 1], A[k], B[k])
            xs[k, c] = x
            ys[k, c] = y
            seg[k, c] = s
            status[k, c] = st
    return xs, ys, seg, status


def intersect_points_np(kinds, x0, y0, ptr, px, py, A, B):
    n = A.shape[0]
    m = kinds.shape[0]
    xs = np.empty((n, m))
    ys = np.empty((n, m))
    seg = np.empty((n, m), dtype=np.int64)
    status = np.empty((n, m), dtype=np.int64)
    for k in range(n):
        xs[k], ys[k], seg[k], status[k] = intersect_grid_np(kinds, x0, y0, ptr, px, py, A[k], B[k])
    return xs, ys, seg, status


def selected_values(kinds, x0, y0, ptr, px, py, A, B, cols):
    """Coordinate-form value (x for a <= 1/2, else y) of contour ``cols[k, j]`` on line k."""
    n, k = cols.shape
    out = np.empty((n, k))
    for t in range(n):
        for j in range(k):
            c = cols[t, j]
            x, y, s, st = intersect_one(kinds[c], x0[c], y0[c], px, py, ptr[c], ptr[c + 1], A[t], B[t])
            if st == MISS:
                out[t, j] = np.nan
            elif A[t] > 0.5:
                out[t, j] = y
            else:
                out[t, j] = x
    return out


def selected_points(kinds, x0, y0, ptr, px, py, A, B, cols):
    """Like :func:`intersect_points` but only for contour ``cols[k, j]`` on line k."""
    n, k = cols.shape
    xs = np.empty((n, k))
    ys = np.empty((n, k))
    seg = np.empty((n, k), dtype=np.int64)
    status = np.empty((n, k), dtype=np.int64)
    for t in range(n):
        for j in range(k):
            c = cols[t, j]
            x, y, s, st = intersect_one(kinds[c], x0[c], y0[c], px, py, ptr[c], ptr[c + 1], A[t], B[t])
            xs[t, j] = x
            ys[t, j] = y
            seg[t, j] = s
            status[t, j] = st
    return xs, ys, seg, status


if USE_NUMBA:
    intersect_one = njit(intersect_one)
    selected_values = njit(selected_values)
    selected_points = njit(selected_points)
    intersect_grid = njit(intersect_grid)
    intersect_points = njit(intersect_points)
else:
    intersect_grid = intersect_grid_np
    intersect_points = intersect_points_np
