"""Special and ultraspecial parameters, the gradient-parallel curve set, and U.

Gaps are measured on abscissas for a <= 1/2 and on ordinates for a >= 1/2;
on a filtering line the two agree up to the factor (1 - a) / a, so the
combined gap is continuous across a = 1/2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _contours, _scan
from .geometry import LineParam, line_through
from .pareto import Contour, ExtendedParetoGrid, intersect, locate

__all__ = [
    "GridPair",
    "ContourPair",
    "SpecialWitness",
    "UltraspecialWitness",
    "CurveCQuadruple",
    "FactoredResidual",
    "Region",
    "CandidateSet",
    "CandidateReport",
    "pair_gap",
    "is_special",
    "is_ultraspecial",
    "curveC_residual",
    "curveC_factored",
    "scan_candidates",
    "sample_special_set",
    "approximate_curveC",
    "assemble_U",
    "solve_U",
]

COEFFS = ((1, 1), (1, 2), (2, 1), (2, 2))


# --------------------------------------------------------------------------
# grid pair

@dataclass(frozen=True, eq=False)
class GridPair:
    """The merged contour set of two grids; grid2 contours are tagged 2."""

    grid1: ExtendedParetoGrid
    grid2: ExtendedParetoGrid | None = None

    @cached_property
    def contours(self) -> tuple[Contour, ...]:
        second = self.grid2.with_tag(2).contours if self.grid2 is not None else ()
        return tuple(self.grid1.contours) + tuple(second)

    @cached_property
    def merged(self) -> ExtendedParetoGrid:
        return ExtendedParetoGrid(self.contours)

    @cached_property
    def pairs(self) -> np.ndarray:
        m = len(self.contours)
        if m < 2:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(list(itertools.combinations(range(m), 2)), dtype=np.int64)

    def contour_pair(self, index: int) -> "ContourPair":
        i, j = self.pairs[index]
        return ContourPair(self.contours[i], self.contours[j], (int(i), int(j)))

    def evaluate(self, A, B):
        """Coordinate-form data of every contour on the lines ``(A[k], B[k])``.

        Returns ``(val, da, db)`` of shape (n, m): the abscissa (a <= 1/2) or
        ordinate (a > 1/2) of the intersection, with its first-order
        derivatives in the matching frame. Missed contours give NaN.
        """
        A = np.ascontiguousarray(A, dtype=np.float64)
        B = np.ascontiguousarray(B, dtype=np.float64)
        X, Y, seg, status = _contours.intersect_points(*self.merged.packed, A, B)
        miss = status == _contours.MISS
        X[miss] = np.nan
        Y[miss] = np.nan
        q, p = self._tangents(seg)
        return _form_data(X, Y, q, p, A[:, None], B[:, None])

    def values(self, A, B) -> np.ndarray:
        """Only the coordinate-form values of :meth:`evaluate`."""
        A = np.ascontiguousarray(A, dtype=np.float64)
        B = np.ascontiguousarray(B, dtype=np.float64)
        X, Y, _, status = _contours.intersect_points(*self.merged.packed, A, B)
        val = np.where((A > 0.5)[:, None], Y, X)
        val[status == _contours.MISS] = np.nan
        return val

    def evaluate_cols(self, A, B, cols):
        """:meth:`evaluate` restricted to contour ``cols[k, j]`` on line k."""
        A = np.ascontiguousarray(A, dtype=np.float64)
        B = np.ascontiguousarray(B, dtype=np.float64)
        cols = np.ascontiguousarray(cols, dtype=np.int64)
        X, Y, seg, status = _contours.selected_points(*self.merged.packed, A, B, cols)
        miss = status == _contours.MISS
        X[miss] = np.nan
        Y[miss] = np.nan
        q, p = self._tangents(seg, cols)
        return _form_data(X, Y, q, p, A[:, None], B[:, None])

    def _tangents(self, seg: np.ndarray, cols: np.ndarray | None = None):
        kinds, _, _, ptr, px, py = self.merged.packed
        if cols is None:
            cols = np.broadcast_to(np.arange(len(kinds)), seg.shape)
        kind = kinds[cols]
        q = np.where(kind == _contours.VERTICAL, 0.0, 1.0)
        p = np.where(kind == _contours.VERTICAL, -1.0, 0.0)
        proper = (kind == _contours.PROPER) & (np.diff(ptr)[cols] >= 2)
        if proper.any():
            c = cols[proper]
            lo, hi = ptr[c], ptr[c + 1] - 2
            idx = np.clip(lo + seg[proper], lo, hi)
            dx = px[idx + 1] - px[idx]
            dy = py[idx + 1] - py[idx]
            n = np.hypot(dx, dy)
            q[proper] = dx / n
            p[proper] = dy / n
        return q, p


def _form_data(X, Y, q, p, a, b):
    """Value and (a, b)-derivatives of the intersection in the form frame.

    For a > 1/2 the frame is reflected: ordinates play the role of abscissas
    at the parameter (1 - a, -b), with tangents (q, p) -> (-p, -q).
    """
    a = np.broadcast_to(a, X.shape)
    b = np.broadcast_to(b, X.shape)
    yform = a > 0.5
    val = np.where(yform, Y, X)
    other = np.where(yform, X, Y)
    qq = np.where(yform, -p, q)
    pp = np.where(yform, -q, p)
    aa = np.where(yform, 1.0 - a, a)
    bb = np.where(yform, -b, b)
    k = pp * val - qq * other
    d = aa * (pp + qq) - qq
    da = qq * (bb * (pp + qq) - k) / (d * d)
    db = -qq / d
    return val, da, db


# --------------------------------------------------------------------------
# pointwise witnesses

@dataclass(frozen=True)
class ContourPair:
    first: Contour
    second: Contour
    ids: tuple[int, int] | None = None

    def __post_init__(self):
        if self.first is self.second:
            raise ValueError("a contour pair needs two distinct contours")

    def key(self):
        return tuple(sorted(self.ids)) if self.ids is not None else (id(self.first), id(self.second))


def pair_gap(line: LineParam, pair: ContourPair, axis: str) -> float | None:
    """Absolute coordinate gap of the two intersections on ``axis`` ('x' or 'y')."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    p = intersect(line, pair.first)
    q = intersect(line, pair.second)
    if p is None or q is None:
        return None
    u, v = (p.x, q.x) if axis == "x" else (p.y, q.y)
    if u.is_inf or v.is_inf:
        return None
    return abs(u.value - v.value)


@dataclass(frozen=True)
class SpecialWitness:
    param: LineParam
    pairA: ContourPair
    pairB: ContourPair | None
    coeffs: tuple[int, int]
    axis: str
    residual: float
    kind: str = "gap"  # "gap" or "double_point"


@dataclass(frozen=True)
class UltraspecialWitness:
    param: LineParam
    pairs: tuple[ContourPair, ContourPair, ContourPair]
    coeffs: tuple[int, int, int]
    axis: str
    value: float
    residual: float


def _axes(a: float) -> list[str]:
    if a < 0.5:
        return ["x"]
    if a > 0.5:
        return ["y"]
    return ["x", "y"]


def _gaps(gp: GridPair, line: LineParam, axis: str) -> dict[int, float]:
    pts = [intersect(line, c) for c in gp.contours]
    out = {}
    for k, (i, j) in enumerate(gp.pairs):
        p, q = pts[i], pts[j]
        if p is None or q is None:
            continue
        out[k] = abs(float(getattr(p, axis)) - float(getattr(q, axis)))
    return out


def is_special(gp: GridPair, line: LineParam, tol: float = 1e-6) -> list[SpecialWitness]:
    """Every witness that ``line`` is a special parameter of the grid pair."""
    if not 0.0 < line.a < 1.0:
        raise ValueError("special values are defined for 0 < a < 1")
    out = []
    for axis in _axes(line.a):
        gaps = _gaps(gp, line, axis)
        for k, g in gaps.items():
            if g <= tol:
                out.append(SpecialWitness(line, gp.contour_pair(k), None, (1, 1), axis, g, "double_point"))
        for k1, k2 in itertools.combinations(sorted(gaps), 2):
            for c1, c2 in COEFFS:
                r = abs(c1 * gaps[k1] - c2 * gaps[k2])
                if r <= tol:
                    out.append(SpecialWitness(line, gp.contour_pair(k1), gp.contour_pair(k2),
                                              (c1, c2), axis, r))
    return out


def is_ultraspecial(gp: GridPair, line: LineParam, tol: float = 1e-6) -> UltraspecialWitness | None:
    """Three pairwise distinct pairs sharing a common (scaled) gap, if any."""
    if not 0.0 < line.a < 1.0:
        raise ValueError("ultraspecial values are defined for 0 < a < 1")
    for axis in _axes(line.a):
        gaps = _gaps(gp, line, axis)
        terms = sorted((c * g, k, c) for k, g in gaps.items() for c in (1, 2))
        for i, (v0, k0, c0) in enumerate(terms):
            chosen = [(v0, k0, c0)]
            for v, k, c in terms[i + 1:]:
                if v - v0 > tol:
                    break
                if all(k != kk for _, kk, _ in chosen):
                    chosen.append((v, k, c))
                if len(chosen) == 3:
                    pairs = tuple(gp.contour_pair(k) for _, k, _ in chosen)
                    return UltraspecialWitness(line, pairs, tuple(c for _, _, c in chosen), axis,
                                               v0, chosen[-1][0] - v0)
    return None


# --------------------------------------------------------------------------
# gradient-parallel residual

@dataclass(frozen=True)
class CurveCQuadruple:
    """First-order data of four contours: unit tangents ``(q, p)`` and anchor points.

    The residual vanishes where the gradients of the squared gaps of
    (alpha, beta) and (gamma, delta) are parallel.
    """

    directions: tuple[tuple[float, float], ...]
    anchors: tuple[tuple[float, float], ...]
    contours: tuple[Contour, ...] | None = None

    def __post_init__(self):
        if len(self.directions) != 4 or len(self.anchors) != 4:
            raise ValueError("a quadruple needs four directions and four anchors")
        dirs = []
        for q, p in self.directions:
            q, p = float(q), float(p)
            if q < 0 or p > 0 or (q == 0 and p == 0):
                raise ValueError("tangent directions need q >= 0, p <= 0, not both zero")
            dirs.append((q, p))
        object.__setattr__(self, "directions", tuple(dirs))
        object.__setattr__(self, "anchors", tuple((float(x), float(y)) for x, y in self.anchors))

    @classmethod
    def from_slopes(cls, slopes: Sequence[float], anchors) -> "CurveCQuadruple":
        dirs = []
        for m in slopes:
            if m == -math.inf:
                dirs.append((0.0, -1.0))
            elif m <= 0:
                n = math.hypot(1.0, m)
                dirs.append((1.0 / n, m / n))
            else:
                raise ValueError("slopes must be non-positive or -inf")
        return cls(tuple(dirs), tuple(anchors))

    @classmethod
    def at(cls, line: LineParam, contours: Sequence[Contour]) -> "CurveCQuadruple":
        """Tangent data taken where ``line`` meets each of the four contours."""
        dirs, anchors = [], []
        for c in contours:
            hit = locate(line, c)
            if hit is None:
                raise ValueError(f"{c!r} does not meet the line {line}")
            dirs.append(c.direction(hit.segment))
            anchors.append(hit.point.as_floats())
        return cls(tuple(dirs), tuple(anchors), tuple(contours))

    @property
    def slopes(self) -> tuple[float, ...]:
        return tuple(-math.inf if q == 0 else p / q for q, p in self.directions)

    def reflected(self) -> "CurveCQuadruple":
        return CurveCQuadruple(tuple((-p, -q) for q, p in self.directions),
                               tuple((y, x) for x, y in self.anchors), self.contours)


def _frame(line: LineParam, quad: CurveCQuadruple):
    if not 0.0 < line.a < 1.0:
        raise ValueError("the curve residual needs 0 < a < 1")
    if line.a <= 0.5:
        return line.a, line.b, quad
    return 1.0 - line.a, -line.b, quad.reflected()


def curveC_residual(line: LineParam, quad: CurveCQuadruple) -> float:
    """Left minus right side of the gradient-parallel condition, slope form.

    Each intersection abscissa is ``((m x - y) a - b) / (a (m + 1) - 1)``;
    vertical tangents use the limit m -> -inf. For a > 1/2 the ordinate
    version is evaluated through the reflection ``(x, y) -> (y, x)``.
    """
    a, b, quad = _frame(line, quad)
    t1, t2, t3 = [], [], []
    for m, (x, y) in zip(quad.slopes, quad.anchors):
        if m == -math.inf:
            t1.append(x)
            t2.append(0.0)
            t3.append(0.0)
            continue
        den = a * (m + 1.0) - 1.0
        if den == 0.0:
            raise ZeroDivisionError("vanishing denominator a(m + 1) - 1")
        k = m * x - y
        t1.append((k * a - b) / den)
        t2.append(k / den - (k * a - b) * (m + 1.0) / (den * den))
        t3.append(1.0 / den)
    al, be, ga, de = 0, 1, 2, 3
    lhs = (t1[al] - t1[be]) * (t1[de] - t1[ga]) * (t2[ga] - t2[de]) * (t3[al] - t3[be])
    rhs = -(t1[al] - t1[be]) * (t1[de] - t1[ga]) * (t2[al] - t2[be]) * (t3[de] - t3[ga])
    return lhs - rhs


@dataclass(frozen=True)
class FactoredResidual:
    """Polynomial factors with residual ``C * D * (P1 * P2 - Q1 * Q2) / den**3``."""

    C: float
    D: float
    P1: float
    P2: float
    Q1: float
    Q2: float
    den: float
    C_coeffs: tuple[float, float, float]  # (c2, c1, c0) of c2 a^2 + c1 a b + c0 a
    D_coeffs: tuple[float, float, float]

    @property
    def value(self) -> float:
        return self.C * self.D * (self.P1 * self.P2 - self.Q1 * self.Q2) / self.den ** 3


def curveC_factored(line: LineParam, quad: CurveCQuadruple) -> FactoredResidual:
    """Factored evaluation of :func:`curveC_residual` in homogeneous tangent form."""
    a, b, quad = _frame(line, quad)
    q = [d[0] for d in quad.directions]
    p = [d[1] for d in quad.directions]
    k = [p[i] * quad.anchors[i][0] - q[i] * quad.anchors[i][1] for i in range(4)]
    d = [a * (p[i] + q[i]) - q[i] for i in range(4)]
    mnum = [q[i] * (b * (p[i] + q[i]) - k[i]) for i in range(4)]

    def lin(i, j):
        c2 = k[i] * (p[j] + q[j]) - k[j] * (p[i] + q[i])
        c1 = p[i] * q[j] - p[j] * q[i]
        c0 = k[j] * q[i] - k[i] * q[j]
        return (c2, c1, c0), c2 * a * a + c1 * a * b + c0 * a

    c_coeffs, C = lin(0, 1)
    d_coeffs, D = lin(2, 3)
    P1 = mnum[0] * d[1] ** 2 - mnum[1] * d[0] ** 2
    P2 = a * (p[3] * q[2] - p[2] * q[3]) * d[2] * d[3]
    Q1 = mnum[2] * d[3] ** 2 - mnum[3] * d[2] ** 2
    Q2 = a * (p[1] * q[0] - p[0] * q[1]) * d[0] * d[1]
    return FactoredResidual(C, D, P1, P2, Q1, Q2, d[0] * d[1] * d[2] * d[3], c_coeffs, d_coeffs)


# --------------------------------------------------------------------------
# sampled sets

@dataclass(frozen=True)
class Region:
    a_min: float
    a_max: float
    b_min: float
    b_max: float

    def __post_init__(self):
        if not (0.0 < self.a_min < self.a_max < 1.0):
            raise ValueError("region needs 0 < a_min < a_max < 1")
        if not self.b_min < self.b_max:
            raise ValueError("region needs b_min < b_max")

    @classmethod
    def strip(cls, cbar: float, margin: float = 1e-3) -> "Region":
        return cls(margin, 1.0 - margin, -cbar, cbar)

    def axes(self, resolution) -> tuple[np.ndarray, np.ndarray]:
        na, nb = (resolution, resolution) if np.isscalar(resolution) else resolution
        if na < 2 or nb < 2:
            raise ValueError("resolution must be at least 2")
        A = np.linspace(self.a_min, self.a_max, int(na))
        if self.a_min < 0.5 < self.a_max and not np.any(A == 0.5):
            A = np.sort(np.append(A, 0.5))
        return A, np.linspace(self.b_min, self.b_max, int(nb))


KINDS = ("special", "ultraspecial", "curveC", "endpointFamily")


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Columnar sample of parameters with provenance.

    ``ids`` holds up to six contour indices of the merged grid pair (-1 pad);
    ``coeffs`` up to three gap multipliers (0 pad).
    """

    a: np.ndarray
    b: np.ndarray
    kind: np.ndarray
    residual: np.ndarray
    ids: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def empty(cls) -> "CandidateSet":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0, dtype="<U14"), np.zeros(0),
                   np.zeros((0, 6), dtype=np.int64), np.zeros((0, 3), dtype=np.int64))

    @classmethod
    def build(cls, a, b, kind: str, residual, ids, coeffs) -> "CandidateSet":
        a = np.asarray(a, dtype=np.float64).ravel()
        n = a.shape[0]
        pad_ids = np.full((n, 6), -1, dtype=np.int64)
        ids = np.asarray(ids, dtype=np.int64).reshape(n, -1)
        pad_ids[:, : ids.shape[1]] = ids
        pad_c = np.zeros((n, 3), dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.int64).reshape(n, -1)
        pad_c[:, : coeffs.shape[1]] = coeffs
        return cls(a, np.asarray(b, dtype=np.float64).ravel(), np.full(n, kind, dtype="<U14"),
                   np.asarray(residual, dtype=np.float64).ravel(), pad_ids, pad_c)

    @classmethod
    def concat(cls, parts: Iterable["CandidateSet"]) -> "CandidateSet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("a", "b", "kind", "residual", "ids", "coeffs")))

    def __len__(self) -> int:
        return self.a.shape[0]

    def subset(self, mask) -> "CandidateSet":
        return CandidateSet(self.a[mask], self.b[mask], self.kind[mask], self.residual[mask],
                            self.ids[mask], self.coeffs[mask])

    def of_kind(self, kind: str) -> "CandidateSet":
        return self.subset(self.kind == kind)

    def sorted(self) -> "CandidateSet":
        order = np.lexsort((self.b, self.a, self.kind))
        return self.subset(order)

    def params(self) -> list[LineParam]:
        return [LineParam(a, b) for a, b in zip(self.a, self.b)]

    def unique_params(self) -> list[LineParam]:
        pts = sorted(set(zip(self.a.tolist(), self.b.tolist())))
        return [LineParam(a, b) for a, b in pts]


@dataclass(frozen=True)
class CandidateReport:
    special: CandidateSet
    ultraspecial: CandidateSet
    curveC: CandidateSet
    U: CandidateSet
    A: np.ndarray
    B: np.ndarray


def _special_residual(val, pairs, recs):
    """Residual of special-crossing records at per-record contour values."""
    rows = np.arange(val.shape[0])
    p, q, c1, c2 = recs[:, 0], recs[:, 1], recs[:, 2], recs[:, 3]
    dp = val[rows, pairs[p, 0]] - val[rows, pairs[p, 1]]
    qq = np.maximum(q, 0)
    dq = val[rows, pairs[qq, 0]] - val[rows, pairs[qq, 1]]
    return np.where(q < 0, dp, c1 * np.abs(dp) - c2 * np.abs(dq))


def _curve_residual(val, da, db, pairs, recs):
    f, g = recs[:, 0], recs[:, 1]
    rows = np.arange(val.shape[0])

    def diff(arr, k):
        return arr[rows, pairs[k, 0]] - arr[rows, pairs[k, 1]]

    df, dg = diff(val, f), diff(val, g)
    af, ag = diff(da, f), diff(da, g)
    bf, bg = diff(db, f), diff(db, g)
    return df * dg * (ag * bf - af * bg)


def _bisect(gp: GridPair, a0, b0, a1, b1, residual, iters: int = 40):
    """Vectorised bisection of sign changes along straight edges."""
    lo_a, lo_b, hi_a, hi_b = (np.array(v, dtype=np.float64) for v in (a0, b0, a1, b1))
    r_lo = residual(*gp.evaluate(lo_a, lo_b))
    for _ in range(iters):
        ma, mb = 0.5 * (lo_a + hi_a), 0.5 * (lo_b + hi_b)
        r = residual(*gp.evaluate(ma, mb))
        same = (np.sign(r) == np.sign(r_lo)) & ~np.isnan(r)
        lo_a, lo_b, r_lo = np.where(same, ma, lo_a), np.where(same, mb, lo_b), np.where(same, r, r_lo)
        hi_a, hi_b = np.where(same, hi_a, ma), np.where(same, hi_b, mb)
    ma, mb = 0.5 * (lo_a + hi_a), 0.5 * (lo_b + hi_b)
    return ma, mb, residual(*gp.evaluate(ma, mb))


def _crossing_edges(recs, A, B):
    i, j, di, dj = recs[:, 0], recs[:, 1], recs[:, 2], recs[:, 3]
    return A[i], B[j], A[i + di], B[j + dj]


def _cells(a, b, A, B) -> list[set]:
    """Sampling cells touched by each point (points on grid lines touch several)."""
    out = []
    na, nb = A.shape[0] - 1, B.shape[0] - 1
    for x, y in zip(a, b):
        ia = {min(max(int(np.searchsorted(A, x, "right")) - 1, 0), na - 1)}
        ib = {min(max(int(np.searchsorted(B, y, "right")) - 1, 0), nb - 1)}
        for ii in list(ia):
            if abs(x - A[ii]) <= 1e-12 and ii > 0:
                ia.add(ii - 1)
        for jj in list(ib):
            if abs(y - B[jj]) <= 1e-12 and jj > 0:
                ib.add(jj - 1)
        out.append({(p, q) for p in ia for q in ib})
    return out


def _edge_cells(recs, A, B):
    """Both cells bordering each crossing edge: ``(row, ci, cj)`` of valid cells."""
    i, j, di = recs[:, 0], recs[:, 1], recs[:, 2]
    rows = np.tile(np.arange(len(recs)), 2)
    ci = np.concatenate([i, np.where(di == 1, i, i - 1)])
    cj = np.concatenate([j, np.where(di == 1, j - 1, j)])
    ok = (ci >= 0) & (cj >= 0) & (ci < len(A) - 1) & (cj < len(B) - 1)
    return rows[ok], ci[ok], cj[ok]


def _ultraspecial_jobs(crossings, A, B) -> np.ndarray:
    """Per cell, every pair of relations ``t = s1`` and ``t = s2`` sharing a term ``t``.

    Terms are ``(pair, coefficient)``; rows are ``(ci, cj, t, s1, s2)`` with the
    three terms sorted and encoded as ``2 * pair + coefficient - 1``.
    """
    rel = crossings[crossings[:, 5] >= 0]
    if not len(rel):
        return np.zeros((0, 5), dtype=np.int64)
    rows, ci, cj = _edge_cells(rel, A, B)
    t1 = (2 * rel[:, 4] + rel[:, 6] - 1)[rows]
    t2 = (2 * rel[:, 5] + rel[:, 7] - 1)[rows]
    # both orientations so every term sees its neighbours
    recs = np.unique(np.column_stack([np.r_[ci, ci], np.r_[cj, cj], np.r_[t1, t2], np.r_[t2, t1]]), axis=0)
    key = recs[:, :3]
    starts = np.flatnonzero(np.r_[True, np.any(key[1:] != key[:-1], axis=1)])
    stops = np.r_[starts[1:], len(recs)]
    out = []
    for lo, hi in zip(starts.tolist(), stops.tolist()):
        if hi - lo < 2:
            continue
        nb = recs[lo:hi, 3]
        u, v = np.triu_indices(hi - lo, 1)
        s1, s2 = nb[u], nb[v]
        base = recs[lo, 2]
        # three pairwise distinct pairs
        keep = (s1 // 2 != s2 // 2) & (s1 // 2 != base // 2) & (s2 // 2 != base // 2)
        if keep.any():
            k = int(keep.sum())
            out.append(np.column_stack([np.full(k, recs[lo, 0]), np.full(k, recs[lo, 1]),
                                        np.sort(np.column_stack([np.full(k, base), s1[keep], s2[keep]]), axis=1)]))
    if not out:
        return np.zeros((0, 5), dtype=np.int64)
    return np.unique(np.concatenate(out), axis=0)


def _newton2(F, cells, A, B, ftol, iters: int = 30):
    """Batched 2x2 Newton solve of ``F(idx, a, b) = 0`` started at each cell centre.

    ``F`` returns residuals of shape (n, 2); ``ftol`` is the per-equation
    convergence threshold. Returns ``(a, b, converged)`` per cell; iterates
    leaving a neighbourhood of their cell are abandoned.
    """
    a_lo, a_hi = A[cells[:, 0]], A[cells[:, 0] + 1]
    b_lo, b_hi = B[cells[:, 1]], B[cells[:, 1] + 1]
    a = 0.5 * (a_lo + a_hi)
    b = 0.5 * (b_lo + b_hi)
    ha, hb = 1e-7 * (a_hi - a_lo), 1e-7 * (b_hi - b_lo)
    ftol = np.asarray(ftol, dtype=np.float64)
    active = np.arange(len(cells))
    done = np.zeros(len(cells), dtype=bool)
    for _ in range(iters):
        if not len(active):
            break
        x, y, n = a[active], b[active], len(active)
        idx = np.tile(active, 3)
        vals = F(idx, np.concatenate([x, x + ha[active], x]), np.concatenate([y, y, y + hb[active]]))
        f0, fa, fb = vals[:n], vals[n:2 * n], vals[2 * n:]
        J = np.stack([(fa - f0) / ha[active, None], (fb - f0) / hb[active, None]], axis=-1)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.all(np.isfinite(f0), axis=1) & np.isfinite(det) & (det != 0.0)
        conv = ok & np.all(np.abs(f0) <= ftol, axis=1)
        done[active[conv]] = True
        with np.errstate(divide="ignore", invalid="ignore"):
            sa = (-f0[:, 0] * J[:, 1, 1] + f0[:, 1] * J[:, 0, 1]) / det
            sb = (-J[:, 0, 0] * f0[:, 1] + J[:, 1, 0] * f0[:, 0]) / det
        step = ok & ~conv
        x = np.clip(x + np.where(step, sa, 0.0), 1e-9, 1 - 1e-9)
        y = y + np.where(step, sb, 0.0)
        al, ah, bl, bh = a_lo[active], a_hi[active], b_lo[active], b_hi[active]
        inside = (x >= 2 * al - ah) & (x <= 2 * ah - al) & (y >= 2 * bl - bh) & (y <= 2 * bh - bl)
        a[active], b[active] = x, y
        active = active[step & inside]
    in_cell = (a >= a_lo - 1e-9) & (a <= a_hi + 1e-9) & (b >= b_lo - 1e-9) & (b <= b_hi + 1e-9)
    return a, b, done & in_cell


def _ultraspecial_newton(gp: GridPair, crossings, A, B, tol, iters: int = 30, chunk: int = 50000):
    """Solve two chained gap relations inside each cell where both change sign.

    Relations ``cA gA = cB gB`` and ``cA gA = cC gC`` sharing a term are
    solved together, one Newton run per cell and term triple.
    """
    jobs = _ultraspecial_jobs(crossings, A, B)
    pairs = gp.pairs
    packed = gp.merged.packed
    out = []
    for lo in range(0, len(jobs), chunk):
        part = jobs[lo:lo + chunk]
        terms = part[:, 2:5]
        pid, coef = terms // 2, (terms % 2 + 1).astype(np.float64)
        cols = np.ascontiguousarray(np.column_stack([pairs[pid[:, k]] for k in range(3)]))

        def F(idx, a, b):
            v = _contours.selected_values(*packed, a, b, cols[idx])
            g = coef[idx] * np.abs(v[:, 0::2] - v[:, 1::2])
            return np.stack([g[:, 0] - g[:, 1], g[:, 0] - g[:, 2]], axis=-1)

        a, b, ok = _newton2(F, part[:, :2], A, B, (0.1 * tol, 0.1 * tol), iters)
        for k in np.flatnonzero(ok).tolist():
            err = float(np.max(np.abs(F(np.array([k]), a[k:k + 1], b[k:k + 1]))))
            out.append((float(a[k]), float(b[k]), err,
                        (int(pid[k, 0]), int(coef[k, 0])), (int(pid[k, 1]), int(coef[k, 1])),
                        (int(pid[k, 2]), int(coef[k, 2]))))
    return out


def _relation_jobs(crossings, A, B) -> np.ndarray:
    """Unique ``(ci, cj, p, c1, q, c2)`` for gap relations crossing each cell, with p < q."""
    rel = crossings[crossings[:, 5] >= 0]
    if not len(rel):
        return np.zeros((0, 6), dtype=np.int64)
    rows, ci, cj = _edge_cells(rel, A, B)
    r = rel[rows]
    return np.unique(np.column_stack([ci, cj, r[:, 4], r[:, 6], r[:, 5], r[:, 7]]), axis=0)


def _curve_cells(ccross, A, B) -> np.ndarray:
    """Unique ``(ci, cj, f, g)`` for parallel-gradient residuals changing sign in each cell."""
    if not len(ccross):
        return np.zeros((0, 4), dtype=np.int64)
    rows, ci, cj = _edge_cells(ccross, A, B)
    r = ccross[rows]
    return np.unique(np.column_stack([ci, cj, r[:, 4], r[:, 5]]), axis=0)


def _join(left, right, width):
    """Rows of ``left`` whose first ``width`` columns appear in ``right``."""
    if not len(left) or not len(right):
        return left[:0]
    lk = np.ascontiguousarray(left[:, :width]).view([("", left.dtype)] * width).ravel()
    rk = np.ascontiguousarray(right[:, :width]).view([("", right.dtype)] * width).ravel()
    return left[np.isin(lk, rk)]


def _curve_special_solve(gp: GridPair, rel_jobs, curve_cells, A, B, tol, iters: int = 30,
                         chunk: int = 50000):
    """Points where a gap relation and the parallel-gradient condition hold for the same pairs."""
    if not len(rel_jobs) or not len(curve_cells):
        return []
    # align (ci, cj, p, q) with the curve records (pair indices ascending)
    keyed = np.column_stack([rel_jobs[:, 0], rel_jobs[:, 1], rel_jobs[:, 2], rel_jobs[:, 4],
                             rel_jobs[:, 3], rel_jobs[:, 5]])
    jobs = _join(keyed, curve_cells, 4)
    pairs = gp.pairs
    out = []
    for lo in range(0, len(jobs), chunk):
        part = jobs[lo:lo + chunk]
        cols = np.ascontiguousarray(np.column_stack([pairs[part[:, 2]], pairs[part[:, 3]]]))
        c1, c2 = part[:, 4].astype(np.float64), part[:, 5].astype(np.float64)

        def F(idx, a, b):
            val, da, db = gp.evaluate_cols(a, b, cols[idx])
            df, dg = val[:, 0] - val[:, 1], val[:, 2] - val[:, 3]
            af, ag = da[:, 0] - da[:, 1], da[:, 2] - da[:, 3]
            bf, bg = db[:, 0] - db[:, 1], db[:, 2] - db[:, 3]
            u, v = ag * bf, af * bg
            with np.errstate(invalid="ignore", divide="ignore"):
                par = (u - v) / (np.abs(u) + np.abs(v))
            par = np.where((u == 0) & (v == 0), 0.0, par)
            return np.stack([c1[idx] * np.abs(df) - c2[idx] * np.abs(dg), par], axis=-1)

        a, b, ok = _newton2(F, part[:, :2], A, B, (0.1 * tol, 1e-9), iters)
        for k in np.flatnonzero(ok).tolist():
            r = F(np.array([k]), a[k:k + 1], b[k:k + 1])[0]
            out.append((float(a[k]), float(b[k]), float(abs(r[0])), int(part[k, 2]), int(part[k, 3]),
                        int(part[k, 4]), int(part[k, 5])))
    return out


def _endpoint_special_solve(gp: GridPair, rel_jobs, A, B, tol, iters: int = 60):
    """Points where a gap relation holds on a line through an endpoint of one of its contours."""
    if not len(rel_jobs):
        return []
    pairs = gp.pairs
    ends = [c.endpoints() for c in gp.contours]
    rows, ex, ey = [], [], []
    quads = np.column_stack([pairs[rel_jobs[:, 2]], pairs[rel_jobs[:, 4]]])
    for slot in range(4):
        for e in range(2):
            has = np.array([len(ends[c]) > e for c in quads[:, slot]])
            idx = np.flatnonzero(has)
            rows.append(idx)
            ex.append(np.array([ends[c][e][0] for c in quads[idx, slot]], dtype=np.float64))
            ey.append(np.array([ends[c][e][1] for c in quads[idx, slot]], dtype=np.float64))
    rows, ex, ey = np.concatenate(rows), np.concatenate(ex), np.concatenate(ey)
    job = rel_jobs[rows]
    a_lo, a_hi = A[job[:, 0]], A[job[:, 0] + 1]
    b_lo, b_hi = B[job[:, 1]], B[job[:, 1] + 1]
    # clip each family b = (1 - a) x - a y to the a-range where it stays in the cell
    lo, hi = a_lo.copy(), a_hi.copy()
    s = ex + ey
    with np.errstate(divide="ignore", invalid="ignore"):
        a_at_blo = np.where(s != 0, (ex - b_lo) / s, np.nan)
        a_at_bhi = np.where(s != 0, (ex - b_hi) / s, np.nan)
    lo = np.maximum(lo, np.where(np.isnan(a_at_blo), lo, np.minimum(a_at_blo, a_at_bhi)))
    hi = np.minimum(hi, np.where(np.isnan(a_at_blo), hi, np.maximum(a_at_blo, a_at_bhi)))
    flat = (s == 0) & ((ex < b_lo) | (ex > b_hi))
    keep = (lo <= hi) & ~flat
    if not keep.any():
        return []
    job, ex, ey, lo, hi = job[keep], ex[keep], ey[keep], lo[keep], hi[keep]
    cols = np.ascontiguousarray(np.column_stack([pairs[job[:, 2]], pairs[job[:, 4]]]))
    c1, c2 = job[:, 3].astype(np.float64), job[:, 5].astype(np.float64)

    def R(a):
        v = _contours.selected_values(*gp.merged.packed, a, (1.0 - a) * ex - a * ey, cols)
        return c1 * np.abs(v[:, 0] - v[:, 1]) - c2 * np.abs(v[:, 2] - v[:, 3])

    r_lo, r_hi = R(lo), R(hi)
    sel = np.isfinite(r_lo) & np.isfinite(r_hi) & (np.sign(r_lo) != np.sign(r_hi))
    job, ex, ey, lo, hi, r_lo = job[sel], ex[sel], ey[sel], lo[sel], hi[sel], r_lo[sel]
    cols, c1, c2 = cols[sel], c1[sel], c2[sel]
    if not len(job):
        return []
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        r = R(mid)
        same = (np.sign(r) == np.sign(r_lo)) & np.isfinite(r)
        lo, r_lo = np.where(same, mid, lo), np.where(same, r, r_lo)
        hi = np.where(same, hi, mid)
    a = 0.5 * (lo + hi)
    r = R(a)
    ok = np.abs(r) <= tol
    return [(float(a[k]), float((1.0 - a[k]) * ex[k] - a[k] * ey[k]), float(abs(r[k])),
             int(job[k, 2]), int(job[k, 4]), int(job[k, 3]), int(job[k, 5])) for k in np.flatnonzero(ok)]


def _endpoint_families(gp: GridPair, A, region: Region) -> CandidateSet:
    parts = []
    for idx, c in enumerate(gp.contours):
        for x, y in c.endpoints():
            bs = (1.0 - A) * x - A * y
            keep = (bs >= region.b_min) & (bs <= region.b_max)
            n = int(keep.sum())
            if n:
                parts.append(CandidateSet.build(A[keep], bs[keep], "endpointFamily", np.zeros(n),
                                                np.full((n, 1), idx), np.zeros((n, 1))))
    return CandidateSet.concat(parts)


def scan_candidates(gp: GridPair, region: Region, resolution=100, tol: float = 1e-6,
                    refine_iters: int = 40, window: tuple[float, float] = (0.0, math.inf)) -> CandidateReport:
    """Sample Sp, USp, C and U on a regular parameter grid in one pass.

    ``window`` limits special relations to common values ``c |gap|`` inside
    it (double points are kept regardless). The default keeps everything.
    """
    vmin, vmax = (float(w) for w in window)
    A, B = region.axes(resolution)
    na, nb = A.shape[0], B.shape[0]
    AA, BB = np.meshgrid(A, B, indexing="ij")
    m = len(gp.contours)
    pairs = gp.pairs
    val, da, db = gp.evaluate(AA.ravel(), BB.ravel())
    val, da, db = (v.reshape(na, nb, m) for v in (val, da, db))

    # special set: node hits and refined sign changes
    diff = np.ascontiguousarray(_scan.pair_differences(val, pairs)) if len(pairs) else np.zeros((na, nb, 0))
    hits, hit_res, triples, triple_res = _scan.node_scan(diff, tol, vmin, vmax)
    cross = _scan.edge_scan(diff, tol, vmin, vmax)
    cross = cross[np.lexsort(cross.T[::-1])] if len(cross) else cross
    sp_parts = []
    if len(hits):
        ids = np.column_stack([pairs[hits[:, 2]], np.where(hits[:, 3:4] >= 0, pairs[np.maximum(hits[:, 3], 0)], -1)])
        sp_parts.append(CandidateSet.build(A[hits[:, 0]], B[hits[:, 1]], "special", hit_res, ids, hits[:, 4:6]))
    if len(cross):
        recs = cross[:, 4:8]
        a0, b0, a1, b1 = _crossing_edges(cross, A, B)
        ma, mb, r = _bisect(gp, a0, b0, a1, b1, lambda v, _da, _db: _special_residual(v, pairs, recs), refine_iters)
        ok = np.abs(r) <= tol
        ids = np.column_stack([pairs[recs[:, 0]], np.where(recs[:, 1:2] >= 0, pairs[np.maximum(recs[:, 1], 0)], -1)])
        sp_parts.append(CandidateSet.build(ma[ok], mb[ok], "special", np.abs(r[ok]), ids[ok], recs[ok, 2:4]))
    special = CandidateSet.concat(sp_parts)

    # ultraspecial set: node triples and chained Newton solves
    us_parts = []
    if len(triples):
        ids = np.column_stack([pairs[triples[:, 2]], pairs[triples[:, 3]], pairs[triples[:, 4]]])
        us_parts.append(CandidateSet.build(A[triples[:, 0]], B[triples[:, 1]], "ultraspecial",
                                           triple_res, ids, triples[:, 5:8]))
    if len(cross):
        sols = _ultraspecial_newton(gp, cross, A, B, tol)
        if sols:
            us_parts.append(CandidateSet.build(
                [s[0] for s in sols], [s[1] for s in sols], "ultraspecial", [s[2] for s in sols],
                [np.concatenate([pairs[s[3][0]], pairs[s[4][0]], pairs[s[5][0]]]) for s in sols],
                [(s[3][1], s[4][1], s[5][1]) for s in sols]))
    ultra = CandidateSet.concat(us_parts)
    # every ultraspecial sample is special too
    special = CandidateSet.concat([special, CandidateSet(ultra.a, ultra.b, np.full(len(ultra), "special", dtype="<U14"),
                                                         ultra.residual, ultra.ids, ultra.coeffs)])

    # curve set: residual sign changes plus endpoint families
    form = (A > 0.5).astype(np.int64)
    curve_parts = [_endpoint_families(gp, A, region)]
    if len(pairs) >= 2:
        ccross = _scan.curve_scan(val, da, db, form, pairs, 0.0)
        if len(ccross):
            ccross = ccross[np.lexsort(ccross.T[::-1])]
            recs = ccross[:, 4:6]
            a0, b0, a1, b1 = _crossing_edges(ccross, A, B)
            ma, mb, r = _bisect(gp, a0, b0, a1, b1,
                                lambda v, x, y: _curve_residual(v, x, y, pairs, recs), refine_iters)
            ok = ~np.isnan(r)
            ids = np.column_stack([pairs[recs[:, 0]], pairs[recs[:, 1]]])
            curve_parts.append(CandidateSet.build(ma[ok], mb[ok], "curveC", np.abs(r[ok]), ids[ok],
                                                  np.zeros((int(ok.sum()), 1))))
    curve = CandidateSet.concat(curve_parts)

    # U = USp together with the Sp samples sharing a cell with a C sample
    c_cells = set().union(*_cells(curve.a, curve.b, A, B)) if len(curve) else set()
    sp_cells = _cells(special.a, special.b, A, B)
    near_c = np.array([bool(cells & c_cells) for cells in sp_cells], dtype=bool)
    U = CandidateSet.concat([ultra, special.subset(near_c)])
    return CandidateReport(special, ultra, curve, U, A, B)


def solve_U(gp: GridPair, region: Region, resolution=100, tol: float = 1e-6,
            window: tuple[float, float] = (0.0, math.inf)) -> CandidateSet:
    """Point solutions for the candidate set U, located to within the solver tolerance.

    Ultraspecial points solve two chained gap relations. The second part of U
    is solved pair-by-pair: a gap relation between two pairs together with
    either the parallel-gradient condition for the same two pairs (kind
    ``curveC``) or a line through an endpoint of one of their contours (kind
    ``endpointFamily``).
    """
    vmin, vmax = (float(w) for w in window)
    A, B = region.axes(resolution)
    na, nb = A.shape[0], B.shape[0]
    AA, BB = np.meshgrid(A, B, indexing="ij")
    m = len(gp.contours)
    pairs = gp.pairs
    if len(pairs) < 2:
        return CandidateSet.empty()
    val, da, db = (v.reshape(na, nb, m) for v in gp.evaluate(AA.ravel(), BB.ravel()))
    diff = np.ascontiguousarray(_scan.pair_differences(val, pairs))
    cross = _scan.edge_scan(diff, tol, vmin, vmax)
    parts = []
    sols = _ultraspecial_newton(gp, cross, A, B, tol)
    if sols:
        parts.append(CandidateSet.build(
            [s[0] for s in sols], [s[1] for s in sols], "ultraspecial", [s[2] for s in sols],
            [np.concatenate([pairs[s[3][0]], pairs[s[4][0]], pairs[s[5][0]]]) for s in sols],
            [(s[3][1], s[4][1], s[5][1]) for s in sols]))
    rel = _relation_jobs(cross, A, B)
    form = (A > 0.5).astype(np.int64)
    ccross = _scan.curve_scan(val, da, db, form, pairs, 0.0)
    for kind, sols in (("curveC", _curve_special_solve(gp, rel, _curve_cells(ccross, A, B), A, B, tol)),
                       ("endpointFamily", _endpoint_special_solve(gp, rel, A, B, tol))):
        if sols:
            parts.append(CandidateSet.build(
                [s[0] for s in sols], [s[1] for s in sols], kind, [s[2] for s in sols],
                [np.concatenate([pairs[s[3]], pairs[s[4]]]) for s in sols],
                [(s[5], s[6]) for s in sols]))
    return CandidateSet.concat(parts).sorted()


def sample_special_set(gp: GridPair, region: Region, resolution=100, tol: float = 1e-6) -> CandidateSet:
    return scan_candidates(gp, region, resolution, tol).special


def approximate_curveC(gp: GridPair, region: Region, resolution=100) -> CandidateSet:
    return scan_candidates(gp, region, resolution).curveC


def assemble_U(gp: GridPair, region: Region, resolution=100, tol: float = 1e-6) -> CandidateSet:
    return scan_candidates(gp, region, resolution, tol).U
