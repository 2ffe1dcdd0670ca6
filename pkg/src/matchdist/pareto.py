"""Extended Pareto grids, line/contour intersection and position candidates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _contours
from .diagrams import PersistenceDiagram
from .geometry import INF, ExtendedPoint, LineParam

__all__ = [
    "Contour",
    "ExtendedParetoGrid",
    "Hit",
    "PositionCandidate",
    "PositionReport",
    "AmbiguousIntersectionError",
    "intersect",
    "locate",
    "hat_intersect",
    "threshold_slope",
    "position_candidates",
    "position_check",
    "analytic_sphere_grid",
    "analytic_torus_grid",
]

PROPER = "proper"
VERTICAL = "vertical"
HORIZONTAL = "horizontal"
_KIND_CODE = {PROPER: _contours.PROPER, VERTICAL: _contours.VERTICAL, HORIZONTAL: _contours.HORIZONTAL}


class AmbiguousIntersectionError(ValueError):
    """A polyline segment lies on the filtering line."""


@dataclass(frozen=True, eq=False)
class Contour:
    """One contour of an extended Pareto grid.

    Proper contours carry a polyline, stored with x non-decreasing and y
    non-increasing. Improper contours are the half-lines ``{x = x0, y >= y0}``
    (vertical) and ``{x >= x0, y = y0}`` (horizontal). ``tag`` records which
    of the two compared functions the contour belongs to.
    """

    kind: str
    x0: float = math.nan
    y0: float = math.nan
    polyline: np.ndarray | None = None
    tag: int = 1
    label: str = ""

    def __post_init__(self):
        if self.kind in (VERTICAL, HORIZONTAL):
            x0, y0 = float(self.x0), float(self.y0)
            if not (math.isfinite(x0) and math.isfinite(y0)):
                raise ValueError("improper contour needs a finite start point")
            object.__setattr__(self, "x0", x0)
            object.__setattr__(self, "y0", y0)
            object.__setattr__(self, "polyline", None)
        elif self.kind == PROPER:
            pts = np.array(self.polyline, dtype=np.float64)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
                raise ValueError("proper contour needs an (n, 2) polyline")
            if not np.all(np.isfinite(pts)):
                raise ValueError("proper contour points must be finite")
            if pts.shape[0] > 1 and (pts[-1, 0] < pts[0, 0] or pts[-1, 1] > pts[0, 1]):
                pts = pts[::-1].copy()
            keep = np.ones(pts.shape[0], dtype=bool)
            keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
            pts = pts[keep]
            d = np.diff(pts, axis=0)
            if np.any(d[:, 0] < 0) or np.any(d[:, 1] > 0):
                raise ValueError("proper contour must be monotone with no positive-slope segment")
            pts.setflags(write=False)
            object.__setattr__(self, "polyline", pts)
            object.__setattr__(self, "x0", float(pts[0, 0]))
            object.__setattr__(self, "y0", float(pts[0, 1]))
        else:
            raise ValueError(f"unknown contour kind {self.kind!r}")
        if self.tag not in (1, 2):
            raise ValueError("tag must be 1 or 2")

    @classmethod
    def vertical(cls, x0: float, y0: float, tag: int = 1, label: str = "") -> "Contour":
        return cls(VERTICAL, x0, y0, tag=tag, label=label)

    @classmethod
    def horizontal(cls, x0: float, y0: float, tag: int = 1, label: str = "") -> "Contour":
        return cls(HORIZONTAL, x0, y0, tag=tag, label=label)

    @classmethod
    def proper(cls, points, tag: int = 1, label: str = "") -> "Contour":
        return cls(PROPER, polyline=points, tag=tag, label=label)

    @property
    def is_proper(self) -> bool:
        return self.kind == PROPER

    def with_tag(self, tag: int) -> "Contour":
        return Contour(self.kind, self.x0, self.y0, self.polyline, tag, self.label)

    def reflected(self) -> "Contour":
        """Image under the swap ``(x, y) -> (y, x)``."""
        if self.kind == VERTICAL:
            return Contour(HORIZONTAL, self.y0, self.x0, tag=self.tag, label=self.label)
        if self.kind == HORIZONTAL:
            return Contour(VERTICAL, self.y0, self.x0, tag=self.tag, label=self.label)
        return Contour(PROPER, polyline=self.polyline[::-1, ::-1], tag=self.tag, label=self.label)

    def translated(self, dx: float, dy: float) -> "Contour":
        if self.kind == PROPER:
            return Contour(PROPER, polyline=self.polyline + (dx, dy), tag=self.tag, label=self.label)
        return Contour(self.kind, self.x0 + dx, self.y0 + dy, tag=self.tag, label=self.label)

    @cached_property
    def slopes(self) -> np.ndarray:
        """Per-segment tangent slopes of a proper polyline (-inf for vertical segments)."""
        if self.kind != PROPER:
            return np.array([-math.inf if self.kind == VERTICAL else 0.0])
        d = np.diff(self.polyline, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d[:, 0] == 0.0, -math.inf, d[:, 1] / np.where(d[:, 0] == 0.0, 1.0, d[:, 0]))

    def direction(self, segment: int = 0) -> tuple[float, float]:
        """Unit tangent ``(q, p)`` with q >= 0 and p <= 0."""
        if self.kind == VERTICAL:
            return 0.0, -1.0
        if self.kind == HORIZONTAL:
            return 1.0, 0.0
        if self.polyline.shape[0] < 2:
            return 1.0, 0.0
        segment = min(max(segment, 0), self.polyline.shape[0] - 2)
        dx, dy = self.polyline[segment + 1] - self.polyline[segment]
        n = math.hypot(dx, dy)
        return dx / n, dy / n

    def endpoints(self) -> list[tuple[float, float]]:
        """Finite endpoints: both ends of a polyline, the start of a half-line."""
        if self.kind == PROPER:
            pts = [tuple(self.polyline[0])]
            if self.polyline.shape[0] > 1:
                pts.append(tuple(self.polyline[-1]))
            return [(float(x), float(y)) for x, y in pts]
        return [(self.x0, self.y0)]

    def __repr__(self):
        if self.kind == PROPER:
            return f"Contour(proper, {self.polyline.shape[0]} pts, tag={self.tag})"
        return f"Contour({self.kind}, x0={self.x0!r}, y0={self.y0!r}, tag={self.tag})"


@dataclass(frozen=True, eq=False)
class ExtendedParetoGrid:
    contours: tuple[Contour, ...] = ()

    def __init__(self, contours: Iterable[Contour] = ()):
        object.__setattr__(self, "contours", tuple(contours))

    def __len__(self) -> int:
        return len(self.contours)

    def __iter__(self):
        return iter(self.contours)

    def with_tag(self, tag: int) -> "ExtendedParetoGrid":
        return ExtendedParetoGrid(c.with_tag(tag) for c in self.contours)

    def translated(self, dx: float, dy: float) -> "ExtendedParetoGrid":
        return ExtendedParetoGrid(c.translated(dx, dy) for c in self.contours)

    @cached_property
    def packed(self):
        """Flat arrays consumed by the intersection kernels."""
        kinds = np.array([_KIND_CODE[c.kind] for c in self.contours], dtype=np.int64)
        x0 = np.array([c.x0 for c in self.contours], dtype=np.float64)
        y0 = np.array([c.y0 for c in self.contours], dtype=np.float64)
        ptr = np.zeros(len(self.contours) + 1, dtype=np.int64)
        chunks = []
        for i, c in enumerate(self.contours):
            n = c.polyline.shape[0] if c.is_proper else 0
            ptr[i + 1] = ptr[i] + n
            if n:
                chunks.append(c.polyline)
        flat = np.concatenate(chunks) if chunks else np.zeros((0, 2))
        return kinds, x0, y0, ptr, np.ascontiguousarray(flat[:, 0]), np.ascontiguousarray(flat[:, 1])

    def intersect_all(self, a: float, b: float):
        """Vectorised intersections ``(xs, ys, segment, status)`` for 0 < a < 1."""
        if not 0.0 < a < 1.0:
            raise ValueError("intersect_all needs 0 < a < 1")
        return _contours.intersect_grid(*self.packed, float(a), float(b))


@dataclass(frozen=True)
class Hit:
    """Detailed intersection: the point, the polyline segment, endpoint flag."""

    point: ExtendedPoint
    segment: int = -1
    at_endpoint: bool = False


def locate(line: LineParam, c: Contour) -> Hit | None:
    """Canonical intersection of a line of the open strip with a contour."""
    a, b = line.a, line.b
    if not 0.0 < a < 1.0:
        raise ValueError("locate needs 0 < a < 1; use hat_intersect on the boundary")
    if c.is_proper:
        px = np.ascontiguousarray(c.polyline[:, 0])
        py = np.ascontiguousarray(c.polyline[:, 1])
        x, y, seg, status = _contours.intersect_one(0, 0.0, 0.0, px, py, 0, px.shape[0], a, b)
    else:
        x, y, seg, status = _contours.intersect_one(_KIND_CODE[c.kind], c.x0, c.y0,
                                                    np.zeros(0), np.zeros(0), 0, 0, a, b)
    if status == _contours.MISS:
        return None
    if status == _contours.AMBIGUOUS:
        raise AmbiguousIntersectionError(f"a segment of {c!r} lies on the line {line}")
    return Hit(ExtendedPoint(x, y), int(seg), status == _contours.ENDPOINT)


def intersect(line: LineParam, c: Contour) -> ExtendedPoint | None:
    """The single intersection point of ``r_(a,b)`` and ``c``, or None."""
    hit = locate(line, c)
    return None if hit is None else hit.point


def _hat_vertical_line(b: float, c: Contour) -> ExtendedPoint | None:
    # limit of the intersections as the line tends to {x = b}
    if c.kind == VERTICAL:
        return ExtendedPoint(c.x0, INF) if c.x0 >= b else None
    if c.kind == HORIZONTAL:
        return ExtendedPoint(b, c.y0) if b >= c.x0 else None
    pts = c.polyline
    xs = pts[:, 0]
    if b < xs[0] or b > xs[-1]:
        return None
    lo = int(np.searchsorted(xs, b, side="left"))
    hi = int(np.searchsorted(xs, b, side="right"))
    if hi > lo:
        # vertices with x = b: a vertical run, pick the point nearest to y = -b
        y_top, y_bottom = pts[lo, 1], pts[hi - 1, 1]
        return ExtendedPoint(b, min(max(-b, y_bottom), y_top))
    t = (b - xs[lo - 1]) / (xs[lo] - xs[lo - 1])
    return ExtendedPoint(b, pts[lo - 1, 1] + t * (pts[lo, 1] - pts[lo - 1, 1]))


def hat_intersect(line: LineParam, c: Contour) -> ExtendedPoint | None:
    """Intersection extended to the boundary lines by sequential limits."""
    if 0.0 < line.a < 1.0:
        return intersect(line, c)
    if line.a == 0.0:
        return _hat_vertical_line(line.b, c)
    mirrored = _hat_vertical_line(-line.b, c.reflected())
    return None if mirrored is None else ExtendedPoint(mirrored.y, mirrored.x)


def threshold_slope(h: Contour, b: float) -> float:
    """Slope parameter A with ``(x0, y0)`` on ``r_(A,b)``.

    The line ``r_(a,b)`` meets the horizontal half-line exactly for a in [A, 1[.
    """
    if h.kind != HORIZONTAL:
        raise ValueError("threshold_slope needs a horizontal improper contour")
    if not (h.x0 > b and h.y0 > -b):
        raise ValueError("threshold_slope needs x0 > b and y0 > -b")
    return (h.x0 - b) / (h.x0 + h.y0)


@dataclass(frozen=True)
class PositionCandidate:
    w: float
    contour: Contour
    intersection: ExtendedPoint
    form: str  # "x" or "y"


def _x_form(a: float, b: float, x: float) -> float:
    return (x - b) if a == 0.0 else min(1.0, (1.0 - a) / a) * (x - b)


def _y_form(a: float, b: float, y: float) -> float:
    return (y + b) if a == 1.0 else min(1.0, a / (1.0 - a)) * (y + b)


def position_candidates(grid1: ExtendedParetoGrid, grid2: ExtendedParetoGrid | None,
                        line: LineParam) -> list[PositionCandidate]:
    """Candidate diagram coordinates from every contour met by the line."""
    a, b = line.a, line.b
    contours = list(grid1) + (list(grid2) if grid2 is not None else [])
    out = []
    for c in contours:
        p = hat_intersect(line, c)
        if p is None:
            continue
        if a < 1.0 and p.x.is_finite:
            out.append(PositionCandidate(_x_form(a, b, p.x.value), c, p, "x"))
        if a > 0.0 and p.y.is_finite:
            out.append(PositionCandidate(_y_form(a, b, p.y.value), c, p, "y"))
    return out


@dataclass(frozen=True)
class PositionReport:
    checked: int
    violations: tuple[tuple[int, str, float, float], ...]  # (degree, which, value, nearest gap)
    tol: float

    @property
    def passed(self) -> bool:
        return not self.violations


def position_check(diagrams: PersistenceDiagram | Sequence[PersistenceDiagram],
                   candidates: Sequence[PositionCandidate], tol: float) -> PositionReport:
    """Every finite diagram coordinate must lie within ``tol`` of a candidate."""
    if isinstance(diagrams, PersistenceDiagram):
        diagrams = [diagrams]
    ws = np.sort(np.array([c.w for c in candidates], dtype=np.float64))
    checked = 0
    bad = []
    for d in diagrams:
        for p in d.points:
            coords = [("birth", p.u)] + ([("death", p.v)] if p.is_proper else [])
            for which, value in coords:
                checked += 1
                gap = _nearest(ws, value)
                if not gap <= tol:
                    bad.append((d.degree, which, value, gap))
    return PositionReport(checked, tuple(bad), tol)


def _nearest(sorted_ws: np.ndarray, value: float) -> float:
    if sorted_ws.size == 0:
        return math.inf
    i = int(np.searchsorted(sorted_ws, value))
    best = math.inf
    for j in (i - 1, i):
        if 0 <= j < sorted_ws.size:
            best = min(best, abs(sorted_ws[j] - value))
    return best


def _quarter_arc(cx: float, cy: float, rho: float, start: float, n: int) -> np.ndarray:
    t = np.linspace(start, start - 0.5 * math.pi, n)
    pts = np.column_stack([cx + rho * np.cos(t), cy + rho * np.sin(t)])
    # both ends sit on multiples of pi/2: make them exact
    for i in (0, -1):
        k = round(t[i] / (0.5 * math.pi)) % 4
        pts[i] = (cx + rho * (1, 0, -1, 0)[k], cy + rho * (0, 1, 0, -1)[k])
    return pts


def analytic_sphere_grid(radius: float = 1.0, center: Sequence[float] = (0.0, 0.0, 0.0),
                         samples: int = 257, tag: int = 1) -> ExtendedParetoGrid:
    """Grid of the projection ``(x, z)`` of a round sphere."""
    if not radius > 0 or not math.isfinite(radius):
        raise ValueError("radius must be positive")
    cx, _, cz = (float(c) for c in center)
    rho = float(radius)
    return ExtendedParetoGrid([
        Contour.vertical(cx - rho, cz, tag, "v:min x"),
        Contour.vertical(cx + rho, cz, tag, "v:max x"),
        Contour.horizontal(cx, cz - rho, tag, "h:min z"),
        Contour.horizontal(cx, cz + rho, tag, "h:max z"),
        Contour.proper(_quarter_arc(cx, cz, rho, 0.5 * math.pi, samples), tag, "arc:I"),
        Contour.proper(_quarter_arc(cx, cz, rho, 1.5 * math.pi, samples), tag, "arc:III"),
    ])


def analytic_torus_grid(radii: Sequence[float] = (2.0, 0.8), orientation: float = 0.0,
                        center: Sequence[float] = (0.0, 0.0, 0.0), samples: int = 257,
                        tag: int = 1) -> ExtendedParetoGrid:
    """Grid of the projection ``(x, y)`` of a torus of revolution about the z-axis.

    The image does not depend on ``orientation``, which only reparametrises.
    """
    R, r = (float(v) for v in radii)
    if not (0.0 < r < R) or not math.isfinite(R):
        raise ValueError("torus radii must satisfy 0 < r < R")
    cx, cy, _ = (float(c) for c in center)
    contours = []
    for rho, name in ((R - r, "inner"), (R + r, "outer")):
        contours += [
            Contour.vertical(cx - rho, cy, tag, f"v:{name} min x"),
            Contour.vertical(cx + rho, cy, tag, f"v:{name} max x"),
            Contour.horizontal(cx, cy - rho, tag, f"h:{name} min y"),
            Contour.horizontal(cx, cy + rho, tag, f"h:{name} max y"),
            Contour.proper(_quarter_arc(cx, cy, rho, 0.5 * math.pi, samples), tag, f"arc:{name} I"),
            Contour.proper(_quarter_arc(cx, cy, rho, 1.5 * math.pi, samples), tag, f"arc:{name} III"),
        ]
    return ExtendedParetoGrid(contours)
