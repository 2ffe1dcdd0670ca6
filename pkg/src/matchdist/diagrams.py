"""Persistence diagrams, the extended metric on cornerpoints, and bottleneck matchings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _bottleneck
from .geometry import INF, ExtendedReal

__all__ = [
    "DiagramPoint",
    "DELTA",
    "PersistenceDiagram",
    "Matching",
    "point_distance",
    "bottleneck",
    "bottleneck_cost",
    "pbnf_from_diagram",
    "multiplicity_box",
]

PROPER = "proper"
ESSENTIAL = "essential"
DIAGONAL = "delta"


@dataclass(frozen=True)
class DiagramPoint:
    """A cornerpoint: proper ``(u, v)``, essential ``(u, inf)`` or the diagonal class."""

    kind: str
    u: float | None = None
    v: float | None = None
    multiplicity: int = 1

    def __post_init__(self):
        if self.kind == PROPER:
            if not (math.isfinite(self.u) and math.isfinite(self.v)):
                raise ValueError("proper points need finite coordinates")
            if not self.u < self.v:
                raise ValueError(f"proper point needs u < v, got ({self.u}, {self.v})")
        elif self.kind == ESSENTIAL:
            if not math.isfinite(self.u):
                raise ValueError("essential points need a finite birth")
        elif self.kind != DIAGONAL:
            raise ValueError(f"unknown cornerpoint kind {self.kind!r}")
        if self.kind != DIAGONAL and (int(self.multiplicity) != self.multiplicity or self.multiplicity < 1):
            raise ValueError("multiplicity must be a positive integer")

    @classmethod
    def proper(cls, u: float, v: float, multiplicity: int = 1) -> "DiagramPoint":
        return cls(PROPER, float(u), float(v), int(multiplicity))

    @classmethod
    def essential(cls, u: float, multiplicity: int = 1) -> "DiagramPoint":
        return cls(ESSENTIAL, float(u), None, int(multiplicity))

    @property
    def is_proper(self) -> bool:
        return self.kind == PROPER

    @property
    def is_essential(self) -> bool:
        return self.kind == ESSENTIAL

    @property
    def is_delta(self) -> bool:
        return self.kind == DIAGONAL

    @property
    def death(self) -> ExtendedReal:
        return INF if self.kind == ESSENTIAL else ExtendedReal(self.v)

    def single(self) -> "DiagramPoint":
        """The same location with multiplicity one."""
        if self.kind == DIAGONAL or self.multiplicity == 1:
            return self
        return DiagramPoint(self.kind, self.u, self.v, 1)

    def sort_key(self):
        if self.kind == DIAGONAL:
            return (2, 0.0, 0.0)
        if self.kind == ESSENTIAL:
            return (1, self.u, 0.0)
        return (0, self.u, self.v)

    def __repr__(self):
        if self.kind == DIAGONAL:
            return "DELTA"
        death = "inf" if self.kind == ESSENTIAL else repr(self.v)
        mult = f" x{self.multiplicity}" if self.multiplicity != 1 else ""
        return f"({self.u!r}, {death}){mult}"


DELTA = DiagramPoint(DIAGONAL, None, None, 0)


def point_distance(p: DiagramPoint, q: DiagramPoint) -> ExtendedReal:
    """Extended distance between two cornerpoints (or the diagonal)."""
    if p.is_proper and q.is_proper:
        linf = max(abs(p.u - q.u), abs(p.v - q.v))
        diag = max((p.v - p.u) / 2.0, (q.v - q.u) / 2.0)
        return ExtendedReal(min(linf, diag))
    if p.is_essential and q.is_essential:
        return ExtendedReal(abs(p.u - q.u))
    if p.is_proper and q.is_delta:
        return ExtendedReal((p.v - p.u) / 2.0)
    if p.is_delta and q.is_proper:
        return ExtendedReal((q.v - q.u) / 2.0)
    if p.is_delta and q.is_delta:
        return ExtendedReal(0.0)
    return INF


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite multiset of cornerpoints in one homological degree.

    The diagonal is implicit. Points with equal birth and death are dropped,
    and repeated locations are merged into multiplicities.
    """

    degree: int
    points: tuple[DiagramPoint, ...] = ()

    def __init__(self, degree: int, points: Iterable = ()):
        if int(degree) != degree or degree < 0:
            raise ValueError("degree must be a non-negative integer")
        merged: dict[tuple, int] = {}
        for pt in points:
            pt = _as_point(pt)
            if pt is None or pt.is_delta:
                continue
            key = (pt.kind, pt.u, pt.v)
            merged[key] = merged.get(key, 0) + pt.multiplicity
        pts = tuple(
            sorted(
                (DiagramPoint(kind, u, v, m) for (kind, u, v), m in merged.items()),
                key=DiagramPoint.sort_key,
            )
        )
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_arrays(cls, degree: int, births, deaths, essential_births=()) -> "PersistenceDiagram":
        pts = [(float(u), float(v)) for u, v in zip(births, deaths)]
        pts += [(float(u), math.inf) for u in essential_births]
        return cls(degree, pts)

    @property
    def proper_points(self) -> tuple[DiagramPoint, ...]:
        return tuple(p for p in self.points if p.is_proper)

    @property
    def essential_points(self) -> tuple[DiagramPoint, ...]:
        return tuple(p for p in self.points if p.is_essential)

    def __len__(self) -> int:
        return sum(p.multiplicity for p in self.points)

    def expanded(self) -> list[DiagramPoint]:
        """Points repeated by multiplicity, each with multiplicity one."""
        out = []
        for p in self.points:
            out.extend([p.single()] * p.multiplicity)
        return out

    def arrays(self):
        """(births, deaths, essential births), expanded by multiplicity."""
        prop = [p for p in self.expanded() if p.is_proper]
        ess = [p.u for p in self.expanded() if p.is_essential]
        births = np.array([p.u for p in prop], dtype=np.float64)
        deaths = np.array([p.v for p in prop], dtype=np.float64)
        return births, deaths, np.array(ess, dtype=np.float64)


def _as_point(pt) -> DiagramPoint | None:
    if isinstance(pt, DiagramPoint):
        return pt
    u, v = float(pt[0]), float(pt[1])
    mult = int(pt[2]) if len(pt) > 2 else 1
    if v == math.inf:
        return DiagramPoint.essential(u, mult)
    if u == v:
        return None
    return DiagramPoint.proper(u, v, mult)


@dataclass(frozen=True)
class Matching:
    """A multiset bijection between two diagrams augmented with the diagonal."""

    pairs: tuple[tuple[DiagramPoint, DiagramPoint], ...]
    cost: ExtendedReal
    witness: str = field(default="", compare=False)

    @property
    def is_infinite(self) -> bool:
        return self.cost.is_inf


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> Matching:
    """Optimal matching between two diagrams.

    Essential points are matched in sorted order (any other pairing has
    infinite cost); proper points go through the exact candidate search.
    """
    e1 = sorted((p for p in d1.expanded() if p.is_essential), key=DiagramPoint.sort_key)
    e2 = sorted((p for p in d2.expanded() if p.is_essential), key=DiagramPoint.sort_key)
    p1 = sorted((p for p in d1.expanded() if p.is_proper), key=DiagramPoint.sort_key)
    p2 = sorted((p for p in d2.expanded() if p.is_proper), key=DiagramPoint.sort_key)

    if len(e1) != len(e2):
        witness = (
            f"degree {d1.degree}: {len(e1)} essential points against {len(e2)}; "
            "an essential point can only be matched to an essential point"
        )
        return Matching((), INF, witness)

    pairs = list(zip(e1, e2))
    pb = np.array([p.u for p in p1], dtype=np.float64)
    pd = np.array([p.v for p in p1], dtype=np.float64)
    qb = np.array([q.u for q in p2], dtype=np.float64)
    qd = np.array([q.v for q in p2], dtype=np.float64)
    _, match = _bottleneck.bottleneck_proper(pb, pd, qb, qd)
    n1, n2 = len(p1), len(p2)
    for left, right in enumerate(match):
        right = int(right)
        if left < n1:
            pairs.append((p1[left], p2[right] if right < n2 else DELTA))
        elif right < n2:
            pairs.append((DELTA, p2[right]))
    cost = ExtendedReal(0.0)
    for p, q in pairs:
        cost = max(cost, point_distance(p, q))
    return Matching(tuple(pairs), cost)


def bottleneck_cost(d1: PersistenceDiagram, d2: PersistenceDiagram) -> ExtendedReal:
    return bottleneck(d1, d2).cost


def pbnf_from_diagram(d: PersistenceDiagram, u: float, v: float) -> int:
    """Persistent Betti number at ``(u, v)`` read off a diagram.

    Counts proper points born at or before ``u`` that die after ``v``, plus
    essential points born at or before ``u``.
    """
    if not u < v:
        raise ValueError(f"pbnf needs u < v, got ({u}, {v})")
    total = 0
    for p in d.points:
        if p.u <= u and (p.is_essential or p.v > v):
            total += p.multiplicity
    return total


def multiplicity_box(d: PersistenceDiagram, u: float, v: float, eps: float) -> int:
    """Alternating four-corner sum of the PBNF around ``(u, v)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not u + eps < v - eps:
        raise ValueError("the eps-box must lie above the diagonal")
    return (
        pbnf_from_diagram(d, u + eps, v - eps)
        - pbnf_from_diagram(d, u - eps, v - eps)
        + pbnf_from_diagram(d, u - eps, v + eps)
        - pbnf_from_diagram(d, u + eps, v + eps)
    )


def diagrams_by_degree(diagrams: Sequence[PersistenceDiagram]) -> dict[int, PersistenceDiagram]:
    return {d.degree: d for d in diagrams}
