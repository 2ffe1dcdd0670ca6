"""Bifiltered simplicial complexes and persistence along a filtering line.

Simplices take the lower-star value: the max of the normalised restriction
over their vertices, so every sublevel set is a subcomplex.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _reduction
from .diagrams import PersistenceDiagram
from .geometry import LineParam, normalized_values

__all__ = [
    "BifilteredComplex",
    "compute_diagram",
    "diagram_arrays",
    "sup_norm_difference",
    "edge_value_gap",
    "make_sphere",
    "make_torus",
]


@dataclass(frozen=True, eq=False)
class BifilteredComplex:
    """Finite simplicial complex with a pair of real values on every vertex.

    ``simplices`` must be closed under taking faces. Vertices are implied by
    ``values`` and need not be listed. ``positions`` is optional embedding
    data used only when writing meshes.
    """

    values: np.ndarray
    simplices: tuple[tuple[int, ...], ...]
    positions: np.ndarray | None = None
    _dims: np.ndarray = field(init=False, repr=False)
    _verts: np.ndarray = field(init=False, repr=False)
    _faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != 2:
            raise ValueError("vertex values must be an (n, 2) array")
        if not np.all(np.isfinite(values)):
            raise ValueError("vertex values must be finite")
        values.setflags(write=False)
        n = values.shape[0]

        simplices = {(v,) for v in range(n)}
        for s in self.simplices:
            key = tuple(sorted(int(v) for v in s))
            if len(set(key)) != len(key) or not key:
                raise ValueError(f"degenerate simplex {s}")
            if key[0] < 0 or key[-1] >= n:
                raise ValueError(f"simplex {s} references a missing vertex")
            if len(key) > 4:
                raise ValueError("simplices of dimension above 3 are not supported")
            if len(key) > 1 and key in simplices:
                raise ValueError(f"duplicate simplex {s}")
            simplices.add(key)
        ordered = sorted(simplices, key=lambda s: (len(s), s))
        index = {s: i for i, s in enumerate(ordered)}
        for s in ordered:
            if len(s) < 2:
                continue
            for face in itertools.combinations(s, len(s) - 1):
                if face not in index:
                    raise ValueError(f"complex is not closed under faces: {face} missing for {s}")

        m = len(ordered)
        dims = np.array([len(s) - 1 for s in ordered], dtype=np.int64)
        verts = np.empty((m, 4), dtype=np.int64)
        faces = np.full((m, 4), -1, dtype=np.int64)
        for i, s in enumerate(ordered):
            verts[i, : len(s)] = s
            verts[i, len(s):] = s[0]
            if len(s) > 1:
                for k, face in enumerate(itertools.combinations(s, len(s) - 1)):
                    faces[i, k] = index[face]

        positions = self.positions
        if positions is not None:
            positions = np.array(positions, dtype=np.float64)
            if positions.shape[0] != n:
                raise ValueError("positions must have one row per vertex")
            positions.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "simplices", tuple(ordered))
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "_dims", dims)
        object.__setattr__(self, "_verts", verts)
        object.__setattr__(self, "_faces", faces)

    @property
    def n_vertices(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return int(self._dims.max())

    def euler_characteristic(self) -> int:
        return int(np.sum((-1) ** self._dims))

    def maximal_simplices(self) -> list[tuple[int, ...]]:
        covered = set()
        for s in self.simplices:
            if len(s) > 1:
                covered.update(itertools.combinations(s, len(s) - 1))
        return [s for s in self.simplices if s not in covered]

    def same_structure(self, other: "BifilteredComplex") -> bool:
        return self.n_vertices == other.n_vertices and self.simplices == other.simplices

    def with_values(self, values) -> "BifilteredComplex":
        return BifilteredComplex(values, self.simplices, self.positions)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def _filtration(cx: BifilteredComplex, a: float, b: float, top_dim: int):
    keep = cx._dims <= top_dim
    dims = cx._dims[keep]
    vals = normalized_values(cx.values, a, b)
    svals = vals[cx._verts[keep]].max(axis=1)
    # value first, then dimension: faces precede cofaces at ties
    order = np.lexsort((dims, svals))
    rank = np.empty(order.shape[0], dtype=np.int64)
    rank[order] = np.arange(order.shape[0])
    faces = cx._faces[keep][order]
    faces = np.where(faces >= 0, rank[np.maximum(faces, 0)], -1)
    return dims[order], faces, svals[order]


def diagram_arrays(cx: BifilteredComplex, a: float, b: float, max_degree: int | None = None):
    """Per-degree ``(births, deaths, essential_births)`` arrays along ``r_(a,b)``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a} outside [0, 1]")
    if max_degree is None:
        max_degree = cx.dimension
    top = max_degree + 1
    dims, faces, svals = _filtration(cx, a, b, top)
    pdim, pb, pd, edim, eb = _reduction.reduce_filtration(dims, faces, top)
    births = svals[pb]
    deaths = svals[pd]
    alive = deaths > births
    out = {}
    for k in range(max_degree + 1):
        sel = alive & (pdim == k)
        out[k] = (births[sel], deaths[sel], svals[eb[edim == k]])
    return out


def compute_diagram(cx: BifilteredComplex, line: LineParam, max_degree: int | None = None) -> list[PersistenceDiagram]:
    """Persistence diagrams of the normalised restriction along ``line``."""
    arrays = diagram_arrays(cx, line.a, line.b, max_degree)
    return [PersistenceDiagram.from_arrays(k, *arrays[k]) for k in sorted(arrays)]


def sup_norm_difference(cx1: BifilteredComplex, cx2: BifilteredComplex) -> float:
    """Largest max-norm change of the vertex values between two complexes."""
    if not cx1.same_structure(cx2):
        raise ValueError("complexes must share the same simplicial structure")
    if cx1.n_vertices == 0:
        return 0.0
    return float(np.max(np.abs(cx1.values - cx2.values)))


def edge_value_gap(cx: BifilteredComplex, a: float, b: float) -> float:
    """Largest change of the normalised restriction across a single edge."""
    edges = np.array([s for s in cx.simplices if len(s) == 2], dtype=np.int64).reshape(-1, 2)
    if not len(edges):
        return 0.0
    vals = normalized_values(cx.values, a, b)
    return float(np.max(np.abs(vals[edges[:, 0]] - vals[edges[:, 1]])))


def _surface(points: np.ndarray, triangles: Iterable[tuple[int, int, int]]) -> tuple:
    tris = {tuple(sorted(t)) for t in triangles}
    edges = set()
    for t in tris:
        edges.update(itertools.combinations(t, 2))
    return tuple(sorted(edges)) + tuple(sorted(tris))


def make_sphere(resolution: int = 32, radius: float = 1.0,
                center: Sequence[float] = (0.0, 0.0, 0.0)) -> BifilteredComplex:
    """UV-sphere mesh with values ``(x, z)``, the projection onto the plane y = 0.

    ``resolution`` is the number of meridians; half as many latitude bands are
    used. Multiples of 4 put the extreme points of both values on the mesh.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if not radius > 0 or not math.isfinite(radius):
        raise ValueError("radius must be positive")
    cx_, cy_, cz_ = (float(c) for c in center)
    n_lon = int(resolution)
    n_lat = max(n_lon // 2, 2)
    pts = [(cx_, cy_, cz_ + radius)]
    for i in range(1, n_lat):
        theta = math.pi * i / n_lat
        for j in range(n_lon):
            phi = 2.0 * math.pi * j / n_lon
            pts.append((
                cx_ + radius * math.sin(theta) * math.cos(phi),
                cy_ + radius * math.sin(theta) * math.sin(phi),
                cz_ + radius * math.cos(theta),
            ))
    pts.append((cx_, cy_, cz_ - radius))
    pts = np.array(pts)
    south = len(pts) - 1

    def ring(i, j):
        return 1 + (i - 1) * n_lon + (j % n_lon)

    tris = []
    for j in range(n_lon):
        tris.append((0, ring(1, j), ring(1, j + 1)))
        tris.append((south, ring(n_lat - 1, j), ring(n_lat - 1, j + 1)))
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            tris.append((ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)))
            tris.append((ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)))
    values = pts[:, [0, 2]]
    return BifilteredComplex(values, _surface(pts, tris), pts)


def make_torus(resolution: int = 32, radii: Sequence[float] = (2.0, 0.8),
               orientation: float = 0.0,
               center: Sequence[float] = (0.0, 0.0, 0.0)) -> BifilteredComplex:
    """Torus of revolution about the z-axis, valued by its projection ``(x, y)``.

    ``orientation`` rotates the angular sampling about the axis, which
    reparametrises the mesh without changing the image of the projection.
    ``resolution`` meridians are used, with half as many tube samples.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    R, r = (float(v) for v in radii)
    if not (0.0 < r < R) or not math.isfinite(R):
        raise ValueError("torus radii must satisfy 0 < r < R")
    cx_, cy_, cz_ = (float(c) for c in center)
    n_u = int(resolution)
    n_v = max(n_u // 2, 4)
    pts = np.empty((n_u * n_v, 3))
    for i in range(n_u):
        u = 2.0 * math.pi * i / n_u + orientation
        for j in range(n_v):
            v = 2.0 * math.pi * j / n_v
            rho = R + r * math.cos(v)
            pts[i * n_v + j] = (cx_ + rho * math.cos(u), cy_ + rho * math.sin(u), cz_ + r * math.sin(v))

    def vid(i, j):
        return (i % n_u) * n_v + (j % n_v)

    tris = []
    for i in range(n_u):
        for j in range(n_v):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    values = pts[:, [0, 1]]
    return BifilteredComplex(values, _surface(pts, tris), pts)
