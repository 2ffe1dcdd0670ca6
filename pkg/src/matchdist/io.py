"""Line-oriented text formats.

Every file starts with ``#matchdist <kind> v1``. Floats are written with 17
significant digits so that parsing returns the identical double; infinity is
spelled ``inf``. Blank lines and lines starting with ``# `` are ignored.
"""
from __future__ import annotations

import itertools
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bifiltration import BifilteredComplex
from .diagrams import PersistenceDiagram
from .estimate import EstimateReport, LineRecord
from .geometry import LineParam
from .pareto import Contour, ExtendedParetoGrid
from .special import CandidateSet

VERSION = "v1"


class FormatError(ValueError):
    """Malformed input file."""


def fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _num(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"{where}: bad number {tok!r}") from None


def _int(tok: str, where: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"{where}: bad integer {tok!r}") from None


def _header(kind: str) -> str:
    return f"#matchdist {kind} {VERSION}\n"


def _read_lines(path, kind: str) -> list[tuple[int, list[str]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    lines = text.splitlines()
    if not lines or lines[0].split() != ["#matchdist", kind, VERSION]:
        raise FormatError(f"{path}: expected header '#matchdist {kind} {VERSION}'")
    out = []
    for no, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s or s.startswith("# ") or s == "#":
            continue
        out.append((no, s.split()))
    return out


# diagrams

def format_diagrams(diagrams: Sequence[PersistenceDiagram]) -> str:
    parts = [_header("diagram"), "# degree birth death multiplicity\n"]
    parts.append("degrees " + " ".join(str(d.degree) for d in diagrams) + "\n")
    for d in diagrams:
        for p in d.points:
            v = math.inf if p.is_essential else p.v
            parts.append(f"point {d.degree} {fmt(p.u)} {fmt(v)} {p.multiplicity}\n")
    return "".join(parts)


def write_diagrams(path, diagrams: Sequence[PersistenceDiagram]) -> None:
    Path(path).write_text(format_diagrams(diagrams))


def read_diagrams(path) -> list[PersistenceDiagram]:
    degrees: list[int] = []
    points: dict[int, list] = {}
    for no, tok in _read_lines(path, "diagram"):
        where = f"{path}:{no}"
        if tok[0] == "degrees":
            degrees = [_int(t, where) for t in tok[1:]]
        elif tok[0] == "point" and len(tok) == 5:
            k, m = _int(tok[1], where), _int(tok[4], where)
            u, v = _num(tok[2], where), _num(tok[3], where)
            if m < 1 or math.isnan(u) or math.isnan(v) or math.isinf(u) or v < u:
                raise FormatError(f"{where}: invalid point")
            points.setdefault(k, []).extend([(u, v)] * m)
        else:
            raise FormatError(f"{where}: unexpected record {tok[0]!r}")
    for k in points:
        if k not in degrees:
            degrees.append(k)
    try:
        return [PersistenceDiagram(k, points.get(k, ())) for k in sorted(set(degrees))]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


# meshes: OFF geometry plus a values sidecar

def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".values")


def write_mesh(path, cx: BifilteredComplex) -> None:
    """OFF file of the maximal simplices plus ``<stem>.values`` with (phi1, phi2)."""
    if cx.dimension > 2:
        raise ValueError("only complexes of dimension <= 2 fit the OFF format")
    pos = cx.positions
    if pos is None:
        pos = np.column_stack([cx.values, np.zeros(cx.n_vertices)])
    faces = cx.maximal_simplices()
    lines = ["OFF\n", f"{cx.n_vertices} {len(faces)} 0\n"]
    lines += [" ".join(fmt(c) for c in p) + "\n" for p in pos]
    lines += [f"{len(f)} " + " ".join(str(v) for v in f) + "\n" for f in faces]
    Path(path).write_text("".join(lines))
    vals = [_header("values"), f"count {cx.n_vertices}\n"]
    vals += [f"{fmt(u)} {fmt(v)}\n" for u, v in cx.values]
    sidecar_path(path).write_text("".join(vals))


def _off_tokens(path: Path) -> list[str]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    toks = []
    for line in text.splitlines():
        toks.extend(line.split("#", 1)[0].split())
    return toks


def read_mesh(path, values_path=None) -> BifilteredComplex:
    """Read an OFF mesh and its value sidecar; polygons are fan-triangulated."""
    path = Path(path)
    toks = _off_tokens(path)
    if not toks or toks[0] != "OFF":
        raise FormatError(f"{path}: not an OFF file")
    try:
        nv, nf = int(toks[1]), int(toks[2])
        pos_ = 4
        pos = np.array([float(t) for t in toks[pos_: pos_ + 3 * nv]]).reshape(nv, 3)
        pos_ += 3 * nv
        simplices = set()
        for _ in range(nf):
            k = int(toks[pos_])
            f = [int(t) for t in toks[pos_ + 1: pos_ + 1 + k]]
            if len(f) != k:
                raise IndexError
            pos_ += 1 + k
            if k <= 3:
                simplices.add(tuple(sorted(f)))
            else:
                simplices.update(tuple(sorted((f[0], f[i], f[i + 1]))) for i in range(1, k - 1))
    except (IndexError, ValueError):
        raise FormatError(f"{path}: truncated or malformed OFF data") from None

    values_path = Path(values_path) if values_path is not None else sidecar_path(path)
    if not values_path.exists():
        raise FormatError(f"missing value sidecar {values_path}")
    rows = []
    count = None
    for no, tok in _read_lines(values_path, "values"):
        where = f"{values_path}:{no}"
        if tok[0] == "count":
            count = _int(tok[1], where)
        elif len(tok) == 2:
            rows.append((_num(tok[0], where), _num(tok[1], where)))
        else:
            raise FormatError(f"{where}: expected two values")
    if count is not None and count != len(rows):
        raise FormatError(f"{values_path}: count {count} but {len(rows)} rows")
    if len(rows) != nv:
        raise FormatError(f"{values_path}: {len(rows)} value rows for {nv} vertices")

    closed = set()
    for s in simplices:
        for r in range(2, len(s) + 1):
            closed.update(itertools.combinations(s, r))
    try:
        return BifilteredComplex(np.array(rows).reshape(-1, 2), tuple(sorted(closed)), pos)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


# extended Pareto grids

def format_grid(grid: ExtendedParetoGrid) -> str:
    parts = [_header("grid")]
    for c in grid:
        label = f" {c.label}" if c.label else ""
        if c.is_proper:
            parts.append(f"contour proper {c.tag} {c.polyline.shape[0]}{label}\n")
            parts += [f"{fmt(x)} {fmt(y)}\n" for x, y in c.polyline]
        else:
            parts.append(f"contour {c.kind} {c.tag} {fmt(c.x0)} {fmt(c.y0)}{label}\n")
    return "".join(parts)


def write_grid(path, grid: ExtendedParetoGrid) -> None:
    Path(path).write_text(format_grid(grid))


def read_grid(path) -> ExtendedParetoGrid:
    path = Path(path)
    try:
        raw = path.read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    if not raw or raw[0].split() != ["#matchdist", "grid", VERSION]:
        raise FormatError(f"{path}: expected header '#matchdist grid {VERSION}'")
    contours = []
    i = 1
    while i < len(raw):
        s = raw[i].strip()
        where = f"{path}:{i + 1}"
        i += 1
        if not s or s.startswith("# ") or s == "#":
            continue
        head = s.split()
        if head[0] != "contour" or len(head) < 3:
            raise FormatError(f"{where}: expected a contour record")
        kind, tag = head[1], _int(head[2], where)
        try:
            if kind == "proper":
                n = _int(head[3], where)
                label = " ".join(head[4:])
                pts = []
                for _ in range(n):
                    if i >= len(raw):
                        raise FormatError(f"{where}: polyline truncated")
                    tok = raw[i].split()
                    if len(tok) != 2:
                        raise FormatError(f"{path}:{i + 1}: expected 'x y'")
                    pts.append((_num(tok[0], where), _num(tok[1], where)))
                    i += 1
                contours.append(Contour.proper(pts, tag=tag, label=label))
            elif kind in ("vertical", "horizontal") and len(head) >= 5:
                label = " ".join(head[5:])
                contours.append(Contour(kind, _num(head[3], where), _num(head[4], where), tag=tag, label=label))
            else:
                raise FormatError(f"{where}: unknown contour kind {kind!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{where}: {exc}") from None
    return ExtendedParetoGrid(contours)


# candidate samples

def format_candidates(cs: CandidateSet) -> str:
    parts = [_header("candidates"), "# a b kind residual ids[6] coeffs[3]\n"]
    for k in range(len(cs)):
        ids = " ".join(str(int(v)) for v in cs.ids[k])
        co = " ".join(str(int(v)) for v in cs.coeffs[k])
        parts.append(f"{fmt(cs.a[k])} {fmt(cs.b[k])} {cs.kind[k]} {fmt(cs.residual[k])} {ids} {co}\n")
    return "".join(parts)


def write_candidates(path, cs: CandidateSet) -> None:
    Path(path).write_text(format_candidates(cs))


def read_candidates(path) -> CandidateSet:
    a, b, kind, res, ids, co = [], [], [], [], [], []
    for no, tok in _read_lines(path, "candidates"):
        where = f"{path}:{no}"
        if len(tok) != 13:
            raise FormatError(f"{where}: expected 13 fields")
        a.append(_num(tok[0], where))
        b.append(_num(tok[1], where))
        kind.append(tok[2])
        res.append(_num(tok[3], where))
        ids.append([_int(t, where) for t in tok[4:10]])
        co.append([_int(t, where) for t in tok[10:13]])
    if not a:
        return CandidateSet.empty()
    return CandidateSet(np.array(a), np.array(b), np.array(kind, dtype="<U14"), np.array(res),
                        np.array(ids, dtype=np.int64), np.array(co, dtype=np.int64))


# estimator reports

def format_report(rep: EstimateReport) -> str:
    parts = [_header("report"), f"method {rep.method}\n",
             "degrees " + " ".join(str(d) for d in rep.degrees) + "\n",
             f"value {fmt(rep.value)}\n"]
    if rep.realizer is None:
        parts.append("realizer none\n")
    else:
        parts.append(f"realizer {fmt(rep.realizer.a)} {fmt(rep.realizer.b)}\n")
    if rep.witness:
        parts.append(f"witness {rep.witness}\n")
    parts.append("# line a b cost-per-degree\n")
    for r in rep.per_line:
        parts.append(f"line {fmt(r.a)} {fmt(r.b)} " + " ".join(fmt(c) for c in r.costs) + "\n")
    return "".join(parts)


def write_report(path, rep: EstimateReport) -> None:
    Path(path).write_text(format_report(rep))


def read_report(path) -> EstimateReport:
    method, degrees, value, realizer, witness = "naive", (), None, None, None
    lines: list[LineRecord] = []
    for no, tok in _read_lines(path, "report"):
        where = f"{path}:{no}"
        key = tok[0]
        if key == "method":
            method = tok[1]
        elif key == "degrees":
            degrees = tuple(_int(t, where) for t in tok[1:])
        elif key == "value":
            value = _num(tok[1], where)
        elif key == "realizer":
            realizer = None if tok[1] == "none" else LineParam(_num(tok[1], where), _num(tok[2], where))
        elif key == "witness":
            witness = " ".join(tok[1:])
        elif key == "line":
            lines.append(LineRecord(_num(tok[1], where), _num(tok[2], where),
                                    tuple(_num(t, where) for t in tok[3:])))
        else:
            raise FormatError(f"{where}: unexpected record {key!r}")
    if value is None:
        raise FormatError(f"{path}: missing value")
    return EstimateReport(value, realizer, tuple(lines), method, degrees, witness)


def sniff(path) -> str | None:
    """Kind named in the header, or ``OFF`` for meshes."""
    try:
        with open(path) as fh:
            first = fh.readline().split()
    except OSError:
        return None
    if first[:1] == ["OFF"]:
        return "OFF"
    if len(first) == 3 and first[0] == "#matchdist":
        return first[1]
    return None

