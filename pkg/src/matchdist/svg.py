"""Deterministic SVG figures: grids, diagrams, candidate clouds, profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

from .diagrams import Matching, PersistenceDiagram
from .estimate import EstimateReport
from .geometry import LineParam
from .pareto import ExtendedParetoGrid
from .special import CandidateSet

PALETTE = {1: "#1f4e9c", 2: "#c0392b"}
KIND_COLORS = {
    "special": "#7f8c8d",
    "ultraspecial": "#8e44ad",
    "curveC": "#27ae60",
    "endpointFamily": "#16a085",
    "U": "#d35400",
}


def _n(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks


@dataclass
class Panel:
    """A plotting area with data limits mapped onto an SVG rectangle."""

    xlim: tuple[float, float]
    ylim: tuple[float, float]
    title: str = ""
    width: float = 360.0
    height: float = 360.0
    margin: float = 40.0
    items: list[str] = field(default_factory=list)

    def sx(self, x: float) -> float:
        x0, x1 = self.xlim
        return self.margin + (x - x0) / (x1 - x0) * (self.width - 2 * self.margin)

    def sy(self, y: float) -> float:
        y0, y1 = self.ylim
        return self.height - self.margin - (y - y0) / (y1 - y0) * (self.height - 2 * self.margin)

    def clip(self, x: float, y: float) -> tuple[float, float]:
        x = min(max(x, self.xlim[0]), self.xlim[1])
        y = min(max(y, self.ylim[0]), self.ylim[1])
        return x, y

    def polyline(self, pts, color: str, width: float = 1.5, dash: str | None = None):
        if len(pts) == 0:
            return
        coords = " ".join(f"{_n(self.sx(x))},{_n(self.sy(y))}" for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                          f'stroke-width="{_n(width)}"{extra}/>')

    def segment(self, p, q, color: str, width: float = 1.0, dash: str | None = None):
        self.polyline([p, q], color, width, dash)

    def dot(self, x: float, y: float, color: str, r: float = 2.5, hollow: bool = False):
        fill = "none" if hollow else color
        self.items.append(f'<circle cx="{_n(self.sx(x))}" cy="{_n(self.sy(y))}" r="{_n(r)}" '
                          f'fill="{fill}" stroke="{color}"/>')

    def text(self, x: float, y: float, s: str, size: int = 11, anchor: str = "middle"):
        self.items.append(f'<text x="{_n(x)}" y="{_n(y)}" font-size="{size}" '
                          f'text-anchor="{anchor}" font-family="sans-serif">{escape(s)}</text>')

    def axes(self, xlabel: str = "", ylabel: str = ""):
        m, w, h = self.margin, self.width, self.height
        self.items.append(f'<rect x="{_n(m)}" y="{_n(m)}" width="{_n(w - 2 * m)}" '
                          f'height="{_n(h - 2 * m)}" fill="none" stroke="#000"/>')
        for t in _nice_ticks(*self.xlim):
            X = self.sx(t)
            self.items.append(f'<line x1="{_n(X)}" y1="{_n(h - m)}" x2="{_n(X)}" y2="{_n(h - m + 4)}" stroke="#000"/>')
            self.text(X, h - m + 15, _n(t), 9)
        for t in _nice_ticks(*self.ylim):
            Y = self.sy(t)
            self.items.append(f'<line x1="{_n(m - 4)}" y1="{_n(Y)}" x2="{_n(m)}" y2="{_n(Y)}" stroke="#000"/>')
            self.text(m - 6, Y + 3, _n(t), 9, "end")
        if self.title:
            self.text(w / 2, m - 12, self.title, 12)
        if xlabel:
            self.text(w / 2, h - 6, xlabel)
        if ylabel:
            self.items.append(f'<text x="12" y="{_n(h / 2)}" font-size="11" font-family="sans-serif" '
                              f'text-anchor="middle" transform="rotate(-90 12 {_n(h / 2)})">{escape(ylabel)}</text>')

    def body(self) -> str:
        return "\n".join(self.items)


def compose(panels: Sequence[Panel]) -> str:
    """Place panels side by side in one SVG document."""
    width = sum(p.width for p in panels) or 100.0
    height = max((p.height for p in panels), default=100.0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(width)}" height="{_n(height)}" '
           f'viewBox="0 0 {_n(width)} {_n(height)}">',
           f'<rect width="{_n(width)}" height="{_n(height)}" fill="#fff"/>']
    x = 0.0
    for p in panels:
        out.append(f'<g transform="translate({_n(x)},0)">')
        out.append(p.body())
        out.append("</g>")
        x += p.width
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _grid_bounds(grids: Sequence[ExtendedParetoGrid]):
    xs, ys = [], []
    for g in grids:
        for c in g:
            if c.is_proper:
                xs.extend(c.polyline[:, 0])
                ys.extend(c.polyline[:, 1])
            else:
                xs.append(c.x0)
                ys.append(c.y0)
    if not xs:
        return (-1.0, 1.0), (-1.0, 1.0)
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    pad = 0.25 * (hi - lo) + 0.5
    return (lo - pad, hi + pad), (lo - pad, hi + pad)


def grid_panel(grids: Sequence[ExtendedParetoGrid], lines: Sequence[LineParam] = (),
               title: str = "extended Pareto grid") -> Panel:
    """Contours of one or two grids; half-lines are clipped to the view."""
    xlim, ylim = _grid_bounds(grids)
    p = Panel(xlim, ylim, title)
    p.axes("x", "y")
    for g in grids:
        for c in g:
            color = PALETTE.get(c.tag, "#000")
            if c.is_proper:
                p.polyline(c.polyline, color, 1.8)
            elif c.kind == "vertical":
                p.segment((c.x0, c.y0), (c.x0, ylim[1]), color, 1.2, "5,3")
                p.dot(c.x0, c.y0, color, 2.0)
            else:
                p.segment((c.x0, c.y0), (xlim[1], c.y0), color, 1.2, "5,3")
                p.dot(c.x0, c.y0, color, 2.0)
    for line in lines:
        pts = _line_in_box(line, xlim, ylim)
        if pts:
            p.segment(pts[0], pts[1], "#555", 1.0, "2,2")
    return p


def _line_in_box(line: LineParam, xlim, ylim):
    a, b = line.a, line.b
    if a == 0.0:
        return [(b, ylim[0]), (b, ylim[1])] if xlim[0] <= b <= xlim[1] else None
    if a == 1.0:
        return [(xlim[0], -b), (xlim[1], -b)] if ylim[0] <= -b <= ylim[1] else None
    # y = ((1 - a) x - b) / a
    pts = []
    for x in xlim:
        y = ((1 - a) * x - b) / a
        if ylim[0] <= y <= ylim[1]:
            pts.append((x, y))
    for y in ylim:
        x = (a * y + b) / (1 - a)
        if xlim[0] < x < xlim[1]:
            pts.append((x, y))
    pts = sorted(set(pts))
    return [pts[0], pts[-1]] if len(pts) >= 2 else None


def diagram_panel(d1: PersistenceDiagram, d2: PersistenceDiagram | None = None,
                  matching: Matching | None = None, title: str = "") -> Panel:
    """Superposed diagrams; essential points sit on a dashed line above the plot."""
    pts = [p for d in (d1, d2) if d is not None for p in d.points]
    finite = [v for p in pts for v in (p.u, p.v) if v is not None and math.isfinite(v)]
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + 2 * pad
    top = hi - pad
    p = Panel((lo, hi), (lo, hi), title or f"degree {d1.degree}")
    p.axes("birth", "death")
    p.segment((lo, lo), (hi, hi), "#999", 1.0)
    p.segment((lo, top), (hi, top), "#bbb", 0.8, "4,3")

    def place(pt):
        return pt.u, (top if pt.is_essential else pt.v)

    if matching is not None:
        for x, y in matching.pairs:
            if x.is_delta and y.is_delta:
                continue
            if x.is_delta or y.is_delta:
                q = y if x.is_delta else x
                u, v = place(q)
                m = 0.5 * (u + v)
                p.segment((u, v), (m, m), "#444", 0.8)
            else:
                p.segment(place(x), place(y), "#444", 0.8)
    for d, tag in ((d1, 1), (d2, 2)):
        if d is None:
            continue
        for pt in d.points:
            u, v = place(pt)
            p.dot(u, v, PALETTE[tag], 3.0, hollow=(tag == 2))
    return p


def candidate_panel(sets: dict[str, CandidateSet], cbar: float, title: str = "parameter strip",
                    max_points: int = 4000) -> Panel:
    """Candidate samples in the (a, b) strip, thinned to ``max_points`` per kind."""
    p = Panel((0.0, 1.0), (-cbar, cbar), title)
    p.axes("a", "b")
    p.segment((0.5, -cbar), (0.5, cbar), "#999", 0.8, "3,3")
    for name in sorted(sets):
        cs = sets[name]
        color = KIND_COLORS.get(name, "#000")
        step = max(1, -(-len(cs) // max_points))
        for a, b in zip(cs.a[::step], cs.b[::step]):
            p.dot(float(a), float(b), color, 1.2)
    return p


def profile_panel(report: EstimateReport, title: str = "") -> Panel:
    """Bottleneck cost along the sampled lines, drawn as a cloud over (a, cost)."""
    costs = [r.cost for r in report.per_line if math.isfinite(r.cost)]
    top = max(costs, default=1.0) or 1.0
    p = Panel((0.0, 1.0), (0.0, 1.1 * top), title or f"{report.method} profile")
    p.axes("a", "cost")
    for r in report.per_line:
        if math.isfinite(r.cost):
            p.dot(r.a, r.cost, "#1f4e9c" if report.method == "naive" else "#c0392b", 1.0)
    if report.realizer is not None and math.isfinite(report.value):
        p.dot(report.realizer.a, report.value, "#000", 4.0, hollow=True)
    p.text(p.width / 2, p.margin + 14, f"max {report.value:.6g}", 10)
    return p


def render_grids(grids, lines=()) -> str:
    return compose([grid_panel(grids, lines)])


def render_diagrams(d1, d2=None, matching=None) -> str:
    return compose([diagram_panel(d1, d2, matching)])


def render_candidates(sets: dict[str, CandidateSet], cbar: float) -> str:
    return compose([candidate_panel(sets, cbar)])


def render_profiles(reports: Sequence[EstimateReport]) -> str:
    return compose([profile_panel(r) for r in reports])


def empty_axes(title: str = "") -> str:
    p = Panel((0.0, 1.0), (0.0, 1.0), title)
    p.axes()
    return compose([p])

