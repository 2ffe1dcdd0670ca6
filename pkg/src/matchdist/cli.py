"""Command-line interface.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors
and 3 on unreadable or malformed input. Outputs go to ``-o``; without it,
files are written under ``$MATCHDIST_OUTPUT_DIR`` (default: the working
directory).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io, svg
from .bifiltration import compute_diagram, make_sphere, make_torus
from .diagrams import PersistenceDiagram, bottleneck
from .estimate import (EstimatorConfig, boundary_domination_check, compute_cbar, naive_estimate,
                       reduced_estimate, verify_main_theorem)
from .geometry import LineParam
from .pareto import analytic_sphere_grid, analytic_torus_grid
from .special import GridPair, Region, scan_candidates

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class InputError(Exception):
    pass


def _out(args, default: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get("MATCHDIST_OUTPUT_DIR", ".")) / default


def _floats(text: str, n: int) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from None
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
    return vals


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v
    return parse


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(cbar=args.cbar, resolution_a=args.res_a, resolution_b=args.res_b,
                           tol=args.tol, special_resolution=args.special_res, degree=args.degree)


def _read(reader, path):
    try:
        return reader(path)
    except io.FormatError as exc:
        raise InputError(str(exc)) from None


# commands

def cmd_mesh(args) -> int:
    if args.shape == "sphere":
        cx = make_sphere(args.res, args.radius, args.center)
    else:
        cx = make_torus(args.res, args.radii, args.orientation, args.center)
    if args.noise:
        rng = np.random.default_rng(args.seed)
        cx = cx.with_values(cx.values + rng.uniform(-args.noise, args.noise, cx.values.shape))
    path = _out(args, f"{args.shape}.off")
    io.write_mesh(path, cx)
    print(f"{path}: {cx.n_vertices} vertices, {len(cx.simplices)} simplices")
    return 0


def cmd_diagram(args) -> int:
    cx = _read(io.read_mesh, args.mesh)
    try:
        line = LineParam(args.a, args.b)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    dgms = compute_diagram(cx, line, args.degree)
    if args.degree is not None:
        dgms = [d for d in dgms if d.degree == args.degree]
    path = _out(args, "diagram.txt")
    io.write_diagrams(path, dgms)
    for d in dgms:
        print(f"degree {d.degree}: {len(d)} points ({len(d.essential_points)} essential)")
    return 0


def _by_degree(dgms):
    return {d.degree: d for d in dgms}


def cmd_bottleneck(args) -> int:
    d1 = _by_degree(_read(io.read_diagrams, args.first))
    d2 = _by_degree(_read(io.read_diagrams, args.second))
    degrees = [args.degree] if args.degree is not None else sorted(set(d1) | set(d2))
    worst = 0.0
    for k in degrees:
        m = bottleneck(d1.get(k, PersistenceDiagram(k)), d2.get(k, PersistenceDiagram(k)))
        cost = float(m.cost)
        worst = max(worst, cost)
        print(f"degree {k}: cost {io.fmt(cost)}")
        if m.is_infinite:
            print(f"  {m.witness}")
        for p, q in m.pairs:
            print(f"  {p!r} -> {q!r}")
    print(f"bottleneck {io.fmt(worst)}")
    return 0


def _grids(args):
    if args.grid1 is None or args.grid2 is None:
        return None
    return _read(io.read_grid, args.grid1), _read(io.read_grid, args.grid2)


def cmd_matchdist(args) -> int:
    cx1 = _read(io.read_mesh, args.mesh1)
    cx2 = _read(io.read_mesh, args.mesh2)
    grids = _grids(args)
    if args.method != "naive" and grids is None:
        print("error: --grid1 and --grid2 are required for the reduced and verify methods", file=sys.stderr)
        return EXIT_USAGE
    config = _config(args)
    if args.method == "naive":
        reports = [naive_estimate(cx1, cx2, config)]
    elif args.method == "reduced":
        reports = [reduced_estimate(cx1, cx2, *grids, config)]
    else:
        return _verify(cx1, cx2, grids, config, args)
    for rep in reports:
        path = _out(args, f"{rep.method}.report")
        io.write_report(path, rep)
        _print_estimate(rep)
    return 0


def _print_estimate(rep) -> None:
    where = "none" if rep.realizer is None else f"a={io.fmt(rep.realizer.a)} b={io.fmt(rep.realizer.b)}"
    print(f"{rep.method}: {io.fmt(rep.value)} at {where} ({len(rep.per_line)} lines)")
    if rep.witness:
        print(f"  infinite: {rep.witness}")


def _verify(cx1, cx2, grids, config, args) -> int:
    res = verify_main_theorem(cx1, cx2, *grids, config)
    out = _out(args, "verify")
    out.mkdir(parents=True, exist_ok=True)
    io.write_report(out / "naive.report", res.naive)
    io.write_report(out / "reduced.report", res.reduced)
    _print_estimate(res.naive)
    _print_estimate(res.reduced)
    bnd = boundary_domination_check(cx1, cx2, config)
    print(f"boundary max {io.fmt(bnd.boundary_max)} vs slope-1 max {io.fmt(bnd.segment_max)}: "
          f"{'pass' if bnd.passed else 'FAIL'}")
    status = "pass" if res.passed else "FAIL"
    print(f"verify: {status} (reduced - naive = {io.fmt(0.0 - res.gap)}, tol {io.fmt(res.tol)})")
    return 0 if res.passed and bnd.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    cx1 = _read(io.read_mesh, args.mesh1)
    cx2 = _read(io.read_mesh, args.mesh2)
    grids = (_read(io.read_grid, args.grid1), _read(io.read_grid, args.grid2))
    return _verify(cx1, cx2, grids, _config(args), args)


def cmd_pareto(args) -> int:
    if args.shape == "sphere":
        grid = analytic_sphere_grid(args.radius, args.center, args.samples)
    else:
        grid = analytic_torus_grid(args.radii, args.orientation, args.center, args.samples)
    path = _out(args, f"{args.shape}.grid")
    io.write_grid(path, grid)
    print(f"{path}: {len(grid)} contours")
    return 0


def cmd_special(args) -> int:
    g1 = _read(io.read_grid, args.grid1)
    g2 = _read(io.read_grid, args.grid2) if args.grid2 else None
    if args.cbar is None:
        print("error: --cbar is required", file=sys.stderr)
        return EXIT_USAGE
    rep = scan_candidates(GridPair(g1, g2), Region.strip(args.cbar), args.res_a, args.tol)
    sets = {"special": rep.special, "ultraspecial": rep.ultraspecial, "curveC": rep.curveC, "U": rep.U}
    path = _out(args, f"{args.kind}.candidates")
    io.write_candidates(path, sets[args.kind].sorted())
    for name, cs in sets.items():
        print(f"{name}: {len(cs)} samples")
    return 0


def cmd_render(args) -> int:
    kinds = {}
    for p in args.inputs:
        kind = io.sniff(p)
        if kind is None:
            raise InputError(f"{p}: unrecognised file")
        kinds.setdefault(kind, []).append(p)
    panels = []
    if "grid" in kinds:
        lines = [LineParam(a, b) for a, b in args.line]
        panels.append(svg.grid_panel([_read(io.read_grid, p) for p in kinds["grid"]], lines))
    if "diagram" in kinds:
        sets = [_by_degree(_read(io.read_diagrams, p)) for p in kinds["diagram"][:2]]
        degrees = sorted(set().union(*sets))
        if args.degree is not None:
            degrees = [args.degree]
        for k in degrees:
            d1 = sets[0].get(k, PersistenceDiagram(k))
            d2 = sets[1].get(k, PersistenceDiagram(k)) if len(sets) > 1 else None
            m = bottleneck(d1, d2) if d2 is not None else None
            panels.append(svg.diagram_panel(d1, d2, m if m is not None and not m.is_infinite else None))
    if "candidates" in kinds:
        sets = {}
        for p in kinds["candidates"]:
            cs = _read(io.read_candidates, p)
            for kind in sorted(set(cs.kind.tolist())):
                sets[kind] = cs.of_kind(kind)
        cbar = args.cbar
        if cbar is None:
            bs = [abs(v) for cs in sets.values() for v in cs.b]
            cbar = max(bs, default=1.0) or 1.0
        panels.append(svg.candidate_panel(sets, cbar))
    if "report" in kinds:
        panels.extend(svg.profile_panel(_read(io.read_report, p)) for p in kinds["report"])
    if "OFF" in kinds:
        raise InputError("meshes cannot be rendered; compute a diagram first")
    doc = svg.compose(panels) if panels else svg.empty_axes()
    path = _out(args, "figure.svg")
    path.write_text(doc)
    print(f"{path}: {len(panels)} panels")
    return 0


# parser

def _estimator_flags(p):
    p.add_argument("--res-a", type=int, default=200, help="a samples (naive scan)")
    p.add_argument("--res-b", type=int, default=200, help="b samples (naive scan and slope-1 segment)")
    p.add_argument("--special-res", type=int, default=60, help="sampling grid for the candidate set")
    p.add_argument("--tol", type=_positive(float), default=1e-3)
    p.add_argument("--cbar", type=_positive(float), default=None, help="override the b half-range")
    p.add_argument("--degree", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchdist", description="Matching distance by the foliation method.")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a sphere or torus mesh with value sidecar")
    p.add_argument("shape", choices=["sphere", "torus"])
    p.add_argument("--res", type=int, default=32)
    p.add_argument("--radius", type=_positive(float), default=1.0)
    p.add_argument("--radii", type=lambda t: _floats(t, 2), default=(2.0, 0.8))
    p.add_argument("--orientation", type=float, default=0.0)
    p.add_argument("--center", type=lambda t: _floats(t, 3), default=(0.0, 0.0, 0.0))
    p.add_argument("--noise", type=float, default=0.0, help="uniform value perturbation bound")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("diagram", help="persistence diagrams along one filtering line")
    p.add_argument("mesh")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagram files")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--degree", type=int, default=None)
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("matchdist", help="estimate the matching distance between two meshes")
    p.add_argument("mesh1")
    p.add_argument("mesh2")
    p.add_argument("--grid1")
    p.add_argument("--grid2")
    p.add_argument("--method", choices=["naive", "reduced", "verify"], default="naive")
    _estimator_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_matchdist)

    p = sub.add_parser("verify", help="check reduced >= naive - tol and boundary domination")
    p.add_argument("mesh1")
    p.add_argument("mesh2")
    p.add_argument("grid1")
    p.add_argument("grid2")
    _estimator_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pareto", help="emit an analytic extended Pareto grid")
    p.add_argument("shape", choices=["sphere", "torus"])
    p.add_argument("--radius", type=_positive(float), default=1.0)
    p.add_argument("--radii", type=lambda t: _floats(t, 2), default=(2.0, 0.8))
    p.add_argument("--orientation", type=float, default=0.0)
    p.add_argument("--center", type=lambda t: _floats(t, 3), default=(0.0, 0.0, 0.0))
    p.add_argument("--samples", type=int, default=257)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("special", help="sample Sp, USp, C and U for one or two grids")
    p.add_argument("grid1")
    p.add_argument("grid2", nargs="?")
    p.add_argument("--kind", choices=["special", "ultraspecial", "curveC", "U"], default="U")
    p.add_argument("--res-a", type=int, default=100, help="sampling resolution")
    p.add_argument("--tol", type=_positive(float), default=1e-6)
    p.add_argument("--cbar", type=_positive(float), default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_special)

    p = sub.add_parser("render", help="draw grids, diagrams, candidate samples or reports as SVG")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--line", type=lambda t: _floats(t, 2), action="append", default=[],
                   help="filtering line a,b to overlay on grids")
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--cbar", type=_positive(float), default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
