import json
import os
import subprocess
import sys

import pytest

from matchdist import _accel

SNIPPET = r"""
import json
import numpy as np
from matchdist import _accel, io
from matchdist.bifiltration import compute_diagram, make_sphere, make_torus
from matchdist.estimate import EstimatorConfig, naive_estimate
from matchdist.pareto import analytic_sphere_grid, analytic_torus_grid
from matchdist.special import GridPair, Region, scan_candidates
from matchdist.geometry import LineParam

out = {"numba": _accel.USE_NUMBA}
t = make_torus(10)
rng = np.random.default_rng(4)
t = t.with_values(t.values + rng.uniform(-0.2, 0.2, t.values.shape))
out["diagrams"] = [io.format_diagrams(compute_diagram(t, LineParam(a, b)))
                   for a, b in [(0.3, 0.1), (0.5, 0.0), (0.0, 0.4), (1.0, -0.2)]]
s1, s2 = make_sphere(8), make_sphere(8, center=(0.3, 0, 0))
cfg = EstimatorConfig(resolution_a=5, resolution_b=5, special_resolution=6)
out["naive"] = io.format_report(naive_estimate(s1, s2, cfg))
g1, g2 = analytic_sphere_grid(), analytic_sphere_grid(center=(0.3, 0, 0))
g = analytic_torus_grid()
out["intersect"] = [list(map(np.ndarray.tolist, g.intersect_all(a, b))) for a, b in [(0.2, 0.3), (0.7, -1.0)]]
rep = scan_candidates(GridPair(g1, g2), Region.strip(1.3), 8)
out["scan"] = {k: io.format_candidates(getattr(rep, k).sorted()) for k in ("special", "ultraspecial", "curveC", "U")}
print(json.dumps(out))
"""


def run_snippet(disable: bool) -> dict:
    env = dict(os.environ)
    env.pop("MATCHDIST_DISABLE_NUMBA", None)
    if disable:
        env["MATCHDIST_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", SNIPPET], capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


@pytest.mark.skipif(_accel.numba is None, reason="numba not installed")
def test_numba_and_fallback_agree():
    fast, slow = run_snippet(False), run_snippet(True)
    assert fast.pop("numba") is True and slow.pop("numba") is False
    # tied witnesses may be recorded with different contour ids
    fast_scan, slow_scan = fast.pop("scan"), slow.pop("scan")
    for kind in fast_scan:
        assert _positions(fast_scan[kind]) == _positions(slow_scan[kind]), kind
    for key in fast:
        assert fast[key] == slow[key], key


def _positions(text):
    return [line.split()[:4] for line in text.splitlines() if not line.startswith("#")]


@pytest.mark.parametrize("flag,expected", [("", True), ("0", True), ("1", False), ("yes", False), ("off", True)])
def test_env_flag_parsing(monkeypatch, flag, expected):
    monkeypatch.setenv("MATCHDIST_DISABLE_NUMBA", flag)
    assert (not _accel._disabled_by_env()) == expected
