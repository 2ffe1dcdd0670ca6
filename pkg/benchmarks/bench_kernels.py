"""Time the hot kernels with numba enabled and with the pure fallback.

Each mode runs in a fresh interpreter because the switch is read at import.
The numba timings exclude compilation (one warm-up call per workload).

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from matchdist import _accel
from matchdist.bifiltration import diagram_arrays, make_sphere, make_torus
from matchdist.estimate import line_costs
from matchdist.pareto import analytic_sphere_grid
from matchdist.special import GridPair, Region, scan_candidates

repeat, quick = int(sys.argv[1]), sys.argv[2] == "1"
res = 16 if quick else 32
t1 = make_torus(res)
rng = np.random.default_rng(0)
t2 = t1.with_values(t1.values + rng.uniform(-0.1, 0.1, t1.values.shape))
gp = GridPair(analytic_sphere_grid(), analytic_sphere_grid(center=(0.3, 0, 0)))
lines = [(0.5, 0.0), (0.3, 0.2), (0.7, -0.4)]
work = {
    "reduction": lambda: [diagram_arrays(t1, a, b) for a, b in lines],
    "line_costs": lambda: [line_costs(t1, t2, a, b, (0, 1, 2)) for a, b in lines],
    "scan_candidates": lambda: scan_candidates(gp, Region.strip(1.3), 12 if quick else 24),
}
out = {"numba": _accel.USE_NUMBA}
for name, fn in work.items():
    fn()
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    out[name] = min(ts)
print(json.dumps(out))
"""


def run(disable: bool, repeat: int, quick: bool) -> dict:
    env = dict(os.environ)
    env.pop("MATCHDIST_DISABLE_NUMBA", None)
    if disable:
        env["MATCHDIST_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat), "1" if quick else "0"],
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    fast = run(False, args.repeat, args.quick)
    slow = run(True, 1 if not args.quick else args.repeat, args.quick)
    print(f"{'kernel':<18}{'numba s':>12}{'fallback s':>12}{'speedup':>10}")
    for name in fast:
        if name == "numba":
            continue
        print(f"{name:<18}{fast[name]:>12.4f}{slow[name]:>12.4f}{slow[name] / fast[name]:>10.1f}")


if __name__ == "__main__":
    main()
