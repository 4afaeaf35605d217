"""Compare the numba and numpy kernel backends.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``TRANSDUCE_SIM_BACKEND``. Times are the best of ``--repeat``
runs after one warm-up call (which also triggers numba compilation).

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from transduce_sim import kernels
from transduce_sim._backend import backend_name
from transduce_sim.config import load_config
from transduce_sim.ensemble import GaussianEnsemble, average_susceptibilities_grid, discretize_arrays
from transduce_sim.model import CenterClass
from transduce_sim.sweep import sweep

repeat = int(sys.argv[1])
base = CenterClass(g13=2e6, g12=40.0, gamma13=1e6, gamma12=1.0, omega_p=4e6)
w, d = np.meshgrid(np.linspace(-1e5, 1e5, 201), np.linspace(-4e9, 4e9, 201), indexing="ij")
w, d = w.ravel(), d.ravel()
spec = GaussianEnsemble(0.0, 0.0, 30e6, 100e3, 1e6, base, 32, 32)
cols25 = discretize_arrays(spec.with_(nodes13=5, nodes12=5)).columns()
cols1024 = discretize_arrays(spec).columns()
rng = np.random.default_rng(1)
s13 = 30e6 * rng.standard_normal(1_000_000)
s12 = 100e3 * rng.standard_normal(1_000_000)
cfg = load_config("tcenter_fig2c")
J = np.array([[-1e3 + 2e4j, 3e3j], [3e3j, -2e3 - 1e4j]])

cases = {
    "class_sums 201x201 x 25 classes": lambda: kernels.class_sums(cols25, w, d),
    "class_sums 201x201 x 1024 classes": lambda: kernels.class_sums(cols1024, w, d),
    "hybrid average 201x201, 32 nodes": lambda: average_susceptibilities_grid(spec, w, d),
    "sample_stats 1e6 draws": lambda: kernels.sample_stats(2e6, 40.0, 1e6, 1.0, 4e6, s13, s12, 0.0, 0.0),
    "dopri5 2x2 ring-up": lambda: kernels.dopri5_linear(J, np.array([1 + 0j, 0j]), np.zeros(2, complex),
                                                         np.linspace(0, 5e-3, 11), 1e-9, 1e-15, 1e-6, 1e-18,
                                                         10**7),
    "sweep fig2c 201x201": lambda: sweep(cfg.system, (-1e5, 1e5), (-4e9, 4e9), 201, cfg.n_pump),
}
out = {"backend": backend_name(), "times": {}}
for name, fn in cases.items():
    t0 = time.perf_counter()
    ref = fn()
    first = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["times"][name] = {"first": first, "best": best}
print(json.dumps(out))
"""


def run_backend(backend: str, repeat: int) -> dict:
    env = dict(os.environ, TRANSDUCE_SIM_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", help="also write the raw timings here")
    args = parser.parse_args(argv)
    results = {b: run_backend(b, args.repeat) for b in ("numba", "numpy")}
    names = list(results["numba"]["times"])
    width = max(map(len, names))
    print(f"{'case':{width}s}  {'numba (s)':>10s}  {'numpy (s)':>10s}  {'speed-up':>8s}  {'numba first call (s)':>20s}")
    for name in names:
        tn = results["numba"]["times"][name]
        tp = results["numpy"]["times"][name]
        print(f"{name:{width}s}  {tn['best']:10.4f}  {tp['best']:10.4f}  {tp['best'] / tn['best']:8.1f}  "
              f"{tn['first']:20.3f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"timestamp": time.time(), **results}, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
