"""Timing comparison of the numba and pure-numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py

The backend is fixed at import time by NEGCURV_BACKEND, so each backend is
timed in its own subprocess and the results are compared here.
"""

import json
import os
import subprocess
import sys
import time

CHILD_FLAG = "--child"


def bench_once():
    import numpy as np

    from negcurv._kernels import BACKEND, double_null_march, minplus_sweep

    results = {"backend": BACKEND}

    # double-null march on an 1601 x 801 grid (the acceptance resolution)
    delta = 1.0 / 200.0
    v = np.zeros((1601, 801))
    v[0, :] = np.arange(801) * delta
    double_null_march(v.copy(), delta)  # warm up (jit compile)
    reps, best = 5, float("inf")
    for _ in range(reps):
        w = v.copy()
        t0 = time.perf_counter()
        double_null_march(w, delta)
        best = min(best, time.perf_counter() - t0)
    results["double_null_march_s"] = best

    # min-plus sweep on a 257 x 257 leaf with a radius-9 window
    rng = np.random.default_rng(0)
    q = rng.uniform(0, 8, size=(257, 257))
    span = np.arange(-9, 10)
    oi, oj = np.meshgrid(span, span, indexing="ij")
    offsets = np.stack([oi.ravel(), oj.ravel()], axis=1)
    dists = np.sqrt((offsets**2).sum(axis=1)).astype(float)
    keep = dists <= 9.0
    offsets, dists = offsets[keep], dists[keep]
    minplus_sweep(q, offsets, dists, 1e30)  # warm up
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        minplus_sweep(q, offsets, dists, 1e30)
        best = min(best, time.perf_counter() - t0)
    results["minplus_sweep_s"] = best
    return results


def main():
    if CHILD_FLAG in sys.argv:
        print(json.dumps(bench_once()))
        return
    rows = []
    for backend in ("numba", "numpy"):
        env = dict(os.environ, NEGCURV_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), CHILD_FLAG],
            capture_output=True,
            text=True,
            env=env,
        )
        if out.returncode != 0:
            sys.exit(f"benchmark child failed for {backend}:\n{out.stderr}")
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))
    print(f"{'kernel':<24}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for key, label in (
        ("double_null_march_s", "double_null_march"),
        ("minplus_sweep_s", "minplus_sweep"),
    ):
        tn, tp = rows[0][key], rows[1][key]
        print(f"{label:<24}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}x")


if __name__ == "__main__":
    main()
