"""Compare the compiled and pure-Python trek kernels.

    python3 benchmarks/bench_treks.py [--paths 2000] [--repeat 5]

Times the pair-accumulation kernel on synthetic path lists, then the full
trek-rule covariance on a dense random model with each backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from edgesem import treks
from edgesem._treks_py import accumulate_pairs as py_kernel
from edgesem.random_models import random_model

try:
    from edgesem._treks_ext import accumulate_pairs as cy_kernel
except ImportError:
    cy_kernel = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(n_paths, n_vertices, repeat):
    rng = np.random.default_rng(0)
    ends = rng.integers(0, n_vertices, n_paths).astype(np.int_)
    prods = rng.standard_normal(n_paths)
    rows = {}

    out_py = [[0.0] * n_vertices for _ in range(n_vertices)]
    ends_l, prods_l = ends.tolist(), prods.tolist()
    rows["python"] = best_of(lambda: py_kernel(ends_l, prods_l, ends_l, prods_l, 0.5, out_py), repeat)

    if cy_kernel is not None:
        out_cy = np.zeros((n_vertices, n_vertices))
        rows["cython"] = best_of(lambda: cy_kernel(ends, prods, ends, prods, 0.5, out_cy), repeat)
        # Same number of repeats on both sides, so the accumulated sums must agree.
        assert np.allclose(np.asarray(out_py), out_cy, rtol=1e-9, atol=1e-9)
    return rows


def bench_covariance(n_vertices, repeat):
    g, p = random_model(7, n_vertices, p_directed=0.6, p_bidirected=0.3)
    n_treks = treks.count_treks(g)
    rows = {}
    saved = treks.BACKEND, treks.accumulate_pairs
    try:
        treks.BACKEND, treks.accumulate_pairs = "python", py_kernel
        rows["python"] = best_of(lambda: treks.covariance_via_treks(p, cap=10**8), repeat)
        if cy_kernel is not None:
            treks.BACKEND, treks.accumulate_pairs = "cython", cy_kernel
            rows["cython"] = best_of(lambda: treks.covariance_via_treks(p, cap=10**8), repeat)
    finally:
        treks.BACKEND, treks.accumulate_pairs = saved
    return n_treks, rows


def report(title, rows):
    print(title)
    for name, t in rows.items():
        print(f"  {name:<8}{t * 1e3:10.2f} ms")
    if "cython" in rows:
        print(f"  speedup {rows['python'] / rows['cython']:8.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--vertices", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if cy_kernel is None:
        print("compiled kernel not built; timing the Python kernel only")
    report(f"kernel: {args.paths} x {args.paths} path pairs",
           bench_kernel(args.paths, args.vertices, args.repeat))
    n_treks, rows = bench_covariance(args.vertices, args.repeat)
    report(f"covariance_via_treks: {args.vertices} vertices, {n_treks} treks", rows)


if __name__ == "__main__":
    main()
