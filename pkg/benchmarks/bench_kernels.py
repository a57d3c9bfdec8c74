"""Benchmark the compiled kernels against the pure-python fallback.

Runs the two hot kernels (ray insertion, per-pixel transparency walk) on
identical inputs through both implementations and prints a timing table.

    python3 benchmarks/bench_kernels.py [--rays 2000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from graspnbv.kernels import _py

try:
    from graspnbv.kernels import _core
except ImportError:
    _core = None


def bench_insert_rays(impl, origin, endpoints, hit, repeat):
    best = np.inf
    for _ in range(repeat):
        grid = np.zeros((140, 140, 120))
        t0 = time.perf_counter()
        impl.insert_rays(
            grid,
            origin,
            endpoints,
            hit,
            np.array([-0.35, -0.35, 0.0]),
            0.005,
            np.log(0.7 / 0.3),
            np.log(0.4 / 0.6),
            -2.0,
            3.5,
        )
        best = min(best, time.perf_counter() - t0)
    return best


def bench_first_nonfree(impl, pixels, nonfree, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.first_nonfree_mask(pixels, nonfree)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rays", type=int, default=2000)
    parser.add_argument("--voxels", type=int, default=200000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    origin = np.array([0.0, 0.0, 0.55])
    endpoints = np.ascontiguousarray(
        rng.uniform([-0.3, -0.3, 0.0], [0.3, 0.3, 0.3], (args.rays, 3))
    )
    hit = np.ascontiguousarray(rng.integers(0, 2, args.rays), dtype=np.uint8)
    pixels = np.sort(rng.integers(0, args.voxels // 8, args.voxels))
    nonfree = np.ascontiguousarray(rng.integers(0, 2, args.voxels), dtype=np.uint8)

    rows = []
    py_rays = bench_insert_rays(_py, origin, endpoints, hit, args.repeat)
    py_walk = bench_first_nonfree(_py, pixels, nonfree, args.repeat)
    rows.append(("python", py_rays, py_walk))
    if _core is not None:
        c_rays = bench_insert_rays(_core, origin, endpoints, hit, args.repeat)
        c_walk = bench_first_nonfree(_core, pixels, nonfree, args.repeat)
        rows.append(("compiled", c_rays, c_walk))

    print(f"{'impl':<10} {'insert_rays':>14} {'first_nonfree':>14}")
    for name, t_rays, t_walk in rows:
        print(f"{name:<10} {t_rays * 1e3:>11.2f} ms {t_walk * 1e3:>11.2f} ms")
    if _core is not None:
        print(
            f"{'speedup':<10} {py_rays / c_rays:>12.1f}x {py_walk / c_walk:>12.1f}x"
        )
    else:
        print("compiled extension not available; only the fallback was timed")


if __name__ == "__main__":
    main()
