#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Measures the three hot kernels on MPI-scale inputs plus a full novel-view
render, and checks that both backends agree numerically.

Usage:
    python benchmarks/bench_kernels.py [--width W] [--height H] [--planes D] [--iters N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mpiforge import _kernels_numpy
from mpiforge.geometry import plane_homography
from mpiforge.synth import make_camera

try:
    from mpiforge import _kernels_numba

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def time_fn(fn, *args, iters=10):
    best = np.inf
    for _ in range(iters):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(width, height, planes, iters):
    rng = np.random.default_rng(0)
    values = rng.random((planes, height, width, 4), dtype=np.float32)
    alpha = np.ascontiguousarray(values[..., 3])
    ref = make_camera(width, height, 0.9 * width, (0.0, 0.0, 0.0))
    tgt = make_camera(width, height, 0.9 * width, (0.25, -0.1, 0.0))
    hinv = np.linalg.inv(plane_homography(ref, tgt, 3.0))
    plane = np.ascontiguousarray(values[0])

    jobs = [
        ("warp_bilinear (1 plane)", lambda k: k.warp_bilinear(plane, hinv, height, width)),
        ("suffix_transmittance", lambda k: k.suffix_transmittance(alpha)),
        ("composite_over", lambda k: k.composite_over_values(values)),
    ]

    impls = [("numpy", _kernels_numpy)]
    if HAS_NUMBA:
        print("warming up numba kernels...", flush=True)
        for _, job in jobs:
            job(_kernels_numba)
        impls.append(("numba", _kernels_numba))
    else:
        print("numba unavailable; benchmarking the numpy fallback only")

    print(f"\ninput: {planes} planes of {height}x{width} RGBA, best of {iters} runs\n")
    print(f"{'kernel':<28s} " + "".join(f"{name + ' (ms)':>14s}" for name, _ in impls)
          + ("   speedup" if HAS_NUMBA else ""))
    print("-" * (28 + 14 * len(impls) + 10))
    for label, job in jobs:
        times = [time_fn(lambda: job(impl), iters=iters) for _, impl in impls]
        row = f"{label:<28s} " + "".join(f"{t * 1e3:>14.3f}" for t in times)
        if HAS_NUMBA:
            row += f"   {times[0] / times[1]:>6.2f}x"
        print(row)

    if HAS_NUMBA:
        print("\nagreement check")
        for label, job in jobs:
            a = job(_kernels_numpy)
            b = job(_kernels_numba)
            diff = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)).max()
            print(f"  {label:<28s} max |diff| = {diff:.3e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--width", type=int, default=512)
    parser.add_argument("--height", type=int, default=272)
    parser.add_argument("--planes", type=int, default=32)
    parser.add_argument("--iters", type=int, default=10)
    args = parser.parse_args()
    bench(args.width, args.height, args.planes, args.iters)


if __name__ == "__main__":
    main()
