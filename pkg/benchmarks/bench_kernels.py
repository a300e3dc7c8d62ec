#!/usr/bin/env python3
"""Benchmark the compiled Bernoulli-inversion kernel against the pure
numpy fallback, and check that the two backends agree.

    python benchmarks/bench_kernels.py [n_nodes]
"""

import sys
import time

import numpy as np

from cornerflow import _kernels_py

try:
    from cornerflow import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def make_states(n, seed=42):
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, 0.8, n)
    t = rng.uniform(0.0, 0.25, n) * np.maximum(s, 0.05)
    return t, s


def bench(fn, t, s, repeats=5):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(t, s, 2.0, 1.0, 1.0, 1.0)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    t, s = make_states(n)
    t_py, out_py = bench(_kernels_py.invert_bernoulli, t, s)
    print(f"pure python/numpy : {n / t_py / 1e6:8.2f} M inversions/s  ({t_py * 1e3:.1f} ms)")
    if not HAVE_COMPILED:
        print("compiled kernel not built (install with cython to compare)")
        return
    t_cy, out_cy = bench(_kernels.invert_bernoulli, t, s)
    print(f"compiled (cython) : {n / t_cy / 1e6:8.2f} M inversions/s  ({t_cy * 1e3:.1f} ms)")
    print(f"speedup           : {t_py / t_cy:8.2f}x")
    for a, b, name in zip(out_cy, out_py, ("rho", "d1H", "d2H", "flag")):
        err = np.nanmax(np.abs(np.asarray(a, float) - np.asarray(b, float)))
        print(f"agreement {name:4s}    : max |diff| = {err:.3e}")
        assert err < 1e-11, name


if __name__ == "__main__":
    main()
