"""Benchmark the sharp-maximal kernels: compiled extension vs numpy fallback.

Times bmo_seminorm-style (oscillation max only) and full sharp-function
runs over the exhaustive 1-d family and the dyadic 2-d family.

Usage: python benchmarks/bench_sharp.py [--quick]
"""
import argparse
import time

import numpy as np

from oscillatk import _sharp_py

try:
    from oscillatk import _sharp
except ImportError:
    _sharp = None


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_1d(sizes, p):
    rng = np.random.default_rng(0)
    print(f"\n1-d sharp function, all window lengths, p = {p:g}")
    print(f"{'N':>6} {'compiled (s)':>14} {'fallback (s)':>14} {'speedup':>9}")
    for n in sizes:
        v = rng.normal(size=n)
        lengths = np.arange(1, n + 1, dtype=np.int64)
        t_py = time_call(_sharp_py.sharp1d, v, p, lengths, True)
        if _sharp is not None:
            t_c = time_call(_sharp.sharp1d, v, p, lengths, True)
            print(f"{n:>6} {t_c:>14.4f} {t_py:>14.4f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{n:>6} {'-':>14} {t_py:>14.4f} {'-':>9}")


def bench_2d(sizes, p):
    rng = np.random.default_rng(0)
    print(f"\n2-d sharp function, dyadic square sides, p = {p:g}")
    print(f"{'N':>6} {'compiled (s)':>14} {'fallback (s)':>14} {'speedup':>9}")
    for n in sizes:
        v = rng.normal(size=(n, n))
        sides = []
        L = 1
        while L <= n:
            sides.append(L)
            L *= 2
        if sides[-1] != n:
            sides.append(n)
        sides = np.asarray(sides, dtype=np.int64)
        t_py = time_call(_sharp_py.sharp2d, v, p, sides, True)
        if _sharp is not None:
            t_c = time_call(_sharp.sharp2d, v, p, sides, True)
            print(f"{n:>6} {t_c:>14.4f} {t_py:>14.4f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{n:>6} {'-':>14} {t_py:>14.4f} {'-':>9}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()
    if _sharp is None:
        print("compiled extension not available; timing the fallback only")
    if args.quick:
        sizes_1d, sizes_2d = (128, 256, 512), (16, 32)
    else:
        sizes_1d, sizes_2d = (128, 256, 512, 1024, 2048), (16, 32, 64, 128)
    for p in (1.0, 2.0):
        bench_1d(sizes_1d, p)
    for p in (1.0, 2.0):
        bench_2d(sizes_2d, p)


if __name__ == "__main__":
    main()
