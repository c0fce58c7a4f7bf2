"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

import argparse
import time

import numpy as np

from wandering_lab import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512, help="raster side for green_escape")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    n = args.size
    xs = np.linspace(-2, 2, n)
    grid = xs[None, :] + 1j * xs[:, None]
    coeffs = np.array([0, 0.5, 1], dtype=complex)
    rng = np.random.default_rng(0)
    zeros = np.concatenate([[0], 0.8 * np.exp(2j * np.pi * rng.uniform(0, 1, 4))])
    w = 0.95 * np.exp(2j * np.pi * rng.uniform(0, 1, n * n))

    cases = {
        "green_escape": lambda k: k.green_escape(coeffs, grid, 500, 1e10),
        "blaschke_eval": lambda k: k.blaschke_eval(zeros, 1.0, w),
    }
    names = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; size {n}x{n}, best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in names) + f"{'speedup':>10}")
    for label, fn in cases.items():
        t = {b: best_of(lambda: fn(kernels.get_backend(b)), args.repeat) for b in names}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{label:<16}" + "".join(f"{t[b]:>11.4f}s" for b in names) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
