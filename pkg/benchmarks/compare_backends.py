"""Benchmark the claim-sweep kernels: numba JIT versus numpy cumsum.

Runs the same right-to-left slice-claiming workload through both
implementations, first on synthetic grids of increasing size, then
end to end through the grid-search oracle with the backend selected
by the RAMPSCHED_BACKEND environment variable.  Both kernels must
return bitwise-identical results; the script verifies that while it
times them.

Usage:
    python3 benchmarks/compare_backends.py [--repeats 7] [--seed 0]
"""

import argparse
import os
import statistics
import time

import numpy as np

from rampsched._accel import HAS_NUMBA, claim_sweep_numba, claim_sweep_numpy
from rampsched.core import DOUBLE
from rampsched.generators import gen_random_feasible
from rampsched.offline import brute_force_optimal

_GRID_CASES = [
    (2, 512),
    (3, 2048),
    (4, 8192),
    (4, 32768),
]


def synthetic_grid(jobs, slices, rng):
    """Random claim problem shaped like the oracle's merged grids."""
    lengths = rng.uniform(0.001, 0.01, slices)
    inside = np.zeros((jobs, slices), dtype=bool)
    works = np.zeros((jobs, slices), dtype=np.float64)
    need = np.zeros(jobs, dtype=np.float64)
    for j in range(jobs):
        lo = rng.integers(0, slices // 4)
        hi = rng.integers(3 * slices // 4, slices)
        inside[j, lo:hi] = True
        works[j, lo:hi] = lengths[lo:hi] * rng.uniform(0.5, 4.0, hi - lo)
        need[j] = 0.5 * works[j].sum()
    order = np.arange(jobs, dtype=np.int64)
    return works, lengths, inside, need, order


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - start)
    return statistics.median(times), result


def bench_kernels(repeats, seed):
    rng = np.random.default_rng(seed)
    print("synthetic claim grids (median of %d runs)" % repeats)
    header = f"{'jobs':>5} {'slices':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for jobs, slices in _GRID_CASES:
        args = synthetic_grid(jobs, slices, rng)
        t_np, res_np = best_of(claim_sweep_numpy, args, repeats)
        if HAS_NUMBA:
            claim_sweep_numba(*args)  # absorb JIT compilation
            t_nb, res_nb = best_of(claim_sweep_numba, args, repeats)
            assert res_np == res_nb, f"backends disagree on {jobs}x{slices}"
            print(
                f"{jobs:>5} {slices:>8} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} "
                f"{t_np / t_nb:>8.1f}x"
            )
        else:
            print(f"{jobs:>5} {slices:>8} {t_np * 1e3:>10.3f} {'n/a':>10} {'n/a':>8}")


def bench_oracle(repeats, seed):
    print()
    print("grid-search oracle end to end (median of %d runs)" % repeats)
    header = f"{'instance':>12} {'resolution':>11} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    for n, seed_off, resolution in ((2, 1, 4096), (3, 2, 4096), (3, 3, 16384)):
        inst = gen_random_feasible(n, seed + seed_off, DOUBLE)
        results = {}
        timings = {}
        for backend in backends:
            os.environ["RAMPSCHED_BACKEND"] = backend
            try:
                timings[backend], results[backend] = best_of(
                    brute_force_optimal, (inst, resolution, DOUBLE), repeats
                )
            finally:
                os.environ.pop("RAMPSCHED_BACKEND", None)
        if HAS_NUMBA:
            assert results["numpy"] == results["numba"], inst.name
            print(
                f"{inst.name:>12} {resolution:>11} {timings['numpy'] * 1e3:>10.2f} "
                f"{timings['numba'] * 1e3:>10.2f} "
                f"{timings['numpy'] / timings['numba']:>8.1f}x"
            )
        else:
            print(
                f"{inst.name:>12} {resolution:>11} {timings['numpy'] * 1e3:>10.2f} "
                f"{'n/a':>10} {'n/a':>8}"
            )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7, help="runs per timing")
    parser.add_argument("--seed", type=int, default=0, help="workload seed")
    args = parser.parse_args()
    if not HAS_NUMBA:
        print("numba is not importable; timing the numpy kernel only")
    bench_kernels(args.repeats, args.seed)
    bench_oracle(args.repeats, args.seed)


if __name__ == "__main__":
    main()
