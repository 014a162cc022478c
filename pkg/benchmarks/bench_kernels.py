"""Benchmark the compiled FIFO kernel against the NumPy/Python fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--n 2000000] [--rho 0.8]
                                        [--spawn-rate 0.15] [--repeats 5]

Times both backends on the same pre-drawn workload in two regimes: the
no-rework path (where the fallback can use its vectorized closed form)
and the spawning path (where both run the sequential merge).  Reports the
best-of-N wall time, throughput, and the max deviation between backends.
"""

import argparse
import time

import numpy as np

from wedgeq._kernels import pure

try:
    from wedgeq._kernels import _engine
except ImportError:
    _engine = None


def _workload(n, rho, spawn_rate, seed=2026):
    rng = np.random.default_rng(seed)
    arrivals = np.cumsum(rng.exponential(1.0, n))
    services = rng.exponential(rho, n)
    spawn_mask = (rng.random(n) < spawn_rate).astype(np.uint8)
    rework_services = rng.exponential(0.5 * rho, n)
    return arrivals, services, spawn_mask, rework_services


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def _deviation(a, b):
    return max(
        float(np.max(np.abs(x - y))) if x.size else 0.0
        for x, y in zip(a[:3], b[:3])
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2_000_000, help="number of arrivals")
    parser.add_argument("--rho", type=float, default=0.8, help="offered load")
    parser.add_argument("--spawn-rate", type=float, default=0.15,
                        help="fraction of jobs spawning rework")
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args()

    if _engine is None:
        print("compiled extension not built; timing the fallback only")

    print(f"{args.n:,} arrivals, rho={args.rho}, best of {args.repeats}")
    print(f"{'case':<12} {'backend':<8} {'seconds':>9} {'jobs/s':>12}")
    for label, spawn_rate in (("no-rework", 0.0), ("rework", args.spawn_rate)):
        workload = _workload(args.n, args.rho, spawn_rate)
        n_jobs = args.n + int(workload[2].sum())
        pure_t, pure_out = _time(pure.simulate_fifo, workload, args.repeats)
        print(f"{label:<12} {'python':<8} {pure_t:>9.4f} {n_jobs / pure_t:>12,.0f}")
        if _engine is not None:
            cy_t, cy_out = _time(_engine.simulate_fifo, workload, args.repeats)
            print(f"{label:<12} {'cython':<8} {cy_t:>9.4f} {n_jobs / cy_t:>12,.0f}")
            print(f"{'':<12} speedup {pure_t / cy_t:>8.2f}x"
                  f"   max deviation {_deviation(pure_out, cy_out):.2e}")


if __name__ == "__main__":
    main()
