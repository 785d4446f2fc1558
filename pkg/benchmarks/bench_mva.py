#!/usr/bin/env python3
"""Benchmark the exact-MVA lattice kernels: compiled extension vs numpy fallback.

Usage: python benchmarks/bench_mva.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spe_workbench import kernels

CASES = [
    # (name, populations, queueing centers)
    ("small 2-class", (30, 40), 4),
    ("medium 3-class", (60, 80, 25), 5),
    ("ecs-sized 3-class (2.3e6 vectors)", (150, 300, 50), 5),
    ("wide 3-class", (120, 200, 90), 8),
]
QUICK_CASES = CASES[:3]


def make_problem(rng: np.random.Generator, populations, k):
    c = len(populations)
    demand = rng.uniform(0.005, 0.08, size=(k, c))
    think = rng.uniform(5.0, 20.0, size=c)
    pop = np.array(populations, dtype=np.int64)
    return demand, think, pop


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="skip the largest case")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not kernels.HAVE_COMPILED:
        print("compiled kernel unavailable; only timing the fallback")
    rng = np.random.default_rng(7)
    cases = QUICK_CASES if args.quick else CASES

    header = f"{'case':<36}{'vectors':>12}{'fallback':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, populations, k in cases:
        demand, think, pop = make_problem(rng, populations, k)
        vectors = int(np.prod(pop + 1))
        timings = {}
        for kernel_name in ("fallback", "compiled") if kernels.HAVE_COMPILED else ("fallback",):
            fn = kernels.get_mva_lattice(kernel_name)
            best = float("inf")
            result = None
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                result = fn(demand, think, pop)
                best = min(best, time.perf_counter() - t0)
            timings[kernel_name] = (best, result)
        fallback_t, fallback_res = timings["fallback"]
        if kernels.HAVE_COMPILED:
            compiled_t, compiled_res = timings["compiled"]
            np.testing.assert_allclose(compiled_res[0], fallback_res[0], rtol=1e-12)
            print(f"{name:<36}{vectors:>12,}{fallback_t:>11.3f}s{compiled_t:>11.3f}s{fallback_t / compiled_t:>9.1f}x")
        else:
            print(f"{name:<36}{vectors:>12,}{fallback_t:>11.3f}s{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
