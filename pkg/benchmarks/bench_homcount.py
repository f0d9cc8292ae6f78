"""Time the compiled and pure-Python hom-count kernels on the same encoded instances.

Usage: python3 benchmarks/bench_homcount.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import time

from hyperdepth import homcount
from hyperdepth.families import EnumerationBounds, enumerate_hypergraphs, skew_pair
from hyperdepth.hypergraph import as_incidence, path


def workloads():
    G2, H2 = skew_pair(2)
    G3, H3 = skew_pair(3)
    small = enumerate_hypergraphs(EnumerationBounds(3, 5, connected_only=True))
    rng = random.Random(7)
    sources = rng.sample(small, 40)
    yield "paths P_k -> P_15 (hg)", [(path(k), path(15), True) for k in range(1, 9)]
    yield "sources(3,5) -> skew G_2,H_2 (ig)", [(s, t, False) for s in sources for t in (G2, H2)]
    yield "sources(3,5) -> skew G_3,H_3 (hg)", [(s, t, True) for s in sources for t in (G3, H3)]
    yield "P_6 -> skew G_3 (ig)", [(path(6), G3, False)]


def run(pairs, kernel):
    total = 0
    for src, tgt, eq in pairs:
        enc = homcount._encode(as_incidence(src), as_incidence(tgt), eq)
        total += homcount.count_encoded(*enc, eq, kernel=kernel)
    return total


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = ["python"] + (["cython"] if homcount._compiled is not None else [])
    if len(kernels) == 1:
        print("compiled kernel not built; timing the Python kernel only")
    print(f"{'workload':40} {'kernel':8} {'best s':>9} {'total homs':>14}")
    for name, pairs in workloads():
        times = {}
        for kernel in kernels:
            best, total = float("inf"), None
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                total = run(pairs, kernel)
                best = min(best, time.perf_counter() - t0)
            times[kernel] = (best, total)
            print(f"{name:40} {kernel:8} {best:9.4f} {total:14d}")
        if len(times) == 2:
            assert times["python"][1] == times["cython"][1], "kernels disagree"
            print(f"{'':40} speedup {times['python'][0] / times['cython'][0]:.1f}x")


if __name__ == "__main__":
    main()
