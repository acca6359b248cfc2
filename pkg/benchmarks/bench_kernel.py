"""Benchmark the subtree-kernel backends (compiled vs pure numpy).

Builds batches of random dependency-shaped trees, times the full pairwise
kernel matrix under each backend, and checks the outputs are bit-identical.

Usage:
    python benchmarks/bench_kernel.py [--trees N] [--max-nodes N]
                                      [--repeats N] [--seed N]
"""

from __future__ import annotations

import argparse
import os
import random
import statistics
import time

import numpy as np

from reibun._kernel import (
    TreeArrays,
    backend_name,
    build_tree_arrays,
    pairwise_kernels,
)

_ENV_DISABLE = "REIBUN_DISABLE_NUMBA"


def random_tree(rng: random.Random, max_nodes: int, n_labels: int = 12) -> TreeArrays:
    n = rng.randint(2, max_nodes)
    labels = [rng.randrange(n_labels) for _ in range(n)]
    children: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append(i)
    return build_tree_arrays(labels, children, root=0)


def time_backend(trees: list[TreeArrays], repeats: int) -> tuple[list[float], np.ndarray]:
    times = []
    out = pairwise_kernels(trees)  # warm run (covers JIT compile)
    for _ in range(repeats):
        start = time.perf_counter()
        out = pairwise_kernels(trees)
        times.append(time.perf_counter() - start)
    return times, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=300, help="trees per batch")
    ap.add_argument("--max-nodes", type=int, default=40, help="max nodes per tree")
    ap.add_argument("--repeats", type=int, default=5, help="timed runs per backend")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    trees = [random_tree(rng, args.max_nodes) for _ in range(args.trees)]
    n_pairs = args.trees * (args.trees + 1) // 2
    print(
        f"{args.trees} trees (<= {args.max_nodes} nodes), "
        f"{n_pairs} kernel pairs, {args.repeats} repeats"
    )

    results = {}
    outputs = {}
    for disable, name in ((None, "numba"), ("1", "numpy")):
        if disable is None:
            os.environ.pop(_ENV_DISABLE, None)
        else:
            os.environ[_ENV_DISABLE] = disable
        active = backend_name()
        if active != name:
            print(f"  {name:>6}: unavailable (backend resolves to {active}), skipping")
            continue
        times, out = time_backend(trees, args.repeats)
        results[name] = times
        outputs[name] = out
        best = min(times)
        print(
            f"  {name:>6}: best {best * 1e3:8.1f} ms   "
            f"median {statistics.median(times) * 1e3:8.1f} ms   "
            f"({n_pairs / best:,.0f} pairs/s)"
        )
    os.environ.pop(_ENV_DISABLE, None)

    if len(outputs) == 2:
        identical = np.array_equal(outputs["numba"], outputs["numpy"])
        print(f"  outputs bit-identical: {identical}")
        if not identical:
            raise SystemExit("backend outputs diverged")
        speedup = min(results["numpy"]) / min(results["numba"])
        print(f"  speedup (numba over numpy): {speedup:.1f}x")


if __name__ == "__main__":
    main()
