"""Subtree-kernel dynamic program with numba and pure-numpy backends.

Trees arrive as flat integer arrays in post-order (children precede their
parent), so the DP can fill the node-pair table in one forward sweep.  Both
backends run the same algorithm; the compiled one is used when numba is
importable and ``REIBUN_DISABLE_NUMBA`` is unset.  Accumulation is float64
throughout because fragment counts grow multiplicatively with tree width.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TreeArrays",
    "build_tree_arrays",
    "pack_trees",
    "pairwise_kernels",
    "kernel_pair",
    "backend_name",
]

_ENV_DISABLE = "REIBUN_DISABLE_NUMBA"


@dataclass(frozen=True)
class TreeArrays:
    """One tree in post-order: label codes plus a CSR child table.

    ``kids[cstart[i] : cstart[i] + ccount[i]]`` are node ``i``'s children as
    post-order indices, preserving the original child order.
    """

    labels: np.ndarray
    cstart: np.ndarray
    ccount: np.ndarray
    kids: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.labels.shape[0])


def build_tree_arrays(
    labels: Sequence[int],
    children: Sequence[Sequence[int]],
    root: int,
) -> TreeArrays:
    """Convert an adjacency-list tree to post-order flat arrays."""
    n = len(labels)
    if not 0 <= root < n:
        raise ValueError(f"root {root} outside 0..{n - 1}")
    order: list[int] = []
    # Iterative post-order: push children in reverse so they pop in order.
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        stack.append((node, True))
        for c in reversed(children[node]):
            stack.append((c, False))
    if len(order) != n:
        raise ValueError("children lists do not form a single tree over all nodes")
    pos = {node: i for i, node in enumerate(order)}

    out_labels = np.empty(n, dtype=np.int32)
    ccount = np.empty(n, dtype=np.int32)
    cstart = np.empty(n, dtype=np.int64)
    kid_list: list[int] = []
    for i, node in enumerate(order):
        out_labels[i] = labels[node]
        cstart[i] = len(kid_list)
        ccount[i] = len(children[node])
        kid_list.extend(pos[c] for c in children[node])
    kids = np.asarray(kid_list, dtype=np.int32)
    return TreeArrays(labels=out_labels, cstart=cstart, ccount=ccount, kids=kids)


def pack_trees(
    trees: Sequence[TreeArrays],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Concatenate trees into one flat array set for the batch kernel."""
    node_off = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        node_off[i + 1] = node_off[i] + t.n_nodes
    labels = np.concatenate([t.labels for t in trees]) if trees else np.empty(0, np.int32)
    ccount = np.concatenate([t.ccount for t in trees]) if trees else np.empty(0, np.int32)
    kid_off = 0
    cstart_parts = []
    for t in trees:
        cstart_parts.append(t.cstart + kid_off)
        kid_off += t.kids.shape[0]
    cstart = np.concatenate(cstart_parts) if trees else np.empty(0, np.int64)
    kids = np.concatenate([t.kids for t in trees]) if trees else np.empty(0, np.int32)
    return node_off, labels, cstart, ccount, kids


def _pairwise_impl(node_off, labels, cstart, ccount, kids, out):
    m = node_off.shape[0] - 1
    for a in range(m):
        for b in range(a, m):
            base_a = node_off[a]
            base_b = node_off[b]
            na = node_off[a + 1] - base_a
            nb = node_off[b + 1] - base_b
            table = np.zeros((na, nb), dtype=np.float64)
            total = 0.0
            for i in range(na):
                gi = base_a + i
                la = labels[gi]
                for j in range(nb):
                    gj = base_b + j
                    if la != labels[gj]:
                        continue
                    ca = ccount[gi]
                    val = 1.0
                    if ca == ccount[gj] and ca > 0:
                        ok = True
                        for t in range(ca):
                            c1 = kids[cstart[gi] + t]
                            c2 = kids[cstart[gj] + t]
                            if labels[base_a + c1] != labels[base_b + c2]:
                                ok = False
                                break
                        if ok:
                            for t in range(ca):
                                c1 = kids[cstart[gi] + t]
                                c2 = kids[cstart[gj] + t]
                                val *= 1.0 + table[c1, c2]
                    table[i, j] = val
                    total += val
            out[a, b] = total
            out[b, a] = total
    return out


try:  # compiled twin of _pairwise_impl; absence falls back silently
    from numba import njit

    _pairwise_jit = njit(cache=True)(_pairwise_impl)
except ImportError:  # pragma: no cover - depends on environment
    _pairwise_jit = None


def _numba_enabled() -> bool:
    if os.environ.get(_ENV_DISABLE, "") not in ("", "0"):
        return False
    return _pairwise_jit is not None


def backend_name() -> str:
    return "numba" if _numba_enabled() else "numpy"


def pairwise_kernels(trees: Sequence[TreeArrays]) -> np.ndarray:
    """Full symmetric kernel matrix over a tree list (diagonal = self-kernels)."""
    m = len(trees)
    out = np.zeros((m, m), dtype=np.float64)
    if m == 0:
        return out
    node_off, labels, cstart, ccount, kids = pack_trees(trees)
    fn = _pairwise_jit if _numba_enabled() else _pairwise_impl
    fn(node_off, labels, cstart, ccount, kids, out)
    return out


def kernel_pair(t1: TreeArrays, t2: TreeArrays) -> float:
    return float(pairwise_kernels([t1, t2])[0, 1])


def warmup() -> None:
    """Trigger JIT compilation so first real queries pay no compile cost."""
    t = build_tree_arrays([0, 1], [[1], []], 0)
    pairwise_kernels([t, t])
