"""Diversity scoring for sentence lists.

Syntactic diversity inverts a subtree kernel computed over dependency trees
whose deprels are generalized through a shipped mapping table (subtypes
collapsed, with a coarser relation-class granularity available).  Lexical
diversity is the uniqueness of token 1-4-grams pooled across the list.  The
combined score weights both halves equally.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from . import _kernel
from .corpus import ROOT, Sentence

__all__ = [
    "LabeledTree",
    "DiversityScore",
    "DeprelTable",
    "NGramProfile",
    "load_deprel_table",
    "generalize_labels",
    "subtree_kernel",
    "syntactic_similarity",
    "syntactic_diversity",
    "lexical_diversity",
    "combined_diversity",
    "ngram_profile",
    "pooled_uniqueness",
    "similarity_matrix",
    "NGRAM_ORDERS",
]

NGRAM_ORDERS = (1, 2, 3, 4)

Granularity = Literal["label", "cls"]

_FALLBACK = ("dep", "other")


@dataclass(frozen=True, slots=True)
class LabeledTree:
    """Ordered labeled tree: per-node label text plus child index lists."""

    labels: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]
    root: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "children", tuple(tuple(c) for c in self.children))
        n = len(self.labels)
        if len(self.children) != n:
            raise ValueError("labels and children lengths differ")
        if not 0 <= self.root < n:
            raise ValueError(f"root {self.root} outside 0..{n - 1}")
        seen = [False] * n
        stack = [self.root]
        while stack:
            node = stack.pop()
            if seen[node]:
                raise ValueError("cycle or re-entered node in tree")
            seen[node] = True
            stack.extend(self.children[node])
        if not all(seen):
            raise ValueError("children lists do not reach every node")

    @property
    def n_nodes(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, slots=True)
class DiversityScore:
    syntactic: float
    lexical: float
    combined: float

    def as_dict(self) -> dict[str, float]:
        return {
            "syntactic": self.syntactic,
            "lexical": self.lexical,
            "combined": self.combined,
        }


class DeprelTable:
    """Deprel generalization lookup: full relation, else base, else ``dep``."""

    def __init__(self, rows: Iterable[tuple[str, str, str]]) -> None:
        self._label: dict[str, str] = {}
        self._cls: dict[str, str] = {}
        for deprel, label, cls in rows:
            self._label[deprel] = label
            self._cls[deprel] = cls

    def lookup(self, deprel: str, granularity: Granularity = "label") -> str:
        if granularity == "label":
            table = self._label
        elif granularity == "cls":
            table = self._cls
        else:
            raise ValueError(f"unknown granularity {granularity!r}")
        if deprel in table:
            return table[deprel]
        base = deprel.split(":", 1)[0]
        if base in table:
            return table[base]
        return _FALLBACK[0] if granularity == "label" else _FALLBACK[1]


def load_deprel_table(path: str | Path | None = None) -> DeprelTable:
    if path is None:
        text = (
            resources.files("reibun")
            .joinpath("data/deprel_generalization.tsv")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    rows: list[tuple[str, str, str]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "deprel":
            continue
        if len(parts) != 3:
            raise ValueError(f"bad generalization row: {line!r}")
        rows.append((parts[0], parts[1], parts[2]))
    return DeprelTable(rows)


_default_table: DeprelTable | None = None


def _table() -> DeprelTable:
    global _default_table
    if _default_table is None:
        _default_table = load_deprel_table()
    return _default_table


def generalize_labels(
    s: Sentence,
    granularity: Granularity = "label",
    table: DeprelTable | None = None,
) -> LabeledTree:
    """Dependency tree of a sentence with generalized deprel node labels."""
    tbl = table or _table()
    n = len(s.tokens)
    labels = tuple(tbl.lookup(t.deprel, granularity) for t in s.tokens)
    kids: list[list[int]] = [[] for _ in range(n)]
    root = -1
    for i, t in enumerate(s.tokens):
        if t.head == ROOT:
            root = i
        else:
            kids[t.head].append(i)
    if root < 0:
        raise ValueError(f"sentence {s.id} has no root token")
    return LabeledTree(
        labels=labels,
        children=tuple(tuple(c) for c in kids),
        root=root,
    )


def _encode(trees: Sequence[LabeledTree]) -> list[_kernel.TreeArrays]:
    codes: dict[str, int] = {}
    encoded = []
    for t in trees:
        ints = []
        for lab in t.labels:
            if lab not in codes:
                codes[lab] = len(codes)
            ints.append(codes[lab])
        encoded.append(_kernel.build_tree_arrays(ints, t.children, t.root))
    return encoded


def subtree_kernel(t1: LabeledTree, t2: LabeledTree) -> int:
    """Number of matching subtree-fragment pairs between two labeled trees."""
    e1, e2 = _encode([t1, t2])
    return int(round(_kernel.kernel_pair(e1, e2)))


def syntactic_similarity(t1: LabeledTree, t2: LabeledTree) -> float:
    mat = _kernel.pairwise_kernels(_encode([t1, t2]))
    return _normalize(mat[0, 1], mat[0, 0], mat[1, 1])


def _normalize(k12: float, k11: float, k22: float) -> float:
    if k11 <= 0.0 or k22 <= 0.0:
        return 0.0
    return float(k12 / math.sqrt(k11 * k22))


def similarity_matrix(trees: Sequence[LabeledTree]) -> np.ndarray:
    """Pairwise normalized similarities; diagonal is exactly 1 for non-empty trees."""
    raw = _kernel.pairwise_kernels(_encode(trees))
    m = raw.shape[0]
    out = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(m):
            out[i, j] = _normalize(raw[i, j], raw[i, i], raw[j, j])
    return out


def syntactic_diversity(sentences: Sequence[Sentence]) -> float:
    """Mean pairwise (1 - similarity); a singleton or empty list scores 1.0."""
    if len(sentences) < 2:
        return 1.0
    trees = [generalize_labels(s) for s in sentences]
    sims = similarity_matrix(trees)
    return diversity_from_similarities(sims, range(len(sentences)))


def diversity_from_similarities(sims: np.ndarray, members: Iterable[int]) -> float:
    idx = list(members)
    if len(idx) < 2:
        return 1.0
    total = 0.0
    pairs = 0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            total += 1.0 - float(sims[idx[a], idx[b]])
            pairs += 1
    return total / pairs


NGramProfile = tuple[Counter, ...]


def ngram_profile(s: Sentence) -> NGramProfile:
    """Token-surface n-gram multisets of one sentence, one Counter per order."""
    surfaces = tuple(t.surface for t in s.tokens)
    profile = []
    for n in NGRAM_ORDERS:
        c: Counter = Counter()
        for i in range(len(surfaces) - n + 1):
            c[surfaces[i : i + n]] += 1
        profile.append(c)
    return tuple(profile)


def pooled_uniqueness(profiles: Sequence[NGramProfile]) -> float:
    """Mean over orders of distinct/total pooled n-grams; empty orders skipped."""
    ratios = []
    for order_idx in range(len(NGRAM_ORDERS)):
        pool: Counter = Counter()
        for p in profiles:
            pool.update(p[order_idx])
        total = sum(pool.values())
        if total == 0:
            continue
        ratios.append(len(pool) / total)
    if not ratios:
        return 1.0
    return sum(ratios) / len(ratios)


def lexical_diversity(sentences: Sequence[Sentence]) -> float:
    if not sentences:
        raise ValueError("lexical_diversity needs a non-empty list")
    return pooled_uniqueness([ngram_profile(s) for s in sentences])


def combined_diversity(sentences: Sequence[Sentence]) -> DiversityScore:
    if not sentences:
        raise ValueError("combined_diversity needs a non-empty list")
    syn = syntactic_diversity(sentences)
    lex = lexical_diversity(sentences)
    return DiversityScore(syntactic=syn, lexical=lex, combined=0.5 * syn + 0.5 * lex)
