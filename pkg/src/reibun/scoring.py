"""Candidate scoring: difficulty fit, sense similarity, and combined quality.

Difficulty fit compares a sentence's JLPT level with the learner's target
level on the 1..5 rank scale (N5=1 .. N1=5) and decays linearly with the
gap, more steeply when the sentence is harder than the target.  Sense
similarity is clamped cosine similarity between contextual embeddings of the
target word's span in the context sentence and in the candidate.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .corpus import Level, Sentence

__all__ = [
    "DifficultyConfig",
    "difficulty_score",
    "sense_similarity",
    "quality_score",
    "EmbeddingProvider",
    "EmbeddingError",
    "SpanEmbeddingRequest",
    "DeterministicStubProvider",
    "PrecomputedFileProvider",
    "RemoteAnnotatorProvider",
    "CONTEXT_SENTENCE_ID",
]

log = logging.getLogger(__name__)

# Sentence id used for the query's own context sentence in precomputed
# embedding files, which otherwise key on corpus ids >= 0.
CONTEXT_SENTENCE_ID = -1

PENALTY_EASIER = 0.2
PENALTY_HARDER = 0.4


@dataclass(frozen=True, slots=True)
class DifficultyConfig:
    penalty_easier: float = PENALTY_EASIER
    penalty_harder: float = PENALTY_HARDER

    def __post_init__(self) -> None:
        if self.penalty_easier < 0 or self.penalty_harder < 0:
            raise ValueError("penalties must be non-negative")


def difficulty_score(
    sentence_level: Level | None,
    target_level: Level,
    config: DifficultyConfig | None = None,
) -> float:
    """Closeness of a sentence's level to the target level, in [0, 1].

    A sentence at the target level scores 1.0.  Each rank step easier costs
    ``penalty_easier``, each step harder costs ``penalty_harder``, floored at
    zero.  Unlabeled sentences score 0.0 rather than guessing a level.
    """
    if sentence_level is None:
        return 0.0
    cfg = config or DifficultyConfig()
    delta = sentence_level.rank - target_level.rank
    penalty = cfg.penalty_harder if delta > 0 else cfg.penalty_easier
    return max(0.0, 1.0 - penalty * abs(delta))


def sense_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two span embeddings, clamped to [0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return max(0.0, float(np.dot(a, b) / (na * nb)))


def quality_score(
    difficulty: float,
    sense: float,
    *,
    w_difficulty: float = 0.5,
    w_sense: float = 0.5,
) -> float:
    if not 0.0 <= difficulty <= 1.0:
        raise ValueError(f"difficulty {difficulty} outside [0, 1]")
    if not 0.0 <= sense <= 1.0:
        raise ValueError(f"sense {sense} outside [0, 1]")
    return w_difficulty * difficulty + w_sense * sense


@dataclass(frozen=True, slots=True)
class SpanEmbeddingRequest:
    """A span of a sentence to embed: character offsets into its surface."""

    sentence_id: int
    surface: str
    span_start: int
    span_end: int

    def __post_init__(self) -> None:
        if not 0 <= self.span_start < self.span_end <= len(self.surface):
            raise ValueError(
                f"span {self.span_start}:{self.span_end} outside surface of "
                f"length {len(self.surface)}"
            )

    @property
    def span_surface(self) -> str:
        return self.surface[self.span_start : self.span_end]


class EmbeddingError(RuntimeError):
    """An embedding provider could not produce a vector for a request."""

    def __init__(self, message: str, *, sentence_id: int | None = None) -> None:
        super().__init__(message)
        self.sentence_id = sentence_id


class EmbeddingProvider(Protocol):
    """Produces one context-sensitive vector per span request."""

    @property
    def dimension(self) -> int: ...

    def embed(self, request: SpanEmbeddingRequest) -> np.ndarray: ...


class DeterministicStubProvider:
    """Hash-seeded pseudo-embeddings: stable, offline, unit-norm.

    The vector depends only on the span surface and the full sentence
    surface, so repeated runs and repeated requests agree exactly.
    """

    def __init__(self, dimension: int = 64) -> None:
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, request: SpanEmbeddingRequest) -> np.ndarray:
        key = request.span_surface + "\x00" + request.surface
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.default_rng(seed)
        vec = rng.normal(size=self._dimension)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec = np.zeros(self._dimension)
            vec[0] = 1.0
            return vec
        return vec / norm


class PrecomputedFileProvider:
    """Serves embeddings from a JSONL file keyed by (sentence_id, span).

    Each line holds ``sentence_id``, ``span_start``, ``span_end`` and
    ``vector``.  The context sentence of a query uses sentence id -1.
    Missing entries raise :class:`EmbeddingError`.
    """

    def __init__(self, path: str | Path) -> None:
        self._path = Path(path)
        self._table: dict[tuple[int, int, int], np.ndarray] = {}
        self._dimension = 0
        self._load()

    def _load(self) -> None:
        with open(self._path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    key = (int(row["sentence_id"]), int(row["span_start"]), int(row["span_end"]))
                    vec = np.asarray(row["vector"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
                    raise EmbeddingError(
                        f"{self._path}:{line_no}: bad embedding row: {err}"
                    ) from err
                if vec.ndim != 1 or vec.size == 0:
                    raise EmbeddingError(
                        f"{self._path}:{line_no}: vector must be a non-empty flat list"
                    )
                if self._dimension == 0:
                    self._dimension = int(vec.size)
                elif vec.size != self._dimension:
                    raise EmbeddingError(
                        f"{self._path}:{line_no}: dimension {vec.size} != {self._dimension}"
                    )
                self._table[key] = vec

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, request: SpanEmbeddingRequest) -> np.ndarray:
        key = (request.sentence_id, request.span_start, request.span_end)
        try:
            return self._table[key]
        except KeyError:
            raise EmbeddingError(
                f"no precomputed embedding for sentence {request.sentence_id} "
                f"span {request.span_start}:{request.span_end}",
                sentence_id=request.sentence_id,
            ) from None


class RemoteAnnotatorProvider:
    """Fetches embeddings from an annotator sidecar over HTTP.

    POSTs ``{"text": ..., "span": [start, end]}`` to ``/embed`` and expects
    ``{"vector": [...], "dimension": n}``.  Concurrent use is capped by a
    semaphore so a burst of candidates cannot stampede the sidecar.
    """

    def __init__(
        self,
        base_url: str,
        *,
        dimension: int = 64,
        timeout: float = 10.0,
        max_concurrency: int = 8,
    ) -> None:
        self._base_url = base_url.rstrip("/")
        self._dimension = dimension
        self._timeout = timeout
        self._semaphore = threading.Semaphore(max_concurrency)

    @property
    def dimension(self) -> int:
        return self._dimension

    def embed(self, request: SpanEmbeddingRequest) -> np.ndarray:
        import httpx

        payload = {
            "text": request.surface,
            "span": [request.span_start, request.span_end],
        }
        with self._semaphore:
            try:
                resp = httpx.post(
                    self._base_url + "/embed", json=payload, timeout=self._timeout
                )
                resp.raise_for_status()
                body = resp.json()
            except httpx.HTTPError as err:
                raise EmbeddingError(
                    f"annotator /embed failed: {err}", sentence_id=request.sentence_id
                ) from err
        try:
            vec = np.asarray(body["vector"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as err:
            raise EmbeddingError(
                f"annotator /embed returned malformed body: {err}",
                sentence_id=request.sentence_id,
            ) from err
        if vec.ndim != 1 or vec.size != self._dimension:
            raise EmbeddingError(
                f"annotator /embed dimension {vec.size} != {self._dimension}",
                sentence_id=request.sentence_id,
            )
        return vec


def span_of_lemma(sentence: Sentence, lemma: str) -> tuple[int, int] | None:
    """Character span of the first token run whose lemma matches, else None.

    Used to locate the target word inside a candidate sentence; falls back to
    a surface substring search by the caller when the lemma is inflected.
    """
    offset = 0
    for t in sentence.tokens:
        if t.lemma == lemma:
            return offset, offset + len(t.surface)
        offset += len(t.surface)
    return None
