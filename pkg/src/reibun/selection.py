"""Suggestion pipeline: retrieval, quality ranking, windowed greedy diversification.

A query names a target word, the sentence it appeared in, and the learner's
level.  Candidates come from the inverted index, are ranked by the equal
weighting of difficulty fit and sense similarity, and the top window is then
diversified greedily: starting from the context sentence, each step adds the
candidate whose inclusion maximizes the list's combined diversity.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from .corpus import Level, Sentence, normalize_surface
from .diversity import (
    DiversityScore,
    combined_diversity,
    diversity_from_similarities,
    generalize_labels,
    ngram_profile,
    pooled_uniqueness,
    similarity_matrix,
)
from .index import (
    InvertedIndex,
    NoContentLemma,
    NotInContext,
    QueryLemma,
    lemmatize_query,
    lookup,
    token_span,
)
from .scoring import (
    CONTEXT_SENTENCE_ID,
    DifficultyConfig,
    EmbeddingError,
    EmbeddingProvider,
    SpanEmbeddingRequest,
    difficulty_score,
    quality_score,
    sense_similarity,
)

__all__ = [
    "Query",
    "ScoredCandidate",
    "Suggestion",
    "SuggestionList",
    "EmptyResult",
    "rank_candidates",
    "greedy_select",
    "suggest",
]

log = logging.getLogger(__name__)

DEFAULT_K = 5
DEFAULT_WINDOW = 50


@dataclass(frozen=True, slots=True)
class Query:
    word: str
    context: Sentence
    target_level: Level
    k: int = DEFAULT_K
    window: int = DEFAULT_WINDOW

    def __post_init__(self) -> None:
        if not self.word:
            raise ValueError("query word must be non-empty")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.window < self.k:
            raise ValueError("window must be >= k")


@dataclass(frozen=True, slots=True)
class ScoredCandidate:
    sentence_id: int
    difficulty_score: float
    sense_score: float
    quality: float
    selected_rank: int | None = None

    def as_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "difficulty_score": self.difficulty_score,
            "sense_score": self.sense_score,
            "quality": self.quality,
            "selected_rank": self.selected_rank,
        }


@dataclass(frozen=True, slots=True)
class Suggestion:
    sentence: Sentence
    scores: ScoredCandidate

    def as_dict(self) -> dict:
        return {
            "sentence_id": self.sentence.id,
            "surface": self.sentence.surface,
            "level": self.sentence.level.name if self.sentence.level else None,
            "source": self.sentence.source.value,
            "scores": self.scores.as_dict(),
        }


@dataclass(frozen=True, slots=True)
class SuggestionList:
    word: str
    lemma: QueryLemma
    target_level: Level
    items: tuple[Suggestion, ...]
    diversity: DiversityScore
    truncated: bool = False

    def as_dict(self) -> dict:
        return {
            "word": self.word,
            "lemma": self.lemma.display(),
            "target_level": self.target_level.name,
            "items": [i.as_dict() for i in self.items],
            "diversity": self.diversity.as_dict(),
            "truncated": self.truncated,
        }


@dataclass(frozen=True, slots=True)
class EmptyResult:
    """A query that produced no suggestions, with the reason why."""

    word: str
    reason: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "word": self.word,
            "reason": self.reason,
            "detail": self.detail,
            "items": [],
        }


def _char_span(sentence: Sentence, start_tok: int, end_tok: int) -> tuple[int, int]:
    offset = sum(len(t.surface) for t in sentence.tokens[:start_tok])
    length = sum(len(t.surface) for t in sentence.tokens[start_tok:end_tok])
    return offset, offset + length


def candidate_span(sentence: Sentence, lemma: str) -> tuple[int, int] | None:
    """Character span of the lemma's realization in a candidate sentence.

    Tries a single token with that lemma, then a token run whose lemmas
    concatenate to it (compound keys), then a plain surface substring.
    """
    for i, t in enumerate(sentence.tokens):
        if t.lemma == lemma:
            return _char_span(sentence, i, i + 1)
    n = len(sentence.tokens)
    for i in range(n):
        acc = ""
        for j in range(i, n):
            acc += sentence.tokens[j].lemma
            if len(acc) > len(lemma):
                break
            if acc == lemma:
                return _char_span(sentence, i, j + 1)
    pos = sentence.surface.find(lemma)
    if pos >= 0:
        return pos, pos + len(lemma)
    return None


def rank_candidates(
    ids: Sequence[int],
    q: Query,
    lemma: QueryLemma,
    corpus: Sequence[Sentence],
    provider: EmbeddingProvider,
    difficulty_config: DifficultyConfig | None = None,
) -> list[ScoredCandidate]:
    """Score and sort candidates by quality (descending, ties by id).

    The context sentence itself is excluded.  A provider failure on one
    candidate drops it with a warning as long as a full window of scored
    candidates remains; otherwise the failure propagates.
    """
    span = token_span(q.word, q.context)
    if span is None:
        raise NotInContext(f"word {q.word!r} not found in context")
    ctx_start, ctx_end = _char_span(q.context, span[0], span[1])
    ctx_vec = provider.embed(
        SpanEmbeddingRequest(
            sentence_id=CONTEXT_SENTENCE_ID,
            surface=q.context.surface,
            span_start=ctx_start,
            span_end=ctx_end,
        )
    )

    ctx_norm = normalize_surface(q.context.surface)
    scored: list[ScoredCandidate] = []
    first_error: EmbeddingError | None = None
    dropped = 0
    for sid in ids:
        s = corpus[sid]
        if normalize_surface(s.surface) == ctx_norm:
            continue
        cspan = candidate_span(s, lemma.content_lemma)
        if cspan is None:
            log.warning("candidate %d lacks lemma %r, skipping", sid, lemma.content_lemma)
            continue
        try:
            vec = provider.embed(
                SpanEmbeddingRequest(
                    sentence_id=sid,
                    surface=s.surface,
                    span_start=cspan[0],
                    span_end=cspan[1],
                )
            )
        except EmbeddingError as err:
            dropped += 1
            if first_error is None:
                first_error = err
            log.warning("embedding failed for candidate %d: %s", sid, err)
            continue
        diff = difficulty_score(s.level, q.target_level, difficulty_config)
        sense = sense_similarity(ctx_vec, vec)
        scored.append(
            ScoredCandidate(
                sentence_id=sid,
                difficulty_score=diff,
                sense_score=sense,
                quality=quality_score(diff, sense),
            )
        )
    if dropped and len(scored) < q.window and first_error is not None:
        raise first_error
    scored.sort(key=lambda c: (-c.quality, c.sentence_id))
    return scored


def greedy_select(
    ranked: Sequence[ScoredCandidate],
    q: Query,
    lemma: QueryLemma,
    corpus: Sequence[Sentence],
) -> SuggestionList:
    """Diversify the top window of ranked candidates.

    Seeds the working list with the context sentence, then adds, k times,
    the candidate maximizing the combined diversity of the enlarged list.
    Ties fall to the higher-quality candidate, then the lower sentence id.
    Pairwise tree similarities are computed once for the whole window.
    """
    window = list(ranked[: q.window])
    sentences = [q.context] + [corpus[c.sentence_id] for c in window]
    sims = similarity_matrix([generalize_labels(s) for s in sentences])
    profiles = [ngram_profile(s) for s in sentences]

    selected: list[int] = [0]
    pool = list(range(1, len(sentences)))
    picks: list[ScoredCandidate] = []
    for step in range(q.k):
        if not pool:
            break
        best_pos = -1
        best_key: tuple[float, float, int] | None = None
        for pos in pool:
            cand = window[pos - 1]
            syn = diversity_from_similarities(sims, selected + [pos])
            lex = pooled_uniqueness([profiles[i] for i in selected + [pos]])
            combined = 0.5 * syn + 0.5 * lex
            key = (combined, cand.quality, -cand.sentence_id)
            if best_key is None or key > best_key:
                best_key = key
                best_pos = pos
        selected.append(best_pos)
        pool.remove(best_pos)
        picks.append(replace(window[best_pos - 1], selected_rank=step + 1))

    final_sentences = [q.context] + [corpus[c.sentence_id] for c in picks]
    return SuggestionList(
        word=q.word,
        lemma=lemma,
        target_level=q.target_level,
        items=tuple(
            Suggestion(sentence=corpus[c.sentence_id], scores=c) for c in picks
        ),
        diversity=combined_diversity(final_sentences),
        truncated=len(picks) < q.k,
    )


def suggest(
    q: Query,
    index: InvertedIndex,
    corpus: Sequence[Sentence],
    provider: EmbeddingProvider,
    difficulty_config: DifficultyConfig | None = None,
) -> SuggestionList | EmptyResult:
    """Full pipeline: lemmatize, look up, rank, diversify.

    Deterministic for fixed inputs and provider; lookup order does not
    affect the result.  Failures to resolve the word produce an
    :class:`EmptyResult` rather than an exception.
    """
    try:
        lemma = lemmatize_query(q.word, q.context)
    except NotInContext as err:
        return EmptyResult(word=q.word, reason="not_in_context", detail=str(err))
    except NoContentLemma as err:
        return EmptyResult(word=q.word, reason="no_content_lemma", detail=str(err))
    ids = lookup(index, lemma)
    if not ids:
        return EmptyResult(
            word=q.word,
            reason="no_candidates",
            detail=f"lemma {lemma.content_lemma!r} absent from index",
        )
    started = time.perf_counter()
    ranked = rank_candidates(ids, q, lemma, corpus, provider, difficulty_config)
    if not ranked:
        return EmptyResult(
            word=q.word,
            reason="no_candidates",
            detail="all candidates excluded or unscorable",
        )
    result = greedy_select(ranked, q, lemma, corpus)
    log.debug(
        "suggest(%r): %d candidates -> %d items in %.3fs",
        q.word,
        len(ids),
        len(result.items),
        time.perf_counter() - started,
    )
    return result
