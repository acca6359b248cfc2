"""Engine: immutable corpus + index + providers wired from one config.

Built once at startup and shared across requests; every public method is
read-only with respect to engine state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .config import EngineConfig
from .corpus import (
    ConlluParseError,
    FilterConfig,
    Level,
    Sentence,
    corpus_stats,
    parse_conllu,
)
from .index import InvertedIndex, IndexError_, build_index, load_index
from .scoring import (
    DeterministicStubProvider,
    DifficultyConfig,
    EmbeddingProvider,
    PrecomputedFileProvider,
    RemoteAnnotatorProvider,
)
from .selection import EmptyResult, Query, SuggestionList, suggest

__all__ = ["Engine", "RawContextError"]

log = logging.getLogger(__name__)


class RawContextError(ValueError):
    """Raw-text context given but no annotator is configured to parse it."""


@dataclass(frozen=True)
class Engine:
    config: EngineConfig
    corpus: tuple[Sentence, ...]
    index: InvertedIndex
    provider: EmbeddingProvider

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        config.validate()
        if not config.corpus_path:
            raise FileNotFoundError("no corpus path configured")
        corpus_file = Path(config.corpus_path)
        if not corpus_file.exists():
            raise FileNotFoundError(f"corpus file not found: {corpus_file}")
        with open(corpus_file, encoding="utf-8") as fh:
            corpus = tuple(parse_conllu(fh))
        log.info("loaded %d sentences from %s", len(corpus), corpus_file)

        if config.index_path and Path(config.index_path).exists():
            index = load_index(config.index_path)
            fresh = build_index(corpus)
            if index.fingerprint != fresh.fingerprint:
                raise IndexError_(
                    f"index {config.index_path} was built over a different corpus; rebuild it"
                )
        else:
            index = build_index(corpus)

        provider = _build_provider(config)
        return cls(config=config, corpus=corpus, index=index, provider=provider)

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            min_tokens=self.config.min_tokens,
            max_tokens=self.config.max_tokens,
            max_punct_num_ratio=self.config.max_punct_num_ratio,
            final_particles=frozenset(self.config.final_particles),
        )

    def difficulty_config(self) -> DifficultyConfig:
        return DifficultyConfig(
            penalty_easier=self.config.penalty_easier,
            penalty_harder=self.config.penalty_harder,
        )

    def resolve_context(self, context: str) -> Sentence:
        """Context string to Sentence: CoNLL-U parses locally, raw text needs help.

        The engine ships no morphological analyzer of its own, so plain text
        can only be parsed by a configured annotator service.
        """
        if _looks_like_conllu(context):
            sentences = parse_conllu(context)
            if not sentences:
                raise ConlluParseError("context contained no sentences", line_no=0)
            return sentences[0]
        if self.config.annotator_url:
            return self._parse_remote(context)
        raise RawContextError(
            "context is not CoNLL-U and no annotator URL is configured; "
            "supply a parsed context or set embeddings.url"
        )

    def _parse_remote(self, text: str) -> Sentence:
        import httpx

        resp = httpx.post(
            self.config.annotator_url.rstrip("/") + "/parse",
            json={"text": text},
            timeout=self.config.timeout,
        )
        resp.raise_for_status()
        conllu = resp.json().get("conllu", "")
        sentences = parse_conllu(conllu)
        if not sentences:
            raise ConlluParseError("annotator returned no sentences", line_no=0)
        return sentences[0]

    def suggest(
        self,
        word: str,
        context: Sentence | str,
        level: Level | str,
        k: int | None = None,
        window: int | None = None,
    ) -> SuggestionList | EmptyResult:
        if isinstance(context, str):
            context = self.resolve_context(context)
        if isinstance(level, str):
            level = Level.parse(level)
        q = Query(
            word=word,
            context=context,
            target_level=level,
            k=k if k is not None else self.config.k,
            window=window if window is not None else self.config.window,
        )
        return suggest(
            q, self.index, self.corpus, self.provider, self.difficulty_config()
        )

    def stats(self) -> dict:
        stats = corpus_stats(self.corpus)
        return {
            "corpus": stats.as_dict(),
            "index": {
                "keys": len(self.index.postings),
                "doc_count": self.index.doc_count,
                "fingerprint": self.index.fingerprint,
            },
            "embeddings_mode": self.config.embeddings_mode,
        }

    def health(self) -> dict:
        return {"status": "ok", "index_sentences": self.index.doc_count}


def _looks_like_conllu(text: str) -> bool:
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        first, _, _ = line.partition("\t")
        return first.isdigit() or ("-" in first or "." in first)
    return False


def _build_provider(config: EngineConfig) -> EmbeddingProvider:
    if config.embeddings_mode == "stub":
        return DeterministicStubProvider(dimension=config.embedding_dim)
    if config.embeddings_mode == "precomputed":
        return PrecomputedFileProvider(config.embeddings_path)
    return RemoteAnnotatorProvider(
        config.annotator_url,
        dimension=config.embedding_dim,
        timeout=config.timeout,
        max_concurrency=config.max_concurrency,
    )


def sentences_from_file(path: str | Path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh)


def corpus_subset(corpus: Sequence[Sentence], ids: Sequence[int]) -> list[Sentence]:
    return [corpus[i] for i in ids]
