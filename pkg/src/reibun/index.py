"""Lemma-keyed inverted index with compound-noun keys, query lemmatization and persistence.

Keys are dictionary forms of content words (NOUN, PROPN, VERB, ADJ, ADV)
plus one concatenated key per maximal run of two or more consecutive
NOUN/PROPN tokens, so compound nouns are retrievable as a unit.

The on-disk format is a JSON header followed by length-prefixed binary
postings and a trailing SHA-256 checksum; see docs/index-format.md.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CONTENT_UPOS, Sentence

__all__ = [
    "InvertedIndex",
    "QueryLemma",
    "IndexError_",
    "IndexFormatError",
    "NotInContext",
    "NoContentLemma",
    "lemma_keys",
    "build_index",
    "lemmatize_query",
    "lookup",
    "token_span",
    "save_index",
    "load_index",
    "corpus_fingerprint",
]

_MAGIC = b"RBNIDX\n"
_FORMAT_VERSION = 1

_COMPOUND_UPOS = frozenset(["NOUN", "PROPN"])


class IndexError_(ValueError):
    """Index build or lookup violated a precondition."""


class IndexFormatError(IndexError_):
    """Persisted index file is corrupt, truncated, or of an unknown version."""


class NotInContext(ValueError):
    """The query word does not occur (token-aligned) in the context sentence."""


class NoContentLemma(ValueError):
    """The query word covers only function tokens, so no index key exists."""


@dataclass(frozen=True, slots=True)
class QueryLemma:
    """Lemmatized query: a content lemma plus any trailing auxiliary lemmas.

    Only ``content_lemma`` is used for retrieval; the auxiliaries are kept for
    display (for instance a past-tense query keeps its tense marker visible).
    """

    content_lemma: str
    auxiliaries: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.content_lemma:
            raise ValueError("content_lemma must be non-empty")

    def display(self) -> str:
        return "+".join([self.content_lemma, *self.auxiliaries])


@dataclass
class InvertedIndex:
    postings: dict[str, list[int]] = field(default_factory=dict)
    doc_count: int = 0
    built_at: float = 0.0
    fingerprint: str = ""

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return (
            self.postings == other.postings
            and self.doc_count == other.doc_count
            and self.fingerprint == other.fingerprint
        )


def lemma_keys(s: Sentence) -> set[str]:
    """Index keys of one sentence: content lemmas plus compound-noun run keys."""
    keys = {t.lemma for t in s.tokens if t.upos in CONTENT_UPOS and t.lemma}
    run: list[str] = []
    for t in s.tokens:
        if t.upos in _COMPOUND_UPOS:
            run.append(t.lemma)
        else:
            if len(run) >= 2:
                keys.add("".join(run))
            run = []
    if len(run) >= 2:
        keys.add("".join(run))
    keys.discard("")
    return keys


def corpus_fingerprint(sentences: Sequence[Sentence]) -> str:
    h = hashlib.sha256()
    h.update(str(len(sentences)).encode())
    for s in sentences:
        h.update(b"\x00")
        h.update(s.surface.encode("utf-8"))
    return h.hexdigest()


def build_index(sentences: Sequence[Sentence]) -> InvertedIndex:
    """Build the inverted index over a corpus with dense 0-based sentence ids.

    Ids must be unique and lie in ``0..len(sentences)-1``; the loader assigns
    them in that form, and downstream lookups rely on ``id < doc_count``.
    """
    n = len(sentences)
    seen_ids: set[int] = set()
    postings: dict[str, list[int]] = {}
    for s in sentences:
        if s.id in seen_ids:
            raise IndexError_(f"duplicate sentence id {s.id}")
        if not 0 <= s.id < n:
            raise IndexError_(f"sentence id {s.id} outside 0..{n - 1}")
        seen_ids.add(s.id)
        for key in lemma_keys(s):
            postings.setdefault(key, []).append(s.id)
    for ids in postings.values():
        ids.sort()
    return InvertedIndex(
        postings=postings,
        doc_count=n,
        built_at=time.time(),
        fingerprint=corpus_fingerprint(sentences),
    )


def lookup(ix: InvertedIndex, q: QueryLemma) -> list[int]:
    return list(ix.postings.get(q.content_lemma, ()))


def lemmatize_query(word: str, context: Sentence) -> QueryLemma:
    """Resolve a surface query word against its context sentence.

    Finds the leftmost contiguous token span whose surfaces concatenate to
    ``word``.  The content lemma is taken from the span's head content token
    (the span token whose head lies outside the span, falling back to the last
    content token, which suits head-final Japanese); trailing AUX tokens of
    the span become the auxiliaries.
    """
    if not word:
        raise NotInContext("empty query word")
    span = _find_span(word, context)
    if span is None:
        raise NotInContext(f"word {word!r} not found in context {context.surface!r}")
    start, end = span

    content = [i for i in range(start, end) if context.tokens[i].upos in CONTENT_UPOS]
    if not content:
        raise NoContentLemma(f"word {word!r} covers only function tokens")

    head_idx = None
    for i in content:
        head = context.tokens[i].head
        if head < start or head >= end:
            head_idx = i
            break
    if head_idx is None:
        head_idx = content[-1]

    aux: list[str] = []
    for i in range(end - 1, start - 1, -1):
        if context.tokens[i].upos == "AUX":
            aux.append(context.tokens[i].lemma)
        else:
            break
    aux.reverse()

    return QueryLemma(content_lemma=context.tokens[head_idx].lemma, auxiliaries=tuple(aux))


def token_span(word: str, context: Sentence) -> tuple[int, int] | None:
    """Token range [start, end) of the word's occurrence, or None if misaligned."""
    return _find_span(word, context)


def _find_span(word: str, context: Sentence) -> tuple[int, int] | None:
    tokens = context.tokens
    target_len = len(word)
    for start in range(len(tokens)):
        acc = ""
        for end in range(start, len(tokens)):
            acc += tokens[end].surface
            if len(acc) > target_len:
                break
            if acc == word:
                return start, end + 1
    return None


# ---------------------------------------------------------------------------
# Persistence
#
# Layout: MAGIC, u32 header length, JSON header (version, doc_count,
# fingerprint, built_at, key_count), then per key: u32 key byte length, key
# bytes (UTF-8), u32 posting count, postings as u32 deltas (first id absolute).
# The file ends with the SHA-256 digest of everything before it.


def save_index(ix: InvertedIndex, path: str | Path) -> None:
    body = bytearray()
    body += _MAGIC
    header = json.dumps(
        {
            "version": _FORMAT_VERSION,
            "doc_count": ix.doc_count,
            "fingerprint": ix.fingerprint,
            "built_at": ix.built_at,
            "key_count": len(ix.postings),
        },
        ensure_ascii=True,
        sort_keys=True,
    ).encode("ascii")
    body += struct.pack("<I", len(header))
    body += header
    for key in sorted(ix.postings):
        ids = ix.postings[key]
        kb = key.encode("utf-8")
        body += struct.pack("<I", len(kb))
        body += kb
        body += struct.pack("<I", len(ids))
        prev = 0
        for i, doc in enumerate(ids):
            delta = doc if i == 0 else doc - prev
            body += struct.pack("<I", delta)
            prev = doc
    digest = hashlib.sha256(bytes(body)).digest()
    Path(path).write_bytes(bytes(body) + digest)


def load_index(path: str | Path) -> InvertedIndex:
    raw = Path(path).read_bytes()
    if len(raw) < len(_MAGIC) + 4 + 32:
        raise IndexFormatError("file too short to be an index")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise IndexFormatError("checksum mismatch: file is corrupt or truncated")
    if not body.startswith(_MAGIC):
        raise IndexFormatError("bad magic bytes")
    off = len(_MAGIC)
    (header_len,) = struct.unpack_from("<I", body, off)
    off += 4
    try:
        header = json.loads(body[off : off + header_len].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise IndexFormatError(f"unreadable header: {err}") from err
    off += header_len
    if header.get("version") != _FORMAT_VERSION:
        raise IndexFormatError(
            f"unsupported index version {header.get('version')!r}, expected {_FORMAT_VERSION}"
        )

    postings: dict[str, list[int]] = {}
    for _ in range(header["key_count"]):
        (key_len,) = struct.unpack_from("<I", body, off)
        off += 4
        key = body[off : off + key_len].decode("utf-8")
        off += key_len
        (count,) = struct.unpack_from("<I", body, off)
        off += 4
        ids: list[int] = []
        acc = 0
        for i in range(count):
            (delta,) = struct.unpack_from("<I", body, off)
            off += 4
            acc = delta if i == 0 else acc + delta
            ids.append(acc)
        postings[key] = ids
    if off != len(body):
        raise IndexFormatError("trailing bytes after postings")

    return InvertedIndex(
        postings=postings,
        doc_count=header["doc_count"],
        built_at=header.get("built_at", 0.0),
        fingerprint=header.get("fingerprint", ""),
    )


def index_keys_for_corpus(sentences: Iterable[Sentence]) -> dict[int, set[str]]:
    """Per-sentence key sets, mainly for diagnostics and tests."""
    return {s.id: lemma_keys(s) for s in sentences}
