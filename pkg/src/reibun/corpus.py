"""Sentence data model, CoNLL-U ingestion, well-formedness filtering and corpus statistics.

The corpus is a flat list of dependency-parsed Japanese sentences.  Sentences
arrive as CoNLL-U blocks (10 tab-separated columns, blank-line separated,
``#``-prefixed comments), optionally annotated with a JLPT level and a source
tag via ``# level = N3`` / ``# source = tatoeba`` comments.

Japanese text is unspaced, so the surface form of a sentence is defined as the
concatenation of its token surfaces with no separators.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from io import StringIO
from typing import IO, Iterable, Iterator, Union

__all__ = [
    "ROOT",
    "Level",
    "Source",
    "Token",
    "Sentence",
    "FilterReason",
    "FilterVerdict",
    "FilterConfig",
    "CorpusStats",
    "StatsBucket",
    "ConlluParseError",
    "ParseIssue",
    "parse_conllu",
    "parse_conllu_report",
    "serialize_conllu",
    "well_formed",
    "dedup",
    "apply_filters",
    "corpus_stats",
    "normalize_surface",
    "kanji_ratio",
]

# Sentinel head index for the root token.
ROOT = -1

UPOS_TAGS = frozenset(
    [
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    ]
)

CONTENT_UPOS = frozenset(["NOUN", "PROPN", "VERB", "ADJ", "ADV"])

#: UPOS tags counted by the punctuation/numeral ratio filter.
COUNTABLE_UPOS = frozenset(["PUNCT", "NUM", "SYM"])

#: UPOS tags accepted as a sentence-final predicate.
PREDICATE_UPOS = frozenset(["VERB", "ADJ", "AUX"])

DEFAULT_FINAL_PARTICLES = frozenset(["よ", "ね"])


class Level(IntEnum):
    """JLPT proficiency level, ordered easiest (N5) to hardest (N1).

    The integer value is the difficulty rank: N5 is 1, N1 is 5.
    """

    N5 = 1
    N4 = 2
    N3 = 3
    N2 = 4
    N1 = 5

    @property
    def rank(self) -> int:
        return int(self)

    @classmethod
    def parse(cls, text: str) -> "Level":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown JLPT level: {text!r}") from None


#: Canonical easiest-to-hardest label scale, for ordinal-to-numeric mapping.
LEVEL_SCALE = (Level.N5, Level.N4, Level.N3, Level.N2, Level.N1)


class Source(str, Enum):
    JPWAC = "jpwac"
    TATOEBA = "tatoeba"
    WIKIPEDIA = "wikipedia"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "Source":
        try:
            return cls(text.strip().lower())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True, slots=True)
class Token:
    """One token of a dependency-parsed sentence.

    ``head`` is the 0-based index of the head token, or :data:`ROOT` for the
    sentence root.
    """

    surface: str
    lemma: str
    upos: str
    head: int
    deprel: str


@dataclass(slots=True)
class Sentence:
    id: int
    tokens: list[Token]
    source: Source = Source.OTHER
    level: Level | None = None

    @property
    def surface(self) -> str:
        return "".join(t.surface for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def root_index(self) -> int:
        for i, tok in enumerate(self.tokens):
            if tok.head == ROOT:
                return i
        raise ValueError(f"sentence {self.id} has no root token")


class FilterReason(str, Enum):
    OK = "Ok"
    TOO_SHORT = "TooShort"
    TOO_LONG = "TooLong"
    EXCESS_PUNCT_NUM = "ExcessPunctNum"
    FOREIGN_SCRIPT = "ForeignScript"
    BAD_ENDING = "BadEnding"
    DUPLICATE = "Duplicate"


@dataclass(frozen=True, slots=True)
class FilterVerdict:
    accepted: bool
    reason: FilterReason

    def __post_init__(self) -> None:
        if self.accepted != (self.reason is FilterReason.OK):
            raise ValueError("accepted flag must mirror reason == Ok")


_OK = FilterVerdict(True, FilterReason.OK)


@dataclass(frozen=True)
class FilterConfig:
    """Tunables of the well-formedness filter.

    Token count bounds are inclusive; the punctuation/numeral ratio bound is
    strict (a sentence with a ratio exactly at the bound is rejected).
    """

    min_tokens: int = 5
    max_tokens: int = 50
    max_punct_num_ratio: float = 0.20
    final_particles: frozenset[str] = DEFAULT_FINAL_PARTICLES


# ---------------------------------------------------------------------------
# CoNLL-U parsing

_N_COLUMNS = 10


@dataclass(frozen=True, slots=True)
class ParseIssue:
    line_no: int
    message: str


class ConlluParseError(ValueError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _as_lines(source: Union[str, IO[str]]) -> Iterator[str]:
    if isinstance(source, str):
        source = StringIO(source)
    return iter(source)


def parse_conllu_report(source: Union[str, IO[str]]) -> tuple[list[Sentence], list[ParseIssue]]:
    """Parse CoNLL-U input, collecting one issue per malformed sentence block.

    A block with any malformed line (wrong column count, non-integer HEAD, head
    out of range, no or multiple roots, cyclic heads) is dropped as a whole and
    reported with the first offending line number.  Sentence ids are assigned
    sequentially, 0-based, over the successfully parsed blocks.  Lines whose ID
    column is a multiword range (``1-2``) or an empty node (``1.1``) are not
    syntactic nodes and are skipped.
    """
    sentences: list[Sentence] = []
    issues: list[ParseIssue] = []

    block: list[tuple[int, str]] = []  # (line_no, raw token line)
    level: Level | None = None
    source_tag = Source.OTHER

    def flush() -> None:
        nonlocal block, level, source_tag
        if block:
            try:
                tokens = _parse_block(block)
                sentences.append(
                    Sentence(id=len(sentences), tokens=tokens, source=source_tag, level=level)
                )
            except ConlluParseError as err:
                issues.append(ParseIssue(err.line_no, str(err)))
        block = []
        level = None
        source_tag = Source.OTHER

    for line_no, raw in enumerate(_as_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                key = key.strip().lower()
                if key == "level":
                    try:
                        level = Level.parse(value)
                    except ValueError:
                        issues.append(ParseIssue(line_no, f"line {line_no}: bad level comment {value.strip()!r}"))
                elif key == "source":
                    source_tag = Source.parse(value)
            continue
        block.append((line_no, line))
    flush()

    return sentences, issues


def parse_conllu(source: Union[str, IO[str]], on_error: str = "raise") -> list[Sentence]:
    """Parse CoNLL-U input into sentences.

    ``on_error`` selects the policy for malformed blocks: ``"raise"`` aborts on
    the first bad block, ``"skip"`` drops bad blocks and keeps going.
    """
    if on_error not in ("raise", "skip"):
        raise ValueError(f"on_error must be 'raise' or 'skip', not {on_error!r}")
    sentences, issues = parse_conllu_report(source)
    if issues and on_error == "raise":
        first = issues[0]
        raise ConlluParseError(first.message.split(": ", 1)[-1], first.line_no)
    return sentences


def _parse_block(block: list[tuple[int, str]]) -> list[Token]:
    rows: list[tuple[int, list[str]]] = []
    for line_no, line in block:
        cols = line.split("\t")
        if len(cols) != _N_COLUMNS:
            raise ConlluParseError(
                f"expected {_N_COLUMNS} tab-separated columns, got {len(cols)}", line_no
            )
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            # Multiword range / empty node rows carry no head of their own.
            continue
        rows.append((line_no, cols))

    if not rows:
        raise ConlluParseError("block has no token lines", block[0][0])

    n = len(rows)
    tokens: list[Token] = []
    root_seen = False
    for line_no, cols in rows:
        form, lemma, upos = cols[1], cols[2], cols[3]
        if not form or form == "_":
            raise ConlluParseError("empty FORM column", line_no)
        if not lemma or lemma == "_":
            lemma = form
        try:
            head_col = int(cols[6])
        except ValueError:
            raise ConlluParseError(f"non-integer HEAD {cols[6]!r}", line_no) from None
        if head_col < 0 or head_col > n:
            raise ConlluParseError(f"HEAD {head_col} out of range 0..{n}", line_no)
        if head_col == 0:
            if root_seen:
                raise ConlluParseError("multiple root tokens in sentence", line_no)
            root_seen = True
            head = ROOT
        else:
            head = head_col - 1
        tokens.append(Token(surface=form, lemma=lemma, upos=upos, head=head, deprel=cols[7]))

    first_line = rows[0][0]
    if not root_seen:
        raise ConlluParseError("sentence has no root token", first_line)
    _check_single_tree(tokens, first_line)
    return tokens


def _check_single_tree(tokens: list[Token], line_no: int) -> None:
    # Every token has exactly one head and exactly one is ROOT, so the head
    # graph is a tree iff no token chain loops before reaching the root.
    for start in range(len(tokens)):
        seen = set()
        cur = start
        while cur != ROOT:
            if cur in seen:
                raise ConlluParseError("cyclic head chain", line_no)
            seen.add(cur)
            cur = tokens[cur].head


def serialize_conllu(sentences: Iterable[Sentence]) -> str:
    """Write sentences back to CoNLL-U, including level/source comments."""
    out: list[str] = []
    for s in sentences:
        if s.source is not Source.OTHER:
            out.append(f"# source = {s.source.value}")
        if s.level is not None:
            out.append(f"# level = {s.level.name}")
        for i, tok in enumerate(s.tokens):
            head_col = 0 if tok.head == ROOT else tok.head + 1
            out.append(
                "\t".join(
                    [
                        str(i + 1),
                        tok.surface,
                        tok.lemma,
                        tok.upos,
                        "_",
                        "_",
                        str(head_col),
                        tok.deprel,
                        "_",
                        "_",
                    ]
                )
            )
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# Script and character classes

# Codepoint ranges, inclusive.  Latin includes the fullwidth forms; ASCII
# digits and punctuation are script-neutral and intentionally absent.
_LATIN_RANGES = (
    (0x0041, 0x005A),
    (0x0061, 0x007A),
    (0x00C0, 0x00D6),
    (0x00D8, 0x00F6),
    (0x00F8, 0x024F),
    (0x1E00, 0x1EFF),
    (0x2C60, 0x2C7F),
    (0xA720, 0xA7FF),
    (0xFF21, 0xFF3A),
    (0xFF41, 0xFF5A),
)
_CYRILLIC_RANGES = (
    (0x0400, 0x04FF),
    (0x0500, 0x052F),
    (0x1C80, 0x1C8F),
    (0x2DE0, 0x2DFF),
    (0xA640, 0xA69F),
)
_ARABIC_RANGES = (
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0x08A0, 0x08FF),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
)
_FOREIGN_RANGES = _LATIN_RANGES + _CYRILLIC_RANGES + _ARABIC_RANGES

# CJK Unified Ideographs blocks (URO plus extensions A..H).
_KANJI_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2B73F),
    (0x2B740, 0x2B81F),
    (0x2B820, 0x2CEAF),
    (0x2CEB0, 0x2EBEF),
    (0x30000, 0x3134F),
    (0x31350, 0x323AF),
)


def _in_ranges(ch: str, ranges: tuple[tuple[int, int], ...]) -> bool:
    cp = ord(ch)
    for lo, hi in ranges:
        if lo <= cp <= hi:
            return True
    return False


def _has_foreign_script(text: str) -> bool:
    return any(_in_ranges(ch, _FOREIGN_RANGES) for ch in text)


def _is_kanji(ch: str) -> bool:
    return _in_ranges(ch, _KANJI_RANGES)


def normalize_surface(text: str) -> str:
    """Deduplication key: NFKC normalization collapses width and compatibility variants."""
    return unicodedata.normalize("NFKC", text)


# ---------------------------------------------------------------------------
# Well-formedness filter

def well_formed(s: Sentence, config: FilterConfig = FilterConfig()) -> FilterVerdict:
    """Check one sentence against the well-formedness rules.

    Rules are evaluated in a fixed order (length, punct/numeral ratio, foreign
    script, sentence ending) so the reported reason is deterministic.  The
    function is total: it never raises on parsed input.
    """
    n = len(s.tokens)
    if n < config.min_tokens:
        return FilterVerdict(False, FilterReason.TOO_SHORT)
    if n > config.max_tokens:
        return FilterVerdict(False, FilterReason.TOO_LONG)

    countable = sum(1 for t in s.tokens if t.upos in COUNTABLE_UPOS)
    if countable / n >= config.max_punct_num_ratio:
        return FilterVerdict(False, FilterReason.EXCESS_PUNCT_NUM)

    if _has_foreign_script(s.surface):
        return FilterVerdict(False, FilterReason.FOREIGN_SCRIPT)

    if not _acceptable_ending(s, config):
        return FilterVerdict(False, FilterReason.BAD_ENDING)

    return _OK


def _acceptable_ending(s: Sentence, config: FilterConfig) -> bool:
    # Trailing punctuation is stripped first; the sentence then has to end in
    # a predicate or in an allowed sentence-final particle.
    idx = len(s.tokens) - 1
    while idx >= 0 and s.tokens[idx].upos == "PUNCT":
        idx -= 1
    if idx < 0:
        return False
    last = s.tokens[idx]
    if last.upos in PREDICATE_UPOS:
        return True
    return last.upos == "PART" and last.surface in config.final_particles


def dedup(sentences: Iterable[Sentence]) -> Iterator[Sentence]:
    """Drop later sentences whose NFKC-normalized surface was already seen.

    The first occurrence wins and relative order is preserved.
    """
    seen: set[str] = set()
    for s in sentences:
        key = normalize_surface(s.surface)
        if key in seen:
            continue
        seen.add(key)
        yield s


def apply_filters(
    sentences: Iterable[Sentence], config: FilterConfig = FilterConfig()
) -> Iterator[tuple[Sentence, FilterVerdict]]:
    """Run the full filter pipeline, yielding every sentence with its verdict.

    Well-formedness rules run first; deduplication runs last and only over
    sentences that passed them, so a rejected duplicate reports its
    well-formedness reason, not Duplicate.
    """
    seen: set[str] = set()
    for s in sentences:
        verdict = well_formed(s, config)
        if verdict.accepted:
            key = normalize_surface(s.surface)
            if key in seen:
                verdict = FilterVerdict(False, FilterReason.DUPLICATE)
            else:
                seen.add(key)
        yield s, verdict


# ---------------------------------------------------------------------------
# Corpus statistics

@dataclass(slots=True)
class StatsBucket:
    sentence_count: int = 0
    avg_tokens: float = 0.0
    kanji_ratio: float = 0.0

    # running sums, not part of the reported payload
    _token_sum: int = 0
    _kanji_chars: int = 0
    _total_chars: int = 0

    def add(self, s: Sentence) -> None:
        self.sentence_count += 1
        self._token_sum += len(s.tokens)
        for ch in s.surface:
            if ch.isspace():
                continue
            self._total_chars += 1
            if _is_kanji(ch):
                self._kanji_chars += 1

    def finalize(self) -> None:
        self.avg_tokens = self._token_sum / self.sentence_count if self.sentence_count else 0.0
        self.kanji_ratio = self._kanji_chars / self._total_chars if self._total_chars else 0.0

    def as_dict(self) -> dict:
        return {
            "sentence_count": self.sentence_count,
            "avg_tokens": self.avg_tokens,
            "kanji_ratio": self.kanji_ratio,
        }


@dataclass(slots=True)
class CorpusStats:
    sentence_count: int
    avg_tokens: float
    kanji_ratio: float
    per_source: dict[str, StatsBucket] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "sentence_count": self.sentence_count,
            "avg_tokens": self.avg_tokens,
            "kanji_ratio": self.kanji_ratio,
            "per_source": {k: v.as_dict() for k, v in sorted(self.per_source.items())},
        }


def kanji_ratio(text: str) -> float:
    """Share of kanji among the non-whitespace characters of ``text``."""
    total = 0
    kanji = 0
    for ch in text:
        if ch.isspace():
            continue
        total += 1
        if _is_kanji(ch):
            kanji += 1
    return kanji / total if total else 0.0


def corpus_stats(sentences: Iterable[Sentence]) -> CorpusStats:
    """Sentence count, mean token count and kanji character ratio, overall and per source.

    An empty stream yields zero counts with ratios defined as 0.
    """
    overall = StatsBucket()
    per_source: dict[str, StatsBucket] = {}
    for s in sentences:
        overall.add(s)
        per_source.setdefault(s.source.value, StatsBucket()).add(s)
    overall.finalize()
    for bucket in per_source.values():
        bucket.finalize()
    return CorpusStats(
        sentence_count=overall.sentence_count,
        avg_tokens=overall.avg_tokens,
        kanji_ratio=overall.kanji_ratio,
        per_source=per_source,
    )
