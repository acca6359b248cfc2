"""Generative-baseline client and judge-protocol driver.

Talks to any chat-completion-style endpoint (or a scripted stub) to produce
example sentences for a target word, filtering duplicates and off-target
output across retry rounds.  The judge half renders an evaluation block,
collects several independent structured ratings, and reduces them by strict
majority, marking undecided items Unclear.
"""

from __future__ import annotations

import json
import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

from .corpus import Level

__all__ = [
    "GenerationConfig",
    "GenQuery",
    "GenerationResult",
    "GenerationError",
    "JudgeParseError",
    "SentenceRating",
    "SystemRating",
    "JudgeRating",
    "MajorityOutcome",
    "EvaluationBlock",
    "ChatEndpoint",
    "ScriptedEndpoint",
    "HttpChatEndpoint",
    "UNCLEAR",
    "GENERATION_TEMPLATE",
    "NUMBERED_LIST_SUFFIX",
    "build_prompt",
    "split_completion",
    "generate_examples",
    "make_block",
    "render_judge_prompt",
    "parse_judge_response",
    "judge_block",
    "majority_vote",
]

log = logging.getLogger(__name__)

UNCLEAR = "Unclear"

SENSE_VALUES = ("similar", "not_similar")
DIVERSITY_VALUES = ("Low", "Medium", "High")

GENERATION_TEMPLATE = (
    'write {k} {level} example sentences in japanese, that must contain the '
    'word "{word}" used in a similar sense as "{context}". following are '
    '{k} diverse sentences that must use "{word}": '
)

NUMBERED_LIST_SUFFIX = (
    "Provide sentences in Japanese in a numbered list, "
    "without any translation or romaji."
)


class GenerationError(RuntimeError):
    """The endpoint failed past the configured retries."""


class JudgeParseError(ValueError):
    """A judge response did not follow the structured rating contract."""


class ChatEndpoint(Protocol):
    def complete(
        self,
        prompt: str,
        *,
        temperature: float,
        repetition_penalty: float | None = None,
    ) -> str: ...


@dataclass(frozen=True, slots=True)
class GenerationConfig:
    temperature: float = 1.0
    repetition_penalty: float | None = None
    max_rounds: int = 4
    retries: int = 2
    numbered_list: bool = False

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(frozen=True, slots=True)
class GenQuery:
    word: str
    context: str
    level: Level
    k: int = 5

    def __post_init__(self) -> None:
        if not self.word:
            raise ValueError("target word must be non-empty")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True, slots=True)
class GenerationResult:
    sentences: tuple[str, ...]
    rounds: int
    truncated: bool

    def as_dict(self) -> dict:
        return {
            "sentences": list(self.sentences),
            "rounds": self.rounds,
            "truncated": self.truncated,
        }


def build_prompt(q: GenQuery, *, numbered_list: bool = False) -> str:
    prompt = GENERATION_TEMPLATE.format(
        k=q.k, level=q.level.name, word=q.word, context=q.context
    )
    if numbered_list:
        prompt += NUMBERED_LIST_SUFFIX
    return prompt


_LIST_PREFIX = re.compile(r"^\s*(?:[0-9０-９]+\s*[.)．）、:：]?\s*|[-・*•]\s*)+")
_SENTENCE_END = re.compile(r"(?<=[。！？])")


def split_completion(text: str) -> list[str]:
    """Completion text to candidate sentences: lines, then sentence enders."""
    out: list[str] = []
    for line in text.splitlines():
        line = _LIST_PREFIX.sub("", line.strip())
        for piece in _SENTENCE_END.split(line):
            piece = piece.strip()
            if piece:
                out.append(piece)
    return out


def _nfkc(text: str) -> str:
    return unicodedata.normalize("NFKC", text)


def generate_examples(
    q: GenQuery, cfg: GenerationConfig, endpoint: ChatEndpoint
) -> GenerationResult:
    """Request completions until k usable sentences are collected.

    Each round sends the same prompt; sentences that duplicate earlier ones
    or lack the target word are discarded.  Stops early once k sentences
    are held, or gives up (flagging truncation) after max_rounds.
    """
    prompt = build_prompt(q, numbered_list=cfg.numbered_list)
    target = _nfkc(q.word)
    collected: list[str] = []
    seen: set[str] = set()
    rounds = 0
    while rounds < cfg.max_rounds and len(collected) < q.k:
        raw = _complete_with_retries(endpoint, prompt, cfg)
        rounds += 1
        for sentence in split_completion(raw):
            norm = _nfkc(sentence)
            if norm in seen:
                continue
            if target not in norm:
                continue
            seen.add(norm)
            collected.append(sentence)
    return GenerationResult(
        sentences=tuple(collected[: q.k]),
        rounds=rounds,
        truncated=len(collected) < q.k,
    )


def _complete_with_retries(
    endpoint: ChatEndpoint, prompt: str, cfg: GenerationConfig
) -> str:
    last: Exception | None = None
    for attempt in range(cfg.retries + 1):
        try:
            return endpoint.complete(
                prompt,
                temperature=cfg.temperature,
                repetition_penalty=cfg.repetition_penalty,
            )
        except GenerationError:
            raise
        except Exception as err:  # endpoint transport errors
            last = err
            log.warning("completion attempt %d failed: %s", attempt + 1, err)
    raise GenerationError(f"endpoint failed after {cfg.retries + 1} attempts: {last}")


class ScriptedEndpoint:
    """Replays a fixed transcript of completions; records incoming prompts."""

    def __init__(self, transcript: Sequence[str]) -> None:
        self._transcript = list(transcript)
        self._cursor = 0
        self.prompts: list[str] = []

    def complete(
        self,
        prompt: str,
        *,
        temperature: float,
        repetition_penalty: float | None = None,
    ) -> str:
        self.prompts.append(prompt)
        if self._cursor >= len(self._transcript):
            raise GenerationError("scripted transcript exhausted")
        reply = self._transcript[self._cursor]
        self._cursor += 1
        return reply


class HttpChatEndpoint:
    """Minimal chat-completion client: one user message per request."""

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        auth_token: str | None = None,
        timeout: float = 60.0,
    ) -> None:
        self._base_url = base_url.rstrip("/")
        self._model = model
        self._auth_token = auth_token
        self._timeout = timeout

    def complete(
        self,
        prompt: str,
        *,
        temperature: float,
        repetition_penalty: float | None = None,
    ) -> str:
        import httpx

        payload: dict = {
            "model": self._model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        if repetition_penalty is not None:
            payload["repetition_penalty"] = repetition_penalty
        headers = {}
        if self._auth_token:
            headers["Authorization"] = f"Bearer {self._auth_token}"
        resp = httpx.post(
            self._base_url + "/v1/chat/completions",
            json=payload,
            headers=headers,
            timeout=self._timeout,
        )
        resp.raise_for_status()
        body = resp.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise GenerationError(f"malformed completion response: {err}") from err


# ---------------------------------------------------------------------------
# Judge protocol


@dataclass(frozen=True, slots=True)
class EvaluationBlock:
    """One rating unit: a query plus each system's suggested sentences.

    ``display_order`` is the seeded shuffle in which systems are shown to
    the judge, recorded so ratings can be mapped back.
    """

    word: str
    context: str
    target_level: Level
    systems: Mapping[str, tuple[str, ...]]
    display_order: tuple[str, ...]

    def __post_init__(self) -> None:
        if set(self.display_order) != set(self.systems):
            raise ValueError("display_order must permute the system ids")


def make_block(
    word: str,
    context: str,
    target_level: Level,
    system_outputs: Mapping[str, Sequence[str]],
    *,
    seed: int = 0,
) -> EvaluationBlock:
    order = sorted(system_outputs)
    random.Random(seed).shuffle(order)
    return EvaluationBlock(
        word=word,
        context=context,
        target_level=target_level,
        systems={k: tuple(v) for k, v in system_outputs.items()},
        display_order=tuple(order),
    )


JUDGE_INSTRUCTIONS = """\
This evaluation aims to rate and compare systems in providing good example sentences for learners of Japanese at different proficiency levels.
An annotation block consists of proposed sentences by the systems for a target word, a context sentence and a target difficulty level.
The lists of sentences are supposed to help language learners to see diverse examples of a target word in context.

Difficulty: Rate the difficulty of each sentence according to the JLPT (Japanese Language Proficiency Test) scale, where N1 is the most difficult and N5 is the easiest.
Indicate which level a sentence belongs to (one of N1, N2, N3, N4, N5). It is possible that for the target level, the system proposes a sentence that is of a different level (higher or lower).
Below is a summary of the proficiency levels.

Level | Description
N1    | Complex and abstract Japanese across various contexts.
N2    | Everyday Japanese in varied situations, with clear materials on different topics.
N3    | Japanese in common everyday situations.
N4    | Basic Japanese understanding, including familiar topics, basic vocabulary, and kanji.
N5    | Fundamental Japanese, including hiragana, katakana, and basic kanji.

Sense Similarity: Indicate if the target word in each sentence maintains a close sense as in the original context. Possible values: "similar", "not_similar".
Think broadly and intuitively, rather than strictly by dictionary definitions.

Reject: For each sentence, indicate "Reject" if you think the sentence is not good or useful (for example because it does not reflect natural use).

Sentence diversity: For each system output list, rate the sentences diversity, focusing on the amount of different uses of syntax and structure. Possible values: "Low", "Medium", "High".

System ranking: Rank the systems' outputs from best to worst, considering the overall usefulness of the example sentences for that word, for a language learner of that proficiency level.

Comment: Leave a short comment.
"""

JUDGE_RESPONSE_CONTRACT = """\
Respond with a single JSON object and nothing else, in this shape:
{
  "systems": {
    "<system id>": {
      "sentences": [
        {"difficulty": "N1|N2|N3|N4|N5", "sense": "similar|not_similar", "reject": true|false}
      ],
      "syntax_diversity": "Low|Medium|High"
    }
  },
  "ranking": ["<system id best first>", "..."],
  "comment": "<short comment>"
}
Rate every sentence of every system, in the order shown.
"""


@dataclass(frozen=True, slots=True)
class SentenceRating:
    difficulty: Level
    sense: str
    reject: bool

    def __post_init__(self) -> None:
        if self.sense not in SENSE_VALUES:
            raise ValueError(f"sense must be one of {SENSE_VALUES}")


@dataclass(frozen=True, slots=True)
class SystemRating:
    sentences: tuple[SentenceRating, ...]
    syntax_diversity: str

    def __post_init__(self) -> None:
        if self.syntax_diversity not in DIVERSITY_VALUES:
            raise ValueError(f"syntax_diversity must be one of {DIVERSITY_VALUES}")


@dataclass(frozen=True, slots=True)
class JudgeRating:
    systems: Mapping[str, SystemRating]
    ranking: tuple[str, ...]
    comment: str = ""


@dataclass(frozen=True, slots=True)
class MajorityOutcome:
    """Per-item strict-majority reduction of the valid votes.

    Unresolved items hold the ``Unclear`` marker.  ``n_valid`` counts the
    votes that parsed; invalid votes are excluded from every tally.
    """

    systems: Mapping[str, dict]
    ranking: tuple[str, ...] | str
    n_valid: int
    n_votes: int

    def as_dict(self) -> dict:
        return {
            "systems": {k: dict(v) for k, v in self.systems.items()},
            "ranking": list(self.ranking) if isinstance(self.ranking, tuple) else self.ranking,
            "n_valid": self.n_valid,
            "n_votes": self.n_votes,
        }


def render_judge_prompt(block: EvaluationBlock) -> str:
    lines = [
        JUDGE_INSTRUCTIONS,
        f'Target word: "{block.word}"',
        f'Context sentence: "{block.context}"',
        f"Target level: {block.target_level.name}",
        "",
    ]
    for sys_id in block.display_order:
        lines.append(f"System {sys_id}:")
        for i, sentence in enumerate(block.systems[sys_id], start=1):
            lines.append(f"{i}. {sentence}")
        lines.append("")
    lines.append(JUDGE_RESPONSE_CONTRACT)
    return "\n".join(lines)


_JSON_FENCE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)


def _extract_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    fenced = _JSON_FENCE.search(text)
    if fenced:
        try:
            return json.loads(fenced.group(1))
        except json.JSONDecodeError:
            pass
    start = text.find("{")
    if start >= 0:
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
    raise JudgeParseError("no JSON object found in judge response")


def parse_judge_response(text: str, block: EvaluationBlock) -> JudgeRating:
    """Validate one judge response against the block's shape."""
    body = _extract_json(text)
    if not isinstance(body, dict):
        raise JudgeParseError("judge response is not an object")
    raw_systems = body.get("systems")
    if not isinstance(raw_systems, dict) or set(raw_systems) != set(block.systems):
        raise JudgeParseError("systems keys do not match the block")
    systems: dict[str, SystemRating] = {}
    for sys_id, entry in raw_systems.items():
        if not isinstance(entry, dict):
            raise JudgeParseError(f"system {sys_id}: entry is not an object")
        raw_sentences = entry.get("sentences")
        expected = len(block.systems[sys_id])
        if not isinstance(raw_sentences, list) or len(raw_sentences) != expected:
            raise JudgeParseError(
                f"system {sys_id}: expected {expected} sentence ratings"
            )
        ratings = []
        for i, r in enumerate(raw_sentences):
            if not isinstance(r, dict):
                raise JudgeParseError(f"system {sys_id} sentence {i}: not an object")
            try:
                level = Level.parse(str(r["difficulty"]))
            except (KeyError, ValueError) as err:
                raise JudgeParseError(
                    f"system {sys_id} sentence {i}: bad difficulty"
                ) from err
            sense = str(r.get("sense", "")).replace(" ", "_")
            if sense not in SENSE_VALUES:
                raise JudgeParseError(f"system {sys_id} sentence {i}: bad sense")
            reject = r.get("reject")
            if not isinstance(reject, bool):
                raise JudgeParseError(f"system {sys_id} sentence {i}: bad reject")
            ratings.append(SentenceRating(difficulty=level, sense=sense, reject=reject))
        diversity = entry.get("syntax_diversity")
        if diversity not in DIVERSITY_VALUES:
            raise JudgeParseError(f"system {sys_id}: bad syntax_diversity")
        systems[sys_id] = SystemRating(
            sentences=tuple(ratings), syntax_diversity=diversity
        )
    ranking = body.get("ranking")
    if (
        not isinstance(ranking, list)
        or sorted(str(x) for x in ranking) != sorted(block.systems)
    ):
        raise JudgeParseError("ranking is not a permutation of the system ids")
    comment = str(body.get("comment", ""))
    return JudgeRating(
        systems=systems, ranking=tuple(str(x) for x in ranking), comment=comment
    )


def _strict_majority(values: Sequence) -> object:
    """The value held by more than half the votes, else the Unclear marker."""
    if not values:
        return UNCLEAR
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best, best_count = max(counts.items(), key=lambda kv: kv[1])
    if best_count * 2 > len(values):
        return best
    return UNCLEAR


def majority_vote(votes: Sequence[JudgeRating | None], block: EvaluationBlock) -> MajorityOutcome:
    """Reduce votes item by item; invalid (None) votes are excluded throughout."""
    valid = [v for v in votes if v is not None]
    if not valid:
        raise JudgeParseError("no valid judge votes to aggregate")
    systems: dict[str, dict] = {}
    for sys_id, sentences in block.systems.items():
        per_sentence = []
        for i in range(len(sentences)):
            ratings = [v.systems[sys_id].sentences[i] for v in valid]
            level = _strict_majority([r.difficulty for r in ratings])
            per_sentence.append(
                {
                    "difficulty": level.name if isinstance(level, Level) else level,
                    "sense": _strict_majority([r.sense for r in ratings]),
                    "reject": _strict_majority([r.reject for r in ratings]),
                }
            )
        systems[sys_id] = {
            "sentences": per_sentence,
            "syntax_diversity": _strict_majority(
                [v.systems[sys_id].syntax_diversity for v in valid]
            ),
        }
    rank_by_system = {}
    for sys_id in block.systems:
        positions = [v.ranking.index(sys_id) for v in valid]
        rank_by_system[sys_id] = _strict_majority(positions)
    if UNCLEAR in rank_by_system.values() or sorted(rank_by_system.values()) != list(
        range(len(block.systems))
    ):
        ranking: tuple[str, ...] | str = UNCLEAR
    else:
        ranking = tuple(sorted(rank_by_system, key=lambda s: rank_by_system[s]))
    return MajorityOutcome(
        systems=systems, ranking=ranking, n_valid=len(valid), n_votes=len(votes)
    )


def judge_block(
    block: EvaluationBlock,
    endpoint: ChatEndpoint,
    *,
    n_votes: int = 3,
    temperature: float = 1.0,
) -> tuple[list[JudgeRating | None], MajorityOutcome]:
    """Collect n independent judge ratings of a block plus their majority."""
    prompt = render_judge_prompt(block)
    votes: list[JudgeRating | None] = []
    for i in range(n_votes):
        try:
            reply = endpoint.complete(prompt, temperature=temperature)
            votes.append(parse_judge_response(reply, block))
        except (GenerationError, JudgeParseError) as err:
            log.warning("judge vote %d invalid: %s", i + 1, err)
            votes.append(None)
    return votes, majority_vote(votes, block)
