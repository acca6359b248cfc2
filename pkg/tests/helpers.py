"""Shared builders for tests: token/sentence factories and a synthetic corpus."""

from __future__ import annotations

import random

from reibun.corpus import ROOT, Level, Sentence, Source, Token

__all__ = [
    "tok",
    "sent",
    "conllu_block",
    "synth_corpus",
    "synth_context",
    "OBJ_NOUNS",
    "VERBS",
]


def tok(
    surface: str,
    lemma: str | None = None,
    upos: str = "NOUN",
    head: int = ROOT,
    deprel: str = "root",
) -> Token:
    return Token(
        surface=surface,
        lemma=lemma if lemma is not None else surface,
        upos=upos,
        head=head,
        deprel=deprel,
    )


def sent(
    tokens: list[Token],
    id: int = 0,
    source: Source = Source.OTHER,
    level: Level | None = None,
) -> Sentence:
    return Sentence(id=id, tokens=list(tokens), source=source, level=level)


def conllu_block(
    rows: list[tuple],
    level: str | None = None,
    source: str | None = None,
) -> str:
    """Rows of (form, lemma, upos, head_1based, deprel) to one CoNLL-U block."""
    lines = []
    if source:
        lines.append(f"# source = {source}")
    if level:
        lines.append(f"# level = {level}")
    for i, (form, lemma, upos, head, deprel) in enumerate(rows, start=1):
        lines.append(
            "\t".join([str(i), form, lemma, upos, "_", "_", str(head), deprel, "_", "_"])
        )
    return "\n".join(lines) + "\n"


TOPIC_NOUNS = [
    "先生", "学生", "友達", "父", "母", "兄", "姉", "医者", "店員", "子供",
    "彼", "彼女", "皆", "隣人", "同僚", "課長", "船長", "画家", "歌手", "作家",
]
OBJ_NOUNS = ["本", "水", "魚", "歌", "絵", "字", "音楽", "料理", "手紙", "写真"]
PLACE_NOUNS = ["学校", "家", "店", "駅", "公園", "会社", "図書館", "海", "山", "町"]
VERBS = ["読む", "買う", "見る", "作る", "聞く", "書く", "食べる", "運ぶ", "探す", "届ける"]
ADVERBS = ["ゆっくり", "すぐ", "たまに", "毎日", "時々", "丁寧に", "静かに", "真剣に"]
AUXES = ["ます", "た", "たい"]
LEVELS = [Level.N5, Level.N4, Level.N3, Level.N2, Level.N1]
SOURCES = [Source.JPWAC, Source.TATOEBA, Source.WIKIPEDIA]


def _build_sentence(rng: random.Random, sid: int, obj: str | None = None) -> Sentence:
    """One well-formed synthetic sentence: topic, optional extras, object, verb."""
    topic = rng.choice(TOPIC_NOUNS)
    obj = obj if obj is not None else rng.choice(OBJ_NOUNS)
    verb = rng.choice(VERBS)

    # rows: (surface, upos, deprel, head_ref); head_ref is "VERB", "ROOT",
    # or the row index of the head.
    rows: list[tuple[str, str, str, object]] = []
    rows.append((topic, "NOUN", "nsubj", "VERB"))
    rows.append(("は", "ADP", "case", len(rows) - 1))
    if rng.random() < 0.5:
        rows.append((rng.choice(PLACE_NOUNS), "NOUN", "obl", "VERB"))
        rows.append(("で", "ADP", "case", len(rows) - 1))
    if rng.random() < 0.4:
        rows.append((rng.choice(ADVERBS), "ADV", "advmod", "VERB"))
    rows.append((obj, "NOUN", "obj", "VERB"))
    rows.append(("を", "ADP", "case", len(rows) - 1))
    verb_idx = len(rows)
    rows.append((verb, "VERB", "root", "ROOT"))
    if rng.random() < 0.6:
        rows.append((rng.choice(AUXES), "AUX", "aux", "VERB"))
    if rng.random() < 0.3:
        rows.append((rng.choice(["よ", "ね"]), "PART", "mark", "VERB"))
    rows.append(("。", "PUNCT", "punct", "VERB"))

    tokens = []
    for surface, upos, deprel, head_ref in rows:
        if head_ref == "VERB":
            head = verb_idx
        elif head_ref == "ROOT":
            head = ROOT
        else:
            head = int(head_ref)
        tokens.append(
            Token(surface=surface, lemma=surface, upos=upos, head=head, deprel=deprel)
        )
    return Sentence(
        id=sid,
        tokens=tokens,
        source=rng.choice(SOURCES),
        level=rng.choice(LEVELS),
    )


def synth_corpus(n: int, seed: int = 0) -> list[Sentence]:
    """Deterministic synthetic corpus of n distinct well-formed sentences."""
    rng = random.Random(seed)
    out: list[Sentence] = []
    seen: set[str] = set()
    while len(out) < n:
        s = _build_sentence(rng, sid=len(out))
        if s.surface in seen:
            continue
        seen.add(s.surface)
        out.append(s)
    return out


def synth_context(word: str, verb: str = "見つける") -> Sentence:
    """A context sentence (watashi wa WORD wo VERB.) with the word as object."""
    tokens = [
        Token(surface="私", lemma="私", upos="PRON", head=4, deprel="nsubj"),
        Token(surface="は", lemma="は", upos="ADP", head=0, deprel="case"),
        Token(surface=word, lemma=word, upos="NOUN", head=4, deprel="obj"),
        Token(surface="を", lemma="を", upos="ADP", head=2, deprel="case"),
        Token(surface=verb, lemma=verb, upos="VERB", head=ROOT, deprel="root"),
        Token(surface="。", lemma="。", upos="PUNCT", head=4, deprel="punct"),
    ]
    return Sentence(id=10**9, tokens=tokens, source=Source.OTHER, level=None)


def random_labeled_tree(rng, max_nodes=8, n_labels=4):
    """Random tree for kernel tests: node i>0 hangs off a random earlier node."""
    from reibun.diversity import LabeledTree

    n = rng.randint(1, max_nodes)
    labels = [f"L{rng.randrange(n_labels)}" for _ in range(n)]
    children = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append(i)
    return LabeledTree(labels=labels, children=children, root=0)
