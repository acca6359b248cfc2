"""Corpus-backed example-sentence suggestion for Japanese learners.

Given a target word, the sentence it appeared in, and the learner's JLPT
level, the engine retrieves candidate sentences containing the word's
dictionary form, scores them for difficulty fit and sense match, and greedily
picks a small set that is both high quality and mutually diverse.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .corpus import (
    FilterConfig,
    FilterReason,
    FilterVerdict,
    Level,
    Sentence,
    Source,
    Token,
    parse_conllu,
    serialize_conllu,
)
from .index import InvertedIndex, QueryLemma, build_index, lemmatize_query
from .selection import EmptyResult, Suggestion, SuggestionList, suggest

__all__ = [
    "__version__",
    "FilterConfig",
    "FilterReason",
    "FilterVerdict",
    "Level",
    "Sentence",
    "Source",
    "Token",
    "parse_conllu",
    "serialize_conllu",
    "InvertedIndex",
    "QueryLemma",
    "build_index",
    "lemmatize_query",
    "EmptyResult",
    "Suggestion",
    "SuggestionList",
    "suggest",
]
