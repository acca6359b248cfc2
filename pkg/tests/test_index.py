"""Inverted index: keys, build, lookup, lemmatization, persistence."""

from __future__ import annotations

import random

import pytest

from helpers import sent, synth_corpus, tok
from oracles import lemma_keys_oracle, linear_scan
from reibun.corpus import ROOT
from reibun.index import (
    IndexError_,
    IndexFormatError,
    InvertedIndex,
    NoContentLemma,
    NotInContext,
    QueryLemma,
    build_index,
    lemma_keys,
    lemmatize_query,
    load_index,
    lookup,
    save_index,
    token_span,
)


class TestLemmaKeys:
    def test_content_tokens_only(self):
        s = sent(
            [
                tok("猫", upos="NOUN", head=2, deprel="nsubj"),
                tok("が", upos="PART", head=0, deprel="case"),
                tok("食べる", upos="VERB", head=ROOT, deprel="root"),
                tok("た", upos="AUX", head=2, deprel="aux"),
            ]
        )
        assert lemma_keys(s) == {"猫", "食べる"}

    def test_compound_noun_run(self):
        s = sent(
            [
                tok("日本", upos="NOUN", head=1, deprel="compound"),
                tok("語", upos="NOUN", head=2, deprel="nsubj"),
                tok("難しい", upos="ADJ", head=ROOT, deprel="root"),
            ]
        )
        assert lemma_keys(s) == {"日本", "語", "難しい", "日本語"}

    def test_all_function_tokens(self):
        s = sent(
            [
                tok("は", upos="PART", head=1, deprel="case"),
                tok("を", upos="PART", head=ROOT, deprel="root"),
            ]
        )
        assert lemma_keys(s) == set()

    def test_run_broken_by_function_token(self):
        s = sent(
            [
                tok("日本", upos="NOUN", head=3, deprel="nsubj"),
                tok("の", upos="ADP", head=0, deprel="case"),
                tok("語", upos="NOUN", head=3, deprel="obj"),
                tok("学ぶ", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        assert "日本語" not in lemma_keys(s)

    def test_three_token_run_is_one_key(self):
        s = sent(
            [
                tok("東京", upos="PROPN", head=3, deprel="compound"),
                tok("大学", upos="NOUN", head=3, deprel="compound"),
                tok("生", upos="NOUN", head=3, deprel="nsubj"),
                tok("学ぶ", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        keys = lemma_keys(s)
        assert "東京大学生" in keys
        assert "東京大学" not in keys  # only maximal runs produce keys

    def test_matches_oracle_on_synth_corpus(self):
        for s in synth_corpus(50, seed=7):
            assert lemma_keys(s) == lemma_keys_oracle(s)


class TestBuildIndex:
    def test_empty_corpus(self):
        ix = build_index([])
        assert ix.doc_count == 0
        assert ix.postings == {}

    def test_shared_lemma_sorted(self):
        a = sent([tok("見る", upos="VERB")], id=0)
        b = sent([tok("見る", upos="VERB")], id=1)
        ix = build_index([a, b])
        assert ix.postings["見る"] == [0, 1]

    def test_duplicate_id_rejected(self):
        a = sent([tok("山")], id=0)
        b = sent([tok("川")], id=0)
        with pytest.raises(IndexError_):
            build_index([a, b])

    def test_non_dense_ids_rejected(self):
        a = sent([tok("山")], id=5)
        with pytest.raises(IndexError_):
            build_index([a])

    def test_postings_ignore_input_order(self):
        corpus = synth_corpus(120, seed=3)
        shuffled = list(corpus)
        random.Random(9).shuffle(shuffled)
        assert build_index(corpus).postings == build_index(shuffled).postings

    def test_postings_match_linear_scan(self):
        corpus = synth_corpus(200, seed=5)
        ix = build_index(corpus)
        for key in list(ix.postings)[:30]:
            assert ix.postings[key] == linear_scan(corpus, key)
        # and keys the index lacks yield nothing under the oracle
        assert linear_scan(corpus, "存在しない語") == []


class TestLookup:
    def test_present_and_absent(self):
        corpus = [sent([tok("海", upos="NOUN")], id=0)]
        ix = build_index(corpus)
        assert lookup(ix, QueryLemma("海")) == [0]
        assert lookup(ix, QueryLemma("山")) == []

    def test_lookup_returns_copy(self):
        corpus = [sent([tok("海", upos="NOUN")], id=0)]
        ix = build_index(corpus)
        got = lookup(ix, QueryLemma("海"))
        got.append(99)
        assert lookup(ix, QueryLemma("海")) == [0]


class TestLemmatizeQuery:
    def _taberu_context(self):
        return sent(
            [
                tok("魚", upos="NOUN", head=2, deprel="obj"),
                tok("を", upos="ADP", head=0, deprel="case"),
                tok("食べ", lemma="食べる", upos="VERB", head=ROOT, deprel="root"),
                tok("た", upos="AUX", head=2, deprel="aux"),
            ]
        )

    def test_inflected_verb_with_auxiliary(self):
        q = lemmatize_query("食べた", self._taberu_context())
        assert q.content_lemma == "食べる"
        assert q.auxiliaries == ("た",)
        assert q.display() == "食べる+た"

    def test_single_noun(self):
        q = lemmatize_query("魚", self._taberu_context())
        assert q.content_lemma == "魚"
        assert q.auxiliaries == ()

    def test_absent_word(self):
        with pytest.raises(NotInContext):
            lemmatize_query("犬", self._taberu_context())

    def test_substring_not_token_aligned(self):
        s = sent(
            [
                tok("日本", upos="NOUN", head=2, deprel="compound"),
                tok("語学", upos="NOUN", head=ROOT, deprel="root"),
                tok("好き", upos="ADJ", head=1, deprel="amod"),
            ]
        )
        assert "本語" in s.surface
        with pytest.raises(NotInContext):
            lemmatize_query("本語", s)

    def test_function_only_span(self):
        s = sent(
            [
                tok("魚", upos="NOUN", head=2, deprel="obj"),
                tok("を", upos="ADP", head=0, deprel="case"),
                tok("食べる", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        with pytest.raises(NoContentLemma):
            lemmatize_query("を", s)

    def test_empty_word(self):
        with pytest.raises(NotInContext):
            lemmatize_query("", self._taberu_context())

    def test_leftmost_occurrence_wins(self):
        s = sent(
            [
                tok("山", upos="NOUN", head=3, deprel="nsubj"),
                tok("と", upos="ADP", head=0, deprel="case"),
                tok("山", lemma="山岳", upos="NOUN", head=3, deprel="obj"),
                tok("登る", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        q = lemmatize_query("山", s)
        assert q.content_lemma == "山"

    def test_head_content_token_selected(self):
        s = sent(
            [
                tok("勉強", upos="NOUN", head=1, deprel="compound"),
                tok("する", upos="VERB", head=ROOT, deprel="root"),
                tok("人", upos="NOUN", head=1, deprel="nsubj"),
            ]
        )
        q = lemmatize_query("勉強する", s)
        assert q.content_lemma == "する"

    def test_two_auxiliaries(self):
        s = sent(
            [
                tok("食べ", lemma="食べる", upos="VERB", head=ROOT, deprel="root"),
                tok("られ", lemma="られる", upos="AUX", head=0, deprel="aux"),
                tok("た", upos="AUX", head=0, deprel="aux"),
                tok("魚", upos="NOUN", head=0, deprel="nsubj"),
            ]
        )
        q = lemmatize_query("食べられた", s)
        assert q.content_lemma == "食べる"
        assert q.auxiliaries == ("られる", "た")

    def test_token_span_helper(self):
        assert token_span("食べた", self._taberu_context()) == (2, 4)
        assert token_span("犬", self._taberu_context()) is None

    def test_empty_content_lemma_rejected(self):
        with pytest.raises(ValueError):
            QueryLemma("")


class TestPersistence:
    def test_round_trip_empty(self, tmp_path):
        ix = build_index([])
        path = tmp_path / "empty.idx"
        save_index(ix, path)
        assert load_index(path) == ix

    def test_round_trip_corpus(self, tmp_path):
        ix = build_index(synth_corpus(300, seed=11))
        path = tmp_path / "corpus.idx"
        save_index(ix, path)
        loaded = load_index(path)
        assert loaded == ix
        assert loaded.doc_count == 300
        assert loaded.fingerprint == ix.fingerprint

    def test_lookup_identical_after_round_trip(self, tmp_path):
        corpus = synth_corpus(100, seed=13)
        ix = build_index(corpus)
        path = tmp_path / "c.idx"
        save_index(ix, path)
        loaded = load_index(path)
        for key in list(ix.postings)[:10]:
            assert lookup(loaded, QueryLemma(key)) == lookup(ix, QueryLemma(key))

    def test_truncated_file_rejected(self, tmp_path):
        ix = build_index(synth_corpus(20, seed=1))
        path = tmp_path / "t.idx"
        save_index(ix, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(IndexFormatError):
            load_index(path)

    def test_corrupted_byte_rejected(self, tmp_path):
        ix = build_index(synth_corpus(20, seed=2))
        path = tmp_path / "c.idx"
        save_index(ix, path)
        raw = bytearray(path.read_bytes())
        raw[len(raw) // 2] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(IndexFormatError):
            load_index(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "m.idx"
        path.write_bytes(b"NOTANIDX" + b"\x00" * 64)
        with pytest.raises(IndexFormatError):
            load_index(path)

    def test_unsupported_version_rejected(self, tmp_path):
        import hashlib
        import json
        import struct

        header = json.dumps({"version": 99, "doc_count": 0, "fingerprint": "", "key_count": 0}).encode()
        body = b"RBNIDX\n" + struct.pack("<I", len(header)) + header
        path = tmp_path / "v.idx"
        path.write_bytes(body + hashlib.sha256(body).digest())
        with pytest.raises(IndexFormatError) as err:
            load_index(path)
        assert "version" in str(err.value)


class TestFuzzedSoundness:
    def test_small_fuzzed_corpora(self):
        for trial in range(5):
            corpus = synth_corpus(150, seed=100 + trial)
            ix = build_index(corpus)
            all_keys = set(ix.postings)
            for s in corpus:
                all_keys |= lemma_keys_oracle(s)
            for key in sorted(all_keys):
                assert ix.postings.get(key, []) == linear_scan(corpus, key), key
