"""Dependency-label trees, subtree kernel, lexical n-grams, combined score."""

from __future__ import annotations

import random

import numpy as np
import pytest

from helpers import random_labeled_tree, sent, synth_corpus, tok
from oracles import kernel_oracle, lexical_oracle
from reibun import _kernel
from reibun.corpus import ROOT
from reibun.diversity import (
    LabeledTree,
    combined_diversity,
    diversity_from_similarities,
    generalize_labels,
    lexical_diversity,
    load_deprel_table,
    ngram_profile,
    pooled_uniqueness,
    similarity_matrix,
    subtree_kernel,
    syntactic_diversity,
    syntactic_similarity,
)


class TestDeprelTable:
    def setup_method(self):
        self.table = load_deprel_table()

    def test_exact_label(self):
        assert self.table.lookup("nsubj") == "nsubj"
        assert self.table.lookup("case") == "case"

    def test_subtype_collapses(self):
        assert self.table.lookup("acl:relcl") == "acl"
        assert self.table.lookup("nsubj:pass") == "nsubj"

    def test_unlisted_subtype_falls_back_to_base(self):
        assert self.table.lookup("obl:loc") == "obl"

    def test_unknown_relation(self):
        assert self.table.lookup("mystery") == "dep"
        assert self.table.lookup("mystery", granularity="cls") == "other"

    def test_class_granularity(self):
        assert self.table.lookup("nsubj", granularity="cls") == "core"
        assert self.table.lookup("case", granularity="cls") == "function"
        assert self.table.lookup("punct", granularity="cls") == "punct"
        assert self.table.lookup("root", granularity="cls") == "root"

    def test_bad_granularity(self):
        with pytest.raises(ValueError):
            self.table.lookup("nsubj", granularity="bogus")


class TestGeneralizeLabels:
    def test_structure_mirrors_heads(self):
        s = sent(
            [
                tok("猫", upos="NOUN", head=2, deprel="nsubj"),
                tok("が", upos="ADP", head=0, deprel="case"),
                tok("眠る", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        t = generalize_labels(s)
        assert t.root == 2
        assert t.labels == ("nsubj", "case", "root")
        assert t.children == ((1,), (), (0,))

    def test_class_granularity_labels(self):
        s = sent(
            [
                tok("猫", upos="NOUN", head=1, deprel="nsubj"),
                tok("眠る", upos="VERB", head=ROOT, deprel="root"),
            ]
        )
        t = generalize_labels(s, granularity="cls")
        assert t.labels == ("core", "root")

    def test_subtyped_deprel_generalized(self):
        s = sent(
            [
                tok("走る", upos="VERB", head=1, deprel="acl:relcl"),
                tok("人", upos="NOUN", head=ROOT, deprel="root"),
            ]
        )
        assert generalize_labels(s).labels[0] == "acl"


class TestLabeledTreeValidation:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            LabeledTree(labels=["a"], children=[[], []], root=0)

    def test_root_out_of_range(self):
        with pytest.raises(ValueError):
            LabeledTree(labels=["a"], children=[[]], root=3)

    def test_unreachable_node(self):
        with pytest.raises(ValueError):
            LabeledTree(labels=["a", "b"], children=[[], []], root=0)

    def test_node_with_two_parents(self):
        with pytest.raises(ValueError):
            LabeledTree(labels=["a", "b", "c"], children=[[1, 2], [2], []], root=0)


class TestSubtreeKernel:
    def test_single_matching_leaf(self):
        a = LabeledTree(labels=["x"], children=[[]], root=0)
        b = LabeledTree(labels=["x"], children=[[]], root=0)
        assert subtree_kernel(a, b) == 1

    def test_single_differing_leaf(self):
        a = LabeledTree(labels=["x"], children=[[]], root=0)
        b = LabeledTree(labels=["y"], children=[[]], root=0)
        assert subtree_kernel(a, b) == 0

    def test_chain_pair(self):
        # root(a)->leaf(b) against itself: C(leaf)=1, C(root)=1+1=2, K=3
        t = LabeledTree(labels=["a", "b"], children=[[1], []], root=0)
        assert subtree_kernel(t, t) == 3

    def test_label_match_without_production_match(self):
        # same root label, different child labels: anchor-only match at root
        a = LabeledTree(labels=["r", "x"], children=[[1], []], root=0)
        b = LabeledTree(labels=["r", "y"], children=[[1], []], root=0)
        assert subtree_kernel(a, b) == 1

    def test_matches_fragment_oracle_on_random_trees(self):
        rng = random.Random(42)
        for _ in range(80):
            a = random_labeled_tree(rng)
            b = random_labeled_tree(rng)
            assert subtree_kernel(a, b) == kernel_oracle(a, b)

    def test_symmetry(self):
        rng = random.Random(7)
        for _ in range(20):
            a = random_labeled_tree(rng)
            b = random_labeled_tree(rng)
            assert subtree_kernel(a, b) == subtree_kernel(b, a)

    def test_self_kernel_at_least_node_count(self):
        rng = random.Random(11)
        for _ in range(20):
            t = random_labeled_tree(rng)
            assert subtree_kernel(t, t) >= len(t.labels)


class TestSyntacticSimilarity:
    def test_self_similarity_is_one(self):
        rng = random.Random(3)
        for _ in range(10):
            t = random_labeled_tree(rng)
            assert syntactic_similarity(t, t) == pytest.approx(1.0, abs=1e-12)

    def test_bounded_and_symmetric(self):
        rng = random.Random(5)
        for _ in range(20):
            a, b = random_labeled_tree(rng), random_labeled_tree(rng)
            s = syntactic_similarity(a, b)
            assert 0.0 <= s <= 1.0
            assert s == syntactic_similarity(b, a)

    def test_disjoint_labels_score_zero(self):
        a = LabeledTree(labels=["p", "q"], children=[[1], []], root=0)
        b = LabeledTree(labels=["u", "v"], children=[[1], []], root=0)
        assert syntactic_similarity(a, b) == 0.0

    def test_matrix_agrees_with_pairwise_calls(self):
        rng = random.Random(9)
        trees = [random_labeled_tree(rng) for _ in range(6)]
        m = similarity_matrix(trees)
        assert m.shape == (6, 6)
        for i in range(6):
            assert m[i, i] == pytest.approx(1.0, abs=1e-12)
            for j in range(6):
                assert m[i, j] == pytest.approx(syntactic_similarity(trees[i], trees[j]), abs=0)

    def test_numpy_backend_matches_numba(self, monkeypatch):
        rng = random.Random(13)
        trees = [random_labeled_tree(rng, max_nodes=12) for _ in range(8)]
        monkeypatch.setenv("REIBUN_DISABLE_NUMBA", "1")
        assert _kernel.backend_name() == "numpy"
        slow = similarity_matrix(trees)
        monkeypatch.delenv("REIBUN_DISABLE_NUMBA")
        fast = similarity_matrix(trees)
        assert np.array_equal(slow, fast)


class TestDiversityFromSimilarities:
    def test_subset_selection(self):
        sims = np.array(
            [
                [1.0, 0.5, 0.2],
                [0.5, 1.0, 0.8],
                [0.2, 0.8, 1.0],
            ]
        )
        assert diversity_from_similarities(sims, [0, 2]) == pytest.approx(0.8)
        expected = ((1 - 0.5) + (1 - 0.2) + (1 - 0.8)) / 3
        assert diversity_from_similarities(sims, [0, 1, 2]) == pytest.approx(expected)

    def test_singleton_is_one(self):
        assert diversity_from_similarities(np.eye(3), [1]) == 1.0


class TestLexicalDiversity:
    def test_matches_zip_oracle_on_synth(self):
        corpus = synth_corpus(30, seed=21)
        for size in (1, 2, 5):
            group = corpus[:size]
            expected = lexical_oracle([[t.surface for t in s.tokens] for s in group])
            assert lexical_diversity(group) == pytest.approx(expected, abs=0)

    def test_identical_copies_score_inverse_k(self):
        base = synth_corpus(1, seed=33)[0]
        for k in (2, 3, 5):
            assert lexical_diversity([base] * k) == pytest.approx(1.0 / k, abs=1e-12)

    def test_disjoint_sentences_score_one(self):
        a = sent([tok("山", head=ROOT), tok("海", head=0, deprel="obj")])
        b = sent([tok("空", head=ROOT), tok("星", head=0, deprel="obj")])
        assert lexical_diversity([a, b]) == 1.0

    def test_short_sentence_skips_empty_orders(self):
        # two tokens: only orders 1 and 2 contribute
        a = sent([tok("山", head=ROOT), tok("海", head=0, deprel="obj")])
        assert lexical_diversity([a]) == 1.0

    def test_repeated_token_lowers_score(self):
        a = sent(
            [
                tok("山", head=ROOT),
                tok("山", head=0, deprel="obj"),
                tok("山", head=0, deprel="obl"),
            ]
        )
        assert lexical_diversity([a]) < 1.0

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            lexical_diversity([])


class TestCombined:
    def test_identical_pair(self):
        s = synth_corpus(1, seed=8)[0]
        d = combined_diversity([s, s])
        assert d.syntactic == pytest.approx(0.0, abs=1e-12)
        assert d.lexical == pytest.approx(0.5, abs=1e-12)
        assert d.combined == pytest.approx(0.25, abs=1e-12)

    def test_mixture_formula(self):
        group = synth_corpus(4, seed=15)
        d = combined_diversity(group)
        assert d.combined == pytest.approx(0.5 * d.syntactic + 0.5 * d.lexical, abs=0)
        assert d.syntactic == pytest.approx(syntactic_diversity(group), abs=0)
        assert d.lexical == pytest.approx(lexical_diversity(group), abs=0)

    def test_order_invariant(self):
        group = synth_corpus(5, seed=18)
        shuffled = list(group)
        random.Random(2).shuffle(shuffled)
        a, b = combined_diversity(group), combined_diversity(shuffled)
        assert a.syntactic == pytest.approx(b.syntactic, abs=1e-12)
        assert a.lexical == b.lexical
        assert a.combined == pytest.approx(b.combined, abs=1e-12)

    def test_singleton(self):
        s = synth_corpus(1, seed=4)[0]
        d = combined_diversity([s])
        assert d.syntactic == 1.0

    def test_as_dict_round_trip(self):
        d = combined_diversity(synth_corpus(3, seed=1))
        payload = d.as_dict()
        assert set(payload) == {"syntactic", "lexical", "combined"}


class TestNGramProfiles:
    def test_orders_and_counts(self):
        s = sent(
            [
                tok("山", head=ROOT),
                tok("と", head=0, deprel="case"),
                tok("山", head=0, deprel="obj"),
            ]
        )
        p = ngram_profile(s)
        assert p[0][("山",)] == 2
        assert p[0][("と",)] == 1
        assert p[1][("山", "と")] == 1
        assert p[2][("山", "と", "山")] == 1
        assert sum(p[3].values()) == 0

    def test_pooled_uniqueness_empty_profiles(self):
        assert pooled_uniqueness([]) == 1.0
