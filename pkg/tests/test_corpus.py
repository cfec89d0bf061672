"""Corpus assembly and negative-sampling distribution."""

import numpy as np
import pytest

from graphdr.corpus import (
    Corpus,
    UnigramTable,
    build_corpus,
    sample_negatives,
    unigram_distribution,
)
from graphdr.errors import EmptyCorpus
from graphdr.molgraph import parse_smiles
from graphdr.substructure import Inducer, build_vocabulary


def corpus_for(smiles_list, inducer=Inducer("wl", 1)):
    graphs = [parse_smiles(f"g{i}", s) for i, s in enumerate(smiles_list)]
    vocab, multisets = build_vocabulary(graphs, inducer)
    return build_corpus(multisets, vocab)


class TestBuildCorpus:
    def test_propane_entries(self):
        corpus = corpus_for(["CCC"])
        assert corpus.entries == [(0, 0, 3), (0, 1, 2), (0, 2, 1)]
        assert corpus.n_graphs == 1
        assert corpus.vocab_size == 3
        assert corpus.total() == 6

    def test_entries_follow_graph_order(self):
        corpus = corpus_for(["CC", "CO"], Inducer("wl", 0))
        graph_indices = [gi for gi, _, _ in corpus.entries]
        assert graph_indices == sorted(graph_indices)
        assert corpus.n_graphs == 2

    def test_pattern_counts_sum_over_graphs(self):
        corpus = corpus_for(["CC", "CO"], Inducer("wl", 0))
        # ids: 0 = carbon census entry, 1 = oxygen
        assert corpus.pattern_counts().tolist() == [3, 1]

    def test_empty_corpus_rejected(self):
        # single atoms have no paths, so the path inducer yields nothing
        graphs = [parse_smiles("a", "C"), parse_smiles("b", "O")]
        vocab, multisets = build_vocabulary(graphs, Inducer.parse("sp"))
        with pytest.raises(EmptyCorpus):
            build_corpus(multisets, vocab)


class TestUnigramDistribution:
    def test_counts_over_total_at_unit_exponent(self):
        corpus = corpus_for(["CCC"])
        table = unigram_distribution(corpus, 1.0)
        np.testing.assert_allclose(table.probs, np.array([3, 2, 1]) / 6.0)
        np.testing.assert_allclose(table.cumulative[-1], 1.0)

    def test_exponent_applied_before_normalizing(self):
        corpus = corpus_for(["CCC"])
        table = unigram_distribution(corpus, 0.75)
        raw = np.array([3.0, 2.0, 1.0]) ** 0.75
        np.testing.assert_allclose(table.probs, raw / raw.sum())
        assert table.exponent == 0.75

    def test_equal_counts_give_uniform(self):
        corpus = Corpus(entries=[(0, 0, 1), (0, 1, 1)], n_graphs=1, vocab_size=2)
        for exponent in (0.5, 1.0, 2.0):
            table = unigram_distribution(corpus, exponent)
            np.testing.assert_allclose(table.probs, [0.5, 0.5])

    def test_nonpositive_exponent_rejected(self):
        corpus = corpus_for(["CC"])
        for bad in (0.0, -1.0):
            with pytest.raises(ValueError):
                unigram_distribution(corpus, bad)


class _StubRng:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)

    def random(self, m):
        assert m == len(self.values)
        return self.values


class TestSampleNegatives:
    def test_inverse_cdf_buckets(self):
        table = UnigramTable(
            probs=np.array([0.2, 0.3, 0.5]),
            cumulative=np.array([0.2, 0.5, 1.0]),
            exponent=1.0,
        )
        draws = sample_negatives(table, _StubRng([0.0, 0.19, 0.2, 0.49, 0.5, 0.99]), 6)
        assert draws.tolist() == [0, 0, 1, 1, 2, 2]

    def test_top_edge_clipped_into_range(self):
        table = UnigramTable(
            probs=np.array([1.0]),
            cumulative=np.array([1.0]),
            exponent=1.0,
        )
        assert sample_negatives(table, _StubRng([1.0 - 1e-16]), 1).tolist() == [0]

    def test_draws_are_unfiltered_iid(self):
        # all the mass on one id: every draw lands there, even though a
        # real event would use that same id as its positive
        table = UnigramTable(
            probs=np.array([0.0, 1.0]),
            cumulative=np.array([0.0, 1.0]),
            exponent=1.0,
        )
        draws = sample_negatives(table, np.random.default_rng(0), 50)
        assert draws.tolist() == [1] * 50

    def test_empirical_frequencies_match(self):
        corpus = corpus_for(["CCC"])
        table = unigram_distribution(corpus)
        rng = np.random.default_rng(123)
        draws = sample_negatives(table, rng, 60_000)
        freq = np.bincount(draws, minlength=3) / 60_000
        np.testing.assert_allclose(freq, table.probs, atol=0.01)

    def test_zero_draws_rejected(self):
        corpus = corpus_for(["CC"])
        table = unigram_distribution(corpus)
        with pytest.raises(ValueError):
            sample_negatives(table, np.random.default_rng(0), 0)
