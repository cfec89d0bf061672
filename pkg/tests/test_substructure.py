"""Pattern induction: relabeling, shortest paths, vocabulary."""

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from graphdr.errors import DepthTooLarge, EmptyGraphSet, UnknownPatternId
from graphdr.molgraph import AtomLabel, parse_smiles
from graphdr.substructure import (
    MAX_DEPTH,
    Inducer,
    Pattern,
    PatternMultiset,
    PatternVocabulary,
    build_vocabulary,
    floyd_warshall,
    frequency_vector,
    sp_patterns,
    wl_patterns,
)
from helpers import graph_battery, graph_to_plain, make_graph


def wl_strings(g, k) -> Counter:
    return Counter({p.canonical: c for p, c in wl_patterns(g, k).items()})


def sp_strings(g) -> Counter:
    return Counter({p.canonical: c for p, c in sp_patterns(g).items()})


class TestRelabeling:
    def test_propane_depth_one(self):
        g = parse_smiles("x", "CCC")
        assert wl_strings(g, 1) == Counter(
            {"0|C": 3, "1|C|[C]": 2, "1|C|[C,C]": 1}
        )

    def test_triangle_depth_one(self):
        g = parse_smiles("x", "C1CC1")
        assert wl_strings(g, 1) == Counter({"0|C": 3, "1|C|[C,C]": 3})

    def test_depth_zero_is_atom_census(self):
        g = parse_smiles("x", "CCO")
        assert wl_strings(g, 0) == Counter({"0|C": 2, "0|O": 1})

    def test_each_depth_contributes_n_patterns(self):
        g = parse_smiles("x", "CC(O)N")
        for k in range(4):
            assert sum(wl_patterns(g, k).values()) == g.n * (k + 1)

    def test_aromatic_and_charge_distinguish_labels(self):
        plain = parse_smiles("x", "CC")
        aromatic = parse_smiles("y", "cc")
        charged = make_graph(
            [AtomLabel("C", formal_charge=1), AtomLabel("C")], [(0, 1)]
        )
        assert wl_strings(plain, 1) != wl_strings(aromatic, 1)
        assert wl_strings(plain, 1) != wl_strings(charged, 1)

    def test_matches_recursive_oracle_on_battery(self, battery):
        for g in battery[:12]:
            labels, adj = graph_to_plain(g)
            for k in (0, 1, 2, 3):
                assert wl_strings(g, k) == oracles.subtree_multiset(labels, adj, k)

    def test_depth_cap(self):
        g = parse_smiles("x", "CC")
        assert wl_patterns(g, MAX_DEPTH)
        with pytest.raises(DepthTooLarge):
            wl_patterns(g, MAX_DEPTH + 1)

    def test_negative_depth(self):
        with pytest.raises(ValueError):
            wl_patterns(parse_smiles("x", "C"), -1)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_node_order_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        elements = [str(rng.choice(["C", "N", "O"])) for _ in range(n)]
        edges = [
            (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4
        ]
        g = make_graph(elements, edges)
        perm = rng.permutation(n)
        inv = np.argsort(perm)
        g2 = make_graph(
            [elements[int(inv[v])] for v in range(n)],
            [(int(perm[i]), int(perm[j])) for i, j in edges],
        )
        assert wl_strings(g, 2) == wl_strings(g2, 2)
        assert sp_strings(g) == sp_strings(g2)


class TestShortestPaths:
    def test_ethanol_paths(self):
        g = parse_smiles("x", "CCO")
        assert sp_strings(g) == Counter({"C,C,1": 1, "C,O,1": 1, "C,O,2": 1})

    def test_single_atom_has_no_paths(self):
        assert sp_strings(parse_smiles("x", "C")) == Counter()

    def test_disconnected_pairs_skipped(self):
        g = parse_smiles("x", "CC.OO")
        assert sp_strings(g) == Counter({"C,C,1": 1, "O,O,1": 1})

    def test_labels_sorted_within_pattern(self):
        g = parse_smiles("x", "OC")
        assert sp_strings(g) == Counter({"C,O,1": 1})

    def test_distance_matrix_matches_bfs_on_battery(self, battery):
        for g in battery[:12]:
            _, adj = graph_to_plain(g)
            expected = np.array(oracles.bfs_distances(g.n, adj))
            assert np.array_equal(floyd_warshall(g), expected)

    def test_matches_bfs_pair_oracle_on_battery(self, battery):
        for g in battery[:12]:
            labels, adj = graph_to_plain(g)
            assert sp_strings(g) == oracles.path_pattern_multiset(labels, adj)


class TestInducer:
    def test_parse_forms(self):
        assert Inducer.parse("wl:2") == Inducer("wl", 2)
        assert Inducer.parse("wl") == Inducer("wl", 3)
        assert Inducer.parse("sp").kind == "sp"

    def test_parse_rejects_junk(self):
        for text in ("wl:x", "kernel", "wl:"):
            with pytest.raises(ValueError):
                Inducer.parse(text)

    def test_tag_round_trips(self):
        for text in ("wl:1", "wl:3", "sp"):
            assert Inducer.parse(text).tag == text

    def test_induce_dispatches(self):
        g = parse_smiles("x", "CCO")
        assert Inducer("wl", 1).induce(g) == wl_patterns(g, 1)
        assert Inducer("sp").induce(g) == sp_patterns(g)


class TestVocabulary:
    def test_add_and_lookup(self):
        vocab = PatternVocabulary()
        p = Pattern("wl", "0|C")
        q = Pattern("wl", "0|N")
        assert vocab.add(p) == 0
        assert vocab.add(q) == 1
        assert vocab.add(p) == 0
        assert vocab.id_of(q) == 1
        assert vocab.pattern(0) == p
        assert len(vocab) == 2
        assert p in vocab
        assert list(vocab) == [p, q]

    def test_unknown_pattern(self):
        vocab = PatternVocabulary()
        with pytest.raises(UnknownPatternId):
            vocab.id_of(Pattern("wl", "0|C"))

    def test_build_first_seen_order(self):
        g = parse_smiles("x", "CCC")
        vocab, multisets = build_vocabulary([g], Inducer("wl", 1))
        assert [p.canonical for p in vocab] == ["0|C", "1|C|[C]", "1|C|[C,C]"]
        assert len(multisets) == 1
        assert multisets[0].graph_id == "x"

    def test_build_spans_graphs_in_order(self):
        a = parse_smiles("a", "CC")
        b = parse_smiles("b", "CO")
        vocab, _ = build_vocabulary([a, b], Inducer("wl", 0))
        assert [p.canonical for p in vocab] == ["0|C", "0|O"]

    def test_build_empty_set_rejected(self):
        with pytest.raises(EmptyGraphSet):
            build_vocabulary([], Inducer("wl", 1))

    def test_frequency_vector_frozen_example(self):
        g = parse_smiles("x", "CCC")
        vocab, multisets = build_vocabulary([g], Inducer("wl", 1))
        assert frequency_vector(multisets[0], vocab).tolist() == [3, 2, 1]

    def test_frequency_vector_foreign_id(self):
        g = parse_smiles("x", "CC")
        vocab, _ = build_vocabulary([g], Inducer("wl", 0))
        foreign = PatternMultiset("y", {5: 1})
        with pytest.raises(UnknownPatternId):
            frequency_vector(foreign, vocab)

    def test_multiset_total(self):
        g = parse_smiles("x", "CCO")
        _, multisets = build_vocabulary([g], Inducer("wl", 2))
        assert multisets[0].total() == g.n * 3
