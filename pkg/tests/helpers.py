"""Shared construction utilities for the test suite."""

from __future__ import annotations

import numpy as np

from graphdr.molgraph import BOND_SINGLE, AtomLabel, MolecularGraph


def make_graph(elements, edge_list, source_id="g") -> MolecularGraph:
    """Build a graph from element symbols and (i, j[, order]) edges."""
    nodes = [
        e if isinstance(e, AtomLabel) else AtomLabel(e) for e in elements
    ]
    edges = {}
    for edge in edge_list:
        i, j, *rest = edge
        order = rest[0] if rest else BOND_SINGLE
        edges[(min(i, j), max(i, j))] = order
    return MolecularGraph(source_id, nodes, edges)


def graph_to_plain(g: MolecularGraph):
    """Canonical label strings plus adjacency lists, for the oracles."""
    labels = [node.canonical() for node in g.nodes]
    adj = [list(g.neighbors(i)) for i in range(g.n)]
    return labels, adj


def random_graph(rng: np.random.Generator, index: int) -> MolecularGraph:
    """Seeded Erdos-Renyi graph, <= 12 nodes, elements from {C, N, O}."""
    n = int(rng.integers(2, 13))
    elements = [str(rng.choice(["C", "N", "O"])) for _ in range(n)]
    p = float(rng.uniform(0.15, 0.5))
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    return make_graph(elements, edges, source_id=f"R{index:03d}")


def graph_battery(count: int = 50, seed: int = 7) -> list[MolecularGraph]:
    """The seeded random-graph battery shared across equivalence tests."""
    rng = np.random.default_rng(seed)
    return [random_graph(rng, i) for i in range(count)]
