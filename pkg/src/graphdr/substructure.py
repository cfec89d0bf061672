"""Substructure pattern induction over molecular graphs.

Two inducers are provided: iterative neighborhood relabeling (rooted
subtrees up to a fixed depth) and shortest-path triplets derived from an
all-pairs distance matrix.  Both emit canonical strings built by plain
concatenation, so distinct substructures never collide the way hashed
labels can.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DepthTooLarge, EmptyGraphSet, UnknownPatternId
from .molgraph import MolecularGraph

WL = "wl"
SP = "sp"
MAX_DEPTH = 8


@dataclass(frozen=True)
class Pattern:
    """A substructure pattern: inducer kind plus canonical string."""

    kind: str
    canonical: str


@dataclass(frozen=True)
class Inducer:
    """Pattern inducer selector: kind ``wl`` with a depth, or ``sp``."""

    kind: str
    depth: int = 3

    @classmethod
    def parse(cls, text: str) -> "Inducer":
        """Parse ``wl:K`` or ``sp`` (bare ``wl`` means depth 3)."""
        if text == SP:
            return cls(SP, 0)
        if text == WL:
            return cls(WL, 3)
        if text.startswith("wl:"):
            try:
                depth = int(text[3:])
            except ValueError:
                raise ValueError(f"bad inducer spec {text!r}") from None
            return cls(WL, depth)
        raise ValueError(f"bad inducer spec {text!r}; expected 'wl:K' or 'sp'")

    @property
    def tag(self) -> str:
        return f"wl:{self.depth}" if self.kind == WL else SP

    def induce(self, g: MolecularGraph) -> Counter:
        if self.kind == WL:
            return wl_patterns(g, self.depth)
        if self.kind == SP:
            return sp_patterns(g)
        raise ValueError(f"unknown inducer kind {self.kind!r}")


def _relabel_rounds(g: MolecularGraph, k: int) -> list[list[str]]:
    """Node label strings for rounds 0..k of neighborhood relabeling.

    Round 0 is the bare atom label; round i appends the sorted round-(i-1)
    labels of the neighbors.  Concatenation keeps labels injective because
    neighbor lists sit inside balanced brackets.
    """
    labels = [atom.canonical() for atom in g.nodes]
    rounds = [labels]
    for _ in range(k):
        prev = rounds[-1]
        rounds.append(
            [
                prev[v] + "|[" + ",".join(sorted(prev[u] for u in g.neighbors(v))) + "]"
                for v in range(g.n)
            ]
        )
    return rounds


def wl_patterns(g: MolecularGraph, k: int) -> Counter:
    """Multiset of rooted-subtree patterns at every depth 0..k.

    Each node contributes one pattern per depth; the ``depth|`` prefix
    keeps equal strings from different depths distinct.  Emission order is
    (depth, node index), which downstream vocabulary construction relies
    on for reproducible id assignment.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    if k > MAX_DEPTH:
        raise DepthTooLarge(f"depth {k} exceeds the maximum of {MAX_DEPTH}")
    counts: Counter = Counter()
    for depth, labels in enumerate(_relabel_rounds(g, k)):
        for label in labels:
            counts[Pattern(WL, f"{depth}|{label}")] += 1
    return counts


def floyd_warshall(g: MolecularGraph) -> np.ndarray:
    """All-pairs hop-count matrix; unreachable pairs hold ``inf``."""
    n = g.n
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for i, j in g.edges:
        dist[i, j] = dist[j, i] = 1.0
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def sp_patterns(g: MolecularGraph) -> Counter:
    """Multiset of (smaller label, larger label, distance) path patterns.

    One pattern per unordered connected node pair at distance >= 1; the
    two endpoint labels are the bare atom labels, sorted so that pattern
    identity ignores direction.
    """
    dist = floyd_warshall(g)
    base = [atom.canonical() for atom in g.nodes]
    counts: Counter = Counter()
    for i in range(g.n):
        for j in range(i + 1, g.n):
            d = dist[i, j]
            if not np.isfinite(d):
                continue
            la, lb = sorted((base[i], base[j]))
            counts[Pattern(SP, f"{la},{lb},{int(d)}")] += 1
    return counts


class PatternVocabulary:
    """Dense pattern ids assigned in first-seen order."""

    def __init__(self):
        self._patterns: list[Pattern] = []
        self._index: dict[Pattern, int] = {}

    def add(self, pattern: Pattern) -> int:
        """Return the id for a pattern, registering it if new."""
        idx = self._index.get(pattern)
        if idx is None:
            idx = len(self._patterns)
            self._patterns.append(pattern)
            self._index[pattern] = idx
        return idx

    def id_of(self, pattern: Pattern) -> int:
        try:
            return self._index[pattern]
        except KeyError:
            raise UnknownPatternId(f"pattern {pattern.canonical!r} not in vocabulary") from None

    def pattern(self, idx: int) -> Pattern:
        if not 0 <= idx < len(self._patterns):
            raise UnknownPatternId(f"id {idx} outside vocabulary of {len(self)}")
        return self._patterns[idx]

    def __contains__(self, pattern: Pattern) -> bool:
        return pattern in self._index

    def __len__(self) -> int:
        return len(self._patterns)

    def __iter__(self):
        return iter(self._patterns)


@dataclass
class PatternMultiset:
    """Per-graph pattern counts keyed by vocabulary id."""

    graph_id: str
    counts: dict[int, int]

    def total(self) -> int:
        return sum(self.counts.values())


def build_vocabulary(
    graphs: list[MolecularGraph], inducer: Inducer
) -> tuple[PatternVocabulary, list[PatternMultiset]]:
    """Run the inducer over every graph and assign dense pattern ids.

    Ids follow first appearance across the graph list, so extending the
    list with new graphs never renumbers existing patterns.
    """
    if not graphs:
        raise EmptyGraphSet("cannot build a vocabulary from zero graphs")
    vocab = PatternVocabulary()
    multisets: list[PatternMultiset] = []
    for g in graphs:
        counts = inducer.induce(g)
        multisets.append(
            PatternMultiset(g.source_id, {vocab.add(p): c for p, c in counts.items()})
        )
    return vocab, multisets


def frequency_vector(ms: PatternMultiset, vocab: PatternVocabulary) -> np.ndarray:
    """Dense count vector of length ``len(vocab)``."""
    out = np.zeros(len(vocab), dtype=np.int64)
    for idx, count in ms.counts.items():
        if not 0 <= idx < len(vocab):
            raise UnknownPatternId(f"id {idx} outside vocabulary of {len(vocab)}")
        out[idx] = count
    return out
