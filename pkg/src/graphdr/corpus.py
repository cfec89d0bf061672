"""Target-context corpus over (graph, pattern) occurrences.

The corpus is the multiset of pattern occurrences across all graphs;
negative sampling draws from the empirical pattern distribution, with an
optional exponent to flatten or sharpen it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCorpus
from .substructure import PatternMultiset, PatternVocabulary


@dataclass
class Corpus:
    """Occurrence entries (graph_index, pattern_id, multiplicity)."""

    entries: list[tuple[int, int, int]]
    n_graphs: int
    vocab_size: int

    def total(self) -> int:
        """Total occurrence count, i.e. the corpus size."""
        return sum(m for _, _, m in self.entries)

    def pattern_counts(self) -> np.ndarray:
        """Occurrences of each pattern id, summed over graphs."""
        counts = np.zeros(self.vocab_size, dtype=np.int64)
        for _, pid, mult in self.entries:
            counts[pid] += mult
        return counts


def build_corpus(
    multisets: list[PatternMultiset], vocab: PatternVocabulary
) -> Corpus:
    """Flatten per-graph multisets into corpus entries.

    Graph indices follow the multiset list order; entry order within a
    graph follows the multiset's own (first-seen) pattern order.
    """
    entries = [
        (gi, pid, mult)
        for gi, ms in enumerate(multisets)
        for pid, mult in ms.counts.items()
    ]
    if not entries:
        raise EmptyCorpus("no graph produced any pattern")
    return Corpus(entries, n_graphs=len(multisets), vocab_size=len(vocab))


@dataclass
class UnigramTable:
    """Sampling distribution over pattern ids with cumulative sums."""

    probs: np.ndarray
    cumulative: np.ndarray
    exponent: float


def unigram_distribution(corpus: Corpus, exponent: float = 1.0) -> UnigramTable:
    """Empirical pattern distribution, optionally raised to an exponent.

    With exponent 1.0 this is exactly occurrence count over corpus size;
    0.75 is the usual flattening choice.
    """
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    weights = corpus.pattern_counts().astype(np.float64) ** exponent
    total = weights.sum()
    if total <= 0:
        raise EmptyCorpus("corpus has no occurrences")
    probs = weights / total
    return UnigramTable(probs=probs, cumulative=np.cumsum(probs), exponent=exponent)


def sample_negatives(table: UnigramTable, rng: np.random.Generator, m: int) -> np.ndarray:
    """Draw m i.i.d. pattern ids by inverse-CDF lookup.

    Draws are not filtered in any way; a drawn id may equal the positive
    pattern of the event it is used for.
    """
    if m < 1:
        raise ValueError("need at least one draw")
    ids = np.searchsorted(table.cumulative, rng.random(m), side="right")
    return np.minimum(ids, len(table.cumulative) - 1).astype(np.int64)
