"""Skipgram-with-negative-sampling over a graph/pattern corpus.

Each occurrence of a pattern in a graph is one training event: the graph
vector is pulled toward the observed pattern vector and pushed away from
m pattern ids drawn from the unigram table.  Updates are plain per-event
SGD applied sequentially, so a fixed seed reproduces training bit for
bit.  The event loop is compiled with numba when available; a vectorized
numpy fallback implements the identical update order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, UnigramTable
from .errors import DimensionMismatch, EmptyCorpus, MalformedEmbeddingFile

try:
    from numba import njit

    _JIT = True
except ImportError:  # pragma: no cover - exercised only without numba
    _JIT = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


FILE_MAGIC = "graphdr-embeddings"
FILE_VERSION = "v1"


@dataclass
class SkipgramConfig:
    """Training schedule and model size.

    ``lr_decay`` is ``linear`` (learning rate falls linearly over all
    events to ``min_learning_rate``) or ``none``.
    """

    z: int = 64
    epochs: int = 1000
    negatives: int = 10
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    lr_decay: str = "linear"
    unigram_exponent: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.z < 1:
            raise ValueError("embedding dimension must be at least 1")
        if self.epochs < 1:
            raise ValueError("need at least one epoch")
        if self.negatives < 1:
            raise ValueError("need at least one negative sample")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.lr_decay not in ("linear", "none"):
            raise ValueError(f"unknown lr_decay {self.lr_decay!r}")


@dataclass
class EmbeddingTable:
    """Graph vectors (one row per graph) and pattern vectors."""

    graph_matrix: np.ndarray
    pattern_matrix: np.ndarray

    @property
    def z(self) -> int:
        return self.graph_matrix.shape[1]


def init_embeddings(n_graphs: int, vocab_size: int, z: int, seed) -> EmbeddingTable:
    """Graph rows uniform in [-0.5/z, 0.5/z); pattern rows zero."""
    if n_graphs < 1 or vocab_size < 1 or z < 1:
        raise ValueError("all table dimensions must be at least 1")
    rng = np.random.default_rng(seed)
    bound = 0.5 / z
    graph_matrix = rng.uniform(-bound, bound, size=(n_graphs, z))
    pattern_matrix = np.zeros((vocab_size, z))
    return EmbeddingTable(graph_matrix, pattern_matrix)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Branch on sign so exp never sees a positive argument.
    positive = x >= 0
    e = np.exp(np.where(positive, -x, x))
    return np.where(positive, 1.0 / (1.0 + e), e / (1.0 + e))


def _softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + e^x) without overflow: max(x, 0) + log1p(e^{-|x|}).
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def pair_loss_grad(g_row, pos_row, neg_rows):
    """Loss and gradients for one event.

    loss = -log sigma(g.s+) - sum_j log sigma(-g.s-_j), with every
    gradient evaluated at the incoming values.

    Returns:
        (loss, grad_g, grad_pos, grad_negs) where grad_negs has one row
        per negative draw.
    """
    g_row = np.asarray(g_row, dtype=np.float64)
    pos_row = np.asarray(pos_row, dtype=np.float64)
    neg_rows = np.atleast_2d(np.asarray(neg_rows, dtype=np.float64))
    dot_pos = float(g_row @ pos_row)
    dots_neg = neg_rows @ g_row
    loss = float(_softplus(np.array(-dot_pos)) + _softplus(dots_neg).sum())
    a_pos = float(_sigmoid(np.array(dot_pos))) - 1.0
    a_neg = _sigmoid(dots_neg)
    grad_g = a_pos * pos_row + a_neg @ neg_rows
    grad_pos = a_pos * g_row
    grad_negs = np.outer(a_neg, g_row)
    return loss, grad_g, grad_pos, grad_negs


@njit(cache=True)
def _epoch_events_jit(G, S, events, negs, lr0, lr_min, offset, total, decay):
    n_events, m = negs.shape
    z = G.shape[1]
    g_old = np.empty(z)
    grad = np.empty(z)
    coef = np.empty(m)
    loss_sum = 0.0
    for t in range(n_events):
        if decay:
            lr = lr0 - (lr0 - lr_min) * ((offset + t) / total)
            if lr < lr_min:
                lr = lr_min
        else:
            lr = lr0
        gi = events[t, 0]
        pi = events[t, 1]
        for c in range(z):
            g_old[c] = G[gi, c]
        dot = 0.0
        for c in range(z):
            dot += g_old[c] * S[pi, c]
        if dot >= 0.0:
            e = math.exp(-dot)
            loss_sum += math.log1p(e)
            a_pos = 1.0 / (1.0 + e) - 1.0
        else:
            e = math.exp(dot)
            loss_sum += math.log1p(e) - dot
            a_pos = e / (1.0 + e) - 1.0
        for c in range(z):
            grad[c] = a_pos * S[pi, c]
        for j in range(m):
            ni = negs[t, j]
            d = 0.0
            for c in range(z):
                d += g_old[c] * S[ni, c]
            if d >= 0.0:
                e = math.exp(-d)
                loss_sum += d + math.log1p(e)
                a = 1.0 / (1.0 + e)
            else:
                e = math.exp(d)
                loss_sum += math.log1p(e)
                a = e / (1.0 + e)
            coef[j] = a
            for c in range(z):
                grad[c] += a * S[ni, c]
        # All coefficients are now fixed at pre-step values; apply updates.
        for c in range(z):
            G[gi, c] -= lr * grad[c]
        cp = lr * a_pos
        for c in range(z):
            S[pi, c] -= cp * g_old[c]
        for j in range(m):
            ni = negs[t, j]
            cn = lr * coef[j]
            for c in range(z):
                S[ni, c] -= cn * g_old[c]
    return loss_sum


def _epoch_events_numpy(G, S, events, negs, lr0, lr_min, offset, total, decay):
    n_events, m = negs.shape
    loss_sum = 0.0
    for t in range(n_events):
        if decay:
            lr = max(lr_min, lr0 - (lr0 - lr_min) * ((offset + t) / total))
        else:
            lr = lr0
        gi = events[t, 0]
        pi = events[t, 1]
        neg_ids = negs[t]
        g_old = G[gi].copy()
        s_pos = S[pi]
        rows = S[neg_ids]  # copies, so later updates cannot leak in
        dot = float(g_old @ s_pos)
        dots = rows @ g_old
        loss_sum += float(_softplus(np.array(-dot)) + _softplus(dots).sum())
        a_pos = float(_sigmoid(np.array(dot))) - 1.0
        a_neg = _sigmoid(dots)
        grad = a_pos * s_pos + a_neg @ rows
        G[gi] -= lr * grad
        S[pi] -= (lr * a_pos) * g_old
        for j in range(m):  # repeated draws must each apply
            S[neg_ids[j]] -= (lr * a_neg[j]) * g_old
    return loss_sum


_epoch_events = _epoch_events_jit if _JIT else _epoch_events_numpy


def expand_events(corpus: Corpus) -> np.ndarray:
    """Entry (g, p, mult) becomes mult consecutive (g, p) events."""
    total = corpus.total()
    if total == 0:
        raise EmptyCorpus("corpus has no occurrences")
    events = np.empty((total, 2), dtype=np.int64)
    row = 0
    for gi, pid, mult in corpus.entries:
        events[row : row + mult, 0] = gi
        events[row : row + mult, 1] = pid
        row += mult
    return events


def train(
    corpus: Corpus, table: UnigramTable, config: SkipgramConfig
) -> tuple[EmbeddingTable, list[float]]:
    """Train embeddings; returns the table and per-epoch mean event loss.

    Stream layout per epoch: one permutation of the event list, then one
    (events x negatives) block of uniform draws for the negative ids.  A
    fixed seed therefore fixes the entire run, and the recorded loss for
    each event is evaluated before that event's update.
    """
    events = expand_events(corpus)
    n_events = events.shape[0]
    init_seed, stream_seed = np.random.SeedSequence(config.seed).spawn(2)
    emb = init_embeddings(corpus.n_graphs, corpus.vocab_size, config.z, init_seed)
    G, S = emb.graph_matrix, emb.pattern_matrix
    rng = np.random.default_rng(stream_seed)
    total = config.epochs * n_events
    decay = config.lr_decay == "linear"
    last_id = corpus.vocab_size - 1
    history: list[float] = []
    offset = 0
    for _ in range(config.epochs):
        shuffled = events[rng.permutation(n_events)]
        draws = rng.random((n_events, config.negatives))
        negs = np.minimum(
            np.searchsorted(table.cumulative, draws, side="right"), last_id
        ).astype(np.int64)
        loss_sum = _epoch_events(
            G,
            S,
            shuffled,
            negs,
            config.learning_rate,
            config.min_learning_rate,
            offset,
            total,
            decay,
        )
        history.append(loss_sum / n_events)
        offset += n_events
    return emb, history


def export_embeddings(emb: EmbeddingTable, ids: list[str], path, inducer_tag: str = "none") -> None:
    """Write graph vectors as a text file.

    Header line: ``graphdr-embeddings v1 <n> <z> <inducer-tag>``, then one
    ``<drug_id>\\t<v1> ... <vz>`` row per graph.  Values carry 17
    significant digits so a round trip reproduces each float64 exactly.
    """
    matrix = np.asarray(emb.graph_matrix, dtype=np.float64)
    if len(ids) != matrix.shape[0]:
        raise DimensionMismatch(
            f"{len(ids)} ids for {matrix.shape[0]} embedding rows"
        )
    if any(("\t" in i or "\n" in i or " " in i or not i) for i in ids):
        raise ValueError("drug ids must be non-empty and free of whitespace")
    if any(ch.isspace() for ch in inducer_tag) or not inducer_tag:
        raise ValueError("inducer tag must be non-empty and free of whitespace")
    n, z = matrix.shape
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{FILE_MAGIC} {FILE_VERSION} {n} {z} {inducer_tag}\n")
        for drug_id, row in zip(ids, matrix):
            values = " ".join(f"{v:.17g}" for v in row)
            handle.write(f"{drug_id}\t{values}\n")


def import_embeddings(path) -> tuple[list[str], np.ndarray]:
    """Read a file written by :func:`export_embeddings`."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        parts = header.split(" ")
        if len(parts) != 5 or parts[0] != FILE_MAGIC:
            raise MalformedEmbeddingFile(f"bad header {header!r}")
        if parts[1] != FILE_VERSION:
            raise MalformedEmbeddingFile(f"unsupported version {parts[1]!r}")
        try:
            n, z = int(parts[2]), int(parts[3])
        except ValueError:
            raise MalformedEmbeddingFile(f"bad header counts in {header!r}") from None
        if n < 1 or z < 1:
            raise MalformedEmbeddingFile(f"header declares empty table: {header!r}")
        ids: list[str] = []
        rows = np.empty((n, z), dtype=np.float64)
        for lineno, raw in enumerate(handle, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            if len(ids) >= n:
                raise MalformedEmbeddingFile(f"more rows than the declared {n}")
            drug_id, _, rest = line.partition("\t")
            if not drug_id or not rest:
                raise MalformedEmbeddingFile(f"line {lineno}: expected '<id>\\t<values>'")
            values = rest.split(" ")
            if len(values) != z:
                raise DimensionMismatch(
                    f"line {lineno}: {len(values)} values, expected {z}"
                )
            try:
                rows[len(ids)] = [float(v) for v in values]
            except ValueError:
                raise MalformedEmbeddingFile(f"line {lineno}: non-numeric value") from None
            ids.append(drug_id)
        if len(ids) != n:
            raise MalformedEmbeddingFile(f"{len(ids)} rows for declared {n}")
        if len(set(ids)) != n:
            raise MalformedEmbeddingFile("duplicate drug id in embedding file")
    return ids, rows
