"""Evaluation protocol: AUROC, random and cold splits, repeated runs,
and the embedding-dimension / training-epoch sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import build_corpus, unigram_distribution
from .errors import (
    DatasetTooSmall,
    DegenerateClustering,
    SingleClass,
    UnknownDrug,
)
from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto
from .molgraph import MolecularGraph
from .pairscore import (
    ContextFeatureSet,
    DrugFeatureSet,
    PairScorerConfig,
    TripleDataset,
    predict,
    train_pairscore,
)
from .skipgram import SkipgramConfig, train
from .substructure import Inducer, build_vocabulary

DIMENSION_SETTINGS = (8, 16, 32, 64, 128, 256, 512, 1024)
EPOCH_SETTINGS = tuple(range(200, 2001, 200))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    n = values.shape[0]
    order = np.argsort(values, kind="mergesort")
    ordered = values[order]
    new_group = np.r_[True, ordered[1:] != ordered[:-1]]
    starts = np.flatnonzero(new_group)
    ends = np.r_[starts[1:], n]
    group_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(n)
    ranks[order] = group_rank[np.cumsum(new_group) - 1]
    return ranks


def auroc(scores, labels) -> float:
    """Probability a positive outranks a negative; ties count one half.

    Computed from rank sums, which matches the O(n^2) pairwise count
    exactly.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be 1-d arrays of equal length")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = scores.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUROC needs both a positive and a negative")
    ranks = _average_ranks(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class SplitPlan:
    """Index partition of a dataset, with provenance metadata."""

    kind: str
    train_indices: np.ndarray
    test_indices: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        train = set(self.train_indices.tolist())
        test = set(self.test_indices.tolist())
        if train & test:
            raise ValueError("train and test indices overlap")


def random_split(dataset, ratio: float = 0.5, seed: int = 0) -> SplitPlan:
    """Seeded shuffle; the first ceil(ratio * n) observations train."""
    n = len(dataset)
    if n < 2:
        raise DatasetTooSmall("need at least two observations to split")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(n)
    cut = int(np.ceil(ratio * n))
    if cut == 0 or cut == n:
        raise DatasetTooSmall(f"ratio {ratio} leaves one side empty for n={n}")
    return SplitPlan(
        kind="random",
        train_indices=order[:cut],
        test_indices=order[cut:],
        metadata={"ratio": ratio, "seed": seed},
    )


def _complete_linkage_two(ids: list[str], dist: np.ndarray):
    """Agglomerate down to two clusters under complete linkage.

    Cluster pair distances are maintained incrementally: after a merge
    the distance to any other cluster is the max of the two replaced
    distances.  Distance ties break on the lexicographically smallest
    (min member id, then the other cluster's min member id) pair.
    Returns the two clusters plus the merge log.
    """
    n = len(ids)
    clusters: dict[int, list[str]] = {i: [ids[i]] for i in range(n)}
    pair_dist: dict[tuple[int, int], float] = {
        (i, j): float(dist[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    merge_log: list[tuple[tuple[str, ...], tuple[str, ...], float]] = []
    next_id = n
    while len(clusters) > 2:
        best = None
        for (i, j), d in pair_dist.items():
            key = tuple(sorted((clusters[i][0], clusters[j][0])))
            candidate = (d, key, (i, j))
            if best is None or candidate[:2] < best[:2]:
                best = candidate
        d, _, (i, j) = best
        merged = sorted(clusters[i] + clusters[j])
        merge_log.append((tuple(sorted(clusters[i])), tuple(sorted(clusters[j])), d))
        del clusters[i], clusters[j]
        new_dists = {}
        for other in clusters:
            a = pair_dist.pop((min(i, other), max(i, other)))
            b = pair_dist.pop((min(j, other), max(j, other)))
            new_dists[(other, next_id)] = max(a, b)
        del pair_dist[(i, j)]
        clusters[next_id] = merged
        pair_dist.update(new_dists)
        next_id += 1
    (ka, ca), (kb, cb) = clusters.items()
    return ca, cb, merge_log


def cold_split(fingerprints: dict[str, Fingerprint], dataset) -> SplitPlan:
    """Drug-level split: cluster drugs, train only on within-A pairs.

    Drugs are clustered to exactly two groups by complete linkage over
    1 - tanimoto distance; A is the larger group (ties go to the group
    holding the lexicographically smallest drug id).  A triple trains
    iff both of its drugs lie in A, so test observations always involve
    at least one held-out drug.
    """
    ids = sorted(fingerprints)
    if len(ids) < 2:
        raise DatasetTooSmall("cold split needs at least two drugs")
    for t in dataset:
        if t.drug_a not in fingerprints or t.drug_b not in fingerprints:
            missing = t.drug_a if t.drug_a not in fingerprints else t.drug_b
            raise UnknownDrug(f"no fingerprint for drug {missing!r}")
    n = len(ids)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = 1.0 - tanimoto(
                fingerprints[ids[i]], fingerprints[ids[j]]
            )
    cluster_a, cluster_b, merges = _complete_linkage_two(ids, dist)
    if not cluster_a or not cluster_b:
        raise DegenerateClustering("clustering produced an empty cluster")
    if len(cluster_b) > len(cluster_a) or (
        len(cluster_a) == len(cluster_b) and min(cluster_b) < min(cluster_a)
    ):
        cluster_a, cluster_b = cluster_b, cluster_a
    in_a = set(cluster_a)
    train_idx = [
        i for i, t in enumerate(dataset) if t.drug_a in in_a and t.drug_b in in_a
    ]
    train_set = set(train_idx)
    test_idx = [i for i in range(len(dataset)) if i not in train_set]
    return SplitPlan(
        kind="cold",
        train_indices=np.array(train_idx, dtype=np.int64),
        test_indices=np.array(test_idx, dtype=np.int64),
        metadata={
            "cluster_a": list(cluster_a),
            "cluster_b": list(cluster_b),
            "merges": merges,
        },
    )


def repeat_runs(experiment, seeds) -> dict[str, tuple[float, float]]:
    """Run ``experiment(seed)`` per seed; aggregate each metric.

    Returns metric -> (mean, sample standard deviation).
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("need at least two seeds to aggregate")
    results = [experiment(seed) for seed in seeds]
    out: dict[str, tuple[float, float]] = {}
    for key in results[0]:
        values = np.array([r[key] for r in results], dtype=np.float64)
        out[key] = (float(values.mean()), float(values.std(ddof=1)))
    return out


def evaluate_split(
    dataset: TripleDataset,
    plan: SplitPlan,
    drugs: DrugFeatureSet,
    contexts: ContextFeatureSet | None,
    config: PairScorerConfig,
) -> dict[str, float]:
    """Train on the plan's training triples, report test AUROC."""
    model, _ = train_pairscore(
        dataset.subset(plan.train_indices), drugs, contexts, config
    )
    test = dataset.subset(plan.test_indices)
    scores = predict(model, test, drugs, contexts)
    return {"test_auroc": auroc(scores, test.labels())}


def ablation_sweep(
    kind: str,
    graphs: list[MolecularGraph],
    dataset: TripleDataset,
    inducer: Inducer,
    sg_config: SkipgramConfig,
    scorer_config: PairScorerConfig,
    seeds=(0, 1, 2, 3, 4),
    split_ratio: float = 0.5,
) -> list[tuple[int, int, float]]:
    """Sweep embedding dimension or embedding training epochs.

    ``kind`` is ``dimension`` (8..1024, doubling, at the base epoch
    count) or ``epochs`` (200..2000 step 200 at the base dimension).
    Embeddings are retrained once per setting; every evaluation seed
    then drives its own split and scorer.  Returns (setting, seed,
    test_auroc) rows in sweep order.
    """
    if kind == "dimension":
        settings = [(z, sg_config.epochs) for z in DIMENSION_SETTINGS]
    elif kind == "epochs":
        settings = [(sg_config.z, e) for e in EPOCH_SETTINGS]
    else:
        raise ValueError(f"unknown sweep kind {kind!r}; expected dimension or epochs")
    vocab, multisets = build_vocabulary(graphs, inducer)
    corpus = build_corpus(multisets, vocab)
    table = unigram_distribution(corpus, sg_config.unigram_exponent)
    ids = [g.source_id for g in graphs]
    fingerprints = {}
    if scorer_config.feature_mode in ("fp", "fp+dr"):
        fingerprints = {
            g.source_id: morgan_fingerprint(g).bits.astype(np.float64) for g in graphs
        }
    contexts = ContextFeatureSet.one_hot(dataset.contexts())
    rows: list[tuple[int, int, float]] = []
    for z, sg_epochs in settings:
        setting = z if kind == "dimension" else sg_epochs
        emb, _ = train(corpus, table, replace(sg_config, z=z, epochs=sg_epochs))
        embeddings = {i: emb.graph_matrix[row] for row, i in enumerate(ids)}
        drugs = DrugFeatureSet(fingerprints=fingerprints, embeddings=embeddings)
        for seed in seeds:
            plan = random_split(dataset, split_ratio, seed)
            metrics = evaluate_split(
                dataset, plan, drugs, contexts, replace(scorer_config, seed=seed)
            )
            rows.append((setting, seed, metrics["test_auroc"]))
    return rows
