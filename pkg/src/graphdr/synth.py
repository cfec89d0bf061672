"""Synthetic benchmark data: random small molecules plus labeled pairs.

Molecules are random trees over C, N, O, S with a few extra ring bonds,
serialized to SMILES.  Pair labels are planted: the probability that a
(drug, drug, context) triple is positive rises with the substructure
overlap of the two drugs, shifted by a per-context offset, so learned
representations have real signal to recover while labels stay noisy.
"""

from __future__ import annotations

import numpy as np

from .errors import GraphDRError
from .molgraph import MolecularGraph, parse_smiles
from .pairscore import Triple
from .substructure import wl_patterns

_ELEMENTS = ("C", "N", "O", "S")
_VALENCE = {"C": 4, "N": 3, "O": 2, "S": 2}
_OVERLAP_STEEPNESS = 6.0
_CONTEXT_OFFSET_RANGE = (-3.0, 0.0)
_OVERLAP_DEPTH = 2


def _random_molecule(rng: np.random.Generator) -> str:
    """One random tree-plus-rings SMILES over C/N/O/S, single bonds only."""
    n_target = int(rng.integers(6, 19))
    weights = rng.dirichlet((5.0, 1.5, 1.5, 1.0))
    elements = [str(rng.choice(_ELEMENTS, p=weights))]
    parents: list[int] = [-1]
    degree = [0]
    for _ in range(n_target - 1):
        open_slots = [i for i, e in enumerate(elements) if degree[i] < _VALENCE[e]]
        if not open_slots:
            break
        parent = int(open_slots[rng.integers(len(open_slots))])
        elements.append(str(rng.choice(_ELEMENTS, p=weights)))
        parents.append(parent)
        degree.append(1)
        degree[parent] += 1
    n = len(elements)

    children: list[list[int]] = [[] for _ in range(n)]
    for child, parent in enumerate(parents):
        if parent >= 0:
            children[parent].append(child)

    depth = [0] * n
    for v in range(1, n):
        depth[v] = depth[parents[v]] + 1

    def tree_distance(a: int, b: int) -> int:
        da, db = depth[a], depth[b]
        steps = 0
        while da > db:
            a, da, steps = parents[a], da - 1, steps + 1
        while db > da:
            b, db, steps = parents[b], db - 1, steps + 1
        while a != b:
            a, b, steps = parents[a], parents[b], steps + 2
        return steps

    ring_edges: list[tuple[int, int]] = []
    for _ in range(int(rng.integers(0, 3))):
        open_slots = [i for i, e in enumerate(elements) if degree[i] < _VALENCE[e]]
        if len(open_slots) < 2:
            break
        a, b = (int(v) for v in rng.choice(open_slots, size=2, replace=False))
        pair = (min(a, b), max(a, b))
        if pair in ring_edges or tree_distance(a, b) < 2 or len(ring_edges) >= 9:
            continue
        ring_edges.append(pair)
        degree[a] += 1
        degree[b] += 1

    ring_digits: dict[int, list[int]] = {v: [] for v in range(n)}
    for number, (a, b) in enumerate(ring_edges, start=1):
        ring_digits[a].append(number)
        ring_digits[b].append(number)

    def write(v: int) -> str:
        text = elements[v] + "".join(str(d) for d in ring_digits[v])
        branches = children[v]
        for child in branches[:-1]:
            text += "(" + write(child) + ")"
        if branches:
            text += write(branches[-1])
        return text

    return write(0)


def generate_drugs(n_drugs: int, rng: np.random.Generator) -> list[tuple[str, str]]:
    """(drug_id, smiles) rows; ids are zero-padded in generation order."""
    if n_drugs < 10:
        raise GraphDRError("need at least 10 drugs")
    width = max(4, len(str(n_drugs - 1)))
    return [(f"D{i:0{width}d}", _random_molecule(rng)) for i in range(n_drugs)]


def pattern_overlap(a: MolecularGraph, b: MolecularGraph, depth: int = _OVERLAP_DEPTH) -> float:
    """Jaccard overlap of the two drugs' unique substructure patterns."""
    pa = set(wl_patterns(a, depth))
    pb = set(wl_patterns(b, depth))
    union = len(pa | pb)
    return len(pa & pb) / union if union else 1.0


def generate_triples(
    drugs: list[tuple[str, MolecularGraph]],
    n_contexts: int,
    n_triples: int,
    rng: np.random.Generator,
) -> list[Triple]:
    """Distinct labeled triples under the planted overlap rule.

    P(label = 1) = sigmoid(6 * overlap + context offset) with offsets
    drawn once per context from [-3, 0].  Every (pair, context)
    combination appears at most once, so labels are well-defined noisy
    draws rather than contradictions.
    """
    if n_contexts < 1:
        raise GraphDRError("need at least one context")
    n = len(drugs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    space = len(pairs) * n_contexts
    if n_triples < 1 or n_triples > space:
        raise GraphDRError(
            f"cannot draw {n_triples} distinct triples from {space} combinations"
        )
    contexts = [f"c{k}" for k in range(n_contexts)]
    offsets = rng.uniform(*_CONTEXT_OFFSET_RANGE, size=n_contexts)
    chosen = rng.choice(space, size=n_triples, replace=False)
    overlap_cache: dict[tuple[int, int], float] = {}
    records: list[Triple] = []
    for combo in chosen:
        pair_idx, ctx_idx = divmod(int(combo), n_contexts)
        i, j = pairs[pair_idx]
        if (i, j) not in overlap_cache:
            overlap_cache[(i, j)] = pattern_overlap(drugs[i][1], drugs[j][1])
        logit = _OVERLAP_STEEPNESS * overlap_cache[(i, j)] + offsets[ctx_idx]
        probability = 1.0 / (1.0 + np.exp(-logit))
        label = int(rng.random() < probability)
        a, b = (i, j) if rng.random() < 0.5 else (j, i)
        records.append(Triple(drugs[a][0], drugs[b][0], contexts[ctx_idx], label))
    return records


def generate_dataset(
    n_drugs: int, n_contexts: int, n_triples: int, seed: int
) -> tuple[list[tuple[str, str]], list[Triple]]:
    """Full synthetic dataset: drug rows plus labeled triples."""
    rng = np.random.default_rng(seed)
    drug_rows = generate_drugs(n_drugs, rng)
    graphs = [(d, parse_smiles(d, s)) for d, s in drug_rows]
    return drug_rows, generate_triples(graphs, n_contexts, n_triples, rng)
