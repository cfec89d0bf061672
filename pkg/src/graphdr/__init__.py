"""Distributed representations of molecular graphs for drug pair scoring.

The pipeline: parse SMILES into heavy-atom graphs, induce substructure
patterns (neighborhood relabeling or shortest paths), learn one vector
per graph with skipgram negative sampling, then feed the vectors (and/or
hashed fingerprints) into an encoder-decoder scorer for labeled
(drug, drug, context) triples.
"""

__version__ = "0.1.0"

from .errors import GraphDRError
from .molgraph import AtomLabel, MolecularGraph, parse_smiles
from .substructure import Inducer, Pattern, PatternVocabulary, build_vocabulary
from .corpus import Corpus, UnigramTable, build_corpus, unigram_distribution
from .skipgram import EmbeddingTable, SkipgramConfig
from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto
from .pairscore import (
    ContextFeatureSet,
    DrugFeatureSet,
    PairScorer,
    PairScorerConfig,
    Triple,
    TripleDataset,
)
from .evaluation import SplitPlan, auroc, cold_split, random_split

__all__ = [
    "AtomLabel",
    "ContextFeatureSet",
    "Corpus",
    "DrugFeatureSet",
    "EmbeddingTable",
    "Fingerprint",
    "GraphDRError",
    "Inducer",
    "MolecularGraph",
    "PairScorer",
    "PairScorerConfig",
    "Pattern",
    "PatternVocabulary",
    "SkipgramConfig",
    "SplitPlan",
    "Triple",
    "TripleDataset",
    "UnigramTable",
    "auroc",
    "build_corpus",
    "build_vocabulary",
    "cold_split",
    "morgan_fingerprint",
    "parse_smiles",
    "random_split",
    "tanimoto",
    "unigram_distribution",
]
