"""Exception types shared across the package."""


class GraphDRError(Exception):
    """Base class for every error raised by this library."""


class SmilesParseError(GraphDRError):
    """A SMILES string violates the accepted grammar.

    ``position`` is the 0-based index of the offending character.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class EmptyInput(SmilesParseError):
    """Empty or whitespace-only SMILES string."""


class UnknownElement(SmilesParseError):
    """Character sequence does not name a supported element."""


class MalformedBracketAtom(SmilesParseError):
    """Bracket atom does not follow [isotope?element chiral?Hcount?charge?]."""


class UnmatchedRingClosure(SmilesParseError):
    """Ring-closure digit opened but never closed, or closed twice."""


class UnbalancedBranch(SmilesParseError):
    """Parenthesis without a matching partner."""


class DuplicateDrugId(GraphDRError):
    """Same drug identifier appears twice in one input file."""


class DepthTooLarge(GraphDRError):
    """Requested relabeling depth exceeds the supported maximum."""


class EmptyGraphSet(GraphDRError):
    """Vocabulary construction was given no graphs."""


class UnknownPatternId(GraphDRError):
    """Pattern id falls outside the vocabulary."""


class EmptyCorpus(GraphDRError):
    """No (graph, pattern) occurrences to train on."""


class MalformedEmbeddingFile(GraphDRError):
    """Embedding file header or body cannot be parsed."""


class DimensionMismatch(GraphDRError):
    """Vector widths disagree where they must match."""


class LengthMismatch(GraphDRError):
    """Bit vectors of different lengths were compared."""


class UnknownDrug(GraphDRError):
    """Drug id referenced by a triple has no features."""


class UnknownContext(GraphDRError):
    """Context id referenced by a triple has no features."""


class MissingEmbedding(GraphDRError):
    """Embedding features requested but absent for a drug."""


class ShapeMismatch(GraphDRError):
    """Array shape differs from what the model was built for."""


class EmptyTrainingSet(GraphDRError):
    """Training requested on zero triples."""


class SingleClass(GraphDRError):
    """Ranking metric undefined when only one label value is present."""


class DatasetTooSmall(GraphDRError):
    """Not enough observations (or drugs) to produce the requested split."""


class DegenerateClustering(GraphDRError):
    """Agglomerative clustering could not produce two usable clusters."""
