"""Circular substructure fingerprints and bit-vector similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .molgraph import MolecularGraph
from .substructure import wl_patterns

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


@dataclass
class Fingerprint:
    """Fixed-width bit vector for one drug."""

    drug_id: str
    bits: np.ndarray
    radius: int

    def popcount(self) -> int:
        return int(self.bits.sum())


def morgan_fingerprint(g: MolecularGraph, radius: int = 2, n_bits: int = 256) -> Fingerprint:
    """Hash circular-neighborhood identifiers into a bit vector.

    The identifiers are the canonical relabeling strings at depths
    0..radius; each unique identifier sets the bit at its 64-bit FNV-1a
    hash modulo ``n_bits``.
    """
    if n_bits < 1 or (n_bits & (n_bits - 1)) != 0:
        raise ValueError("bit count must be a power of two")
    bits = np.zeros(n_bits, dtype=bool)
    for pattern in wl_patterns(g, radius):
        bits[fnv1a_64(pattern.canonical.encode("utf-8")) % n_bits] = True
    return Fingerprint(g.source_id, bits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """Intersection over union of set bits; two empty vectors score 1.0."""
    if a.bits.shape != b.bits.shape:
        raise LengthMismatch(
            f"fingerprint widths differ: {a.bits.shape[0]} vs {b.bits.shape[0]}"
        )
    union = int(np.logical_or(a.bits, b.bits).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a.bits, b.bits).sum())
    return inter / union
