"""Hashed circular fingerprints and Tanimoto similarity."""

import numpy as np
import pytest

import oracles
from graphdr.errors import DepthTooLarge, LengthMismatch
from graphdr.fingerprint import Fingerprint, fnv1a_64, morgan_fingerprint, tanimoto
from graphdr.molgraph import parse_smiles
from graphdr.substructure import wl_patterns


def fp_of(bits_on, width=8, drug_id="x"):
    bits = np.zeros(width, dtype=bool)
    bits[list(bits_on)] = True
    return Fingerprint(drug_id, bits, radius=2)


class TestFnv1a:
    def test_known_vectors(self):
        # published 64-bit FNV-1a test values
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a_64(b"foobar") == 0x85944171F73967E8

    def test_matches_folded_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            data = bytes(rng.integers(0, 256, size=int(rng.integers(0, 40))))
            assert fnv1a_64(data) == oracles.fnv1a_reference(data)

    def test_stays_in_64_bits(self):
        assert fnv1a_64(b"\xff" * 100) < 1 << 64


class TestMorganFingerprint:
    def test_width_must_be_power_of_two(self):
        g = parse_smiles("x", "CCO")
        for bad in (0, 3, 100, 257):
            with pytest.raises(ValueError):
                morgan_fingerprint(g, n_bits=bad)
        for ok in (1, 2, 256, 1024):
            assert morgan_fingerprint(g, n_bits=ok).bits.shape == (ok,)

    def test_bits_are_hashed_identifiers(self):
        g = parse_smiles("x", "CC(O)N")
        fp = morgan_fingerprint(g, radius=2, n_bits=64)
        expected = {
            fnv1a_64(p.canonical.encode()) % 64 for p in wl_patterns(g, 2)
        }
        assert set(np.flatnonzero(fp.bits).tolist()) == expected
        assert fp.drug_id == "x"
        assert fp.radius == 2

    def test_atom_order_invariant(self):
        a = morgan_fingerprint(parse_smiles("a", "CCO"))
        b = morgan_fingerprint(parse_smiles("b", "OCC"))
        assert np.array_equal(a.bits, b.bits)

    def test_different_molecules_differ(self):
        a = morgan_fingerprint(parse_smiles("a", "CCO"))
        b = morgan_fingerprint(parse_smiles("b", "c1ccccc1"))
        assert not np.array_equal(a.bits, b.bits)

    def test_radius_zero_counts_atom_types(self):
        fp = morgan_fingerprint(parse_smiles("x", "CCCC"), radius=0, n_bits=128)
        assert fp.popcount() == 1

    def test_radius_cap_enforced(self):
        with pytest.raises(DepthTooLarge):
            morgan_fingerprint(parse_smiles("x", "CC"), radius=9)

    def test_popcount(self):
        fp = fp_of({1, 3, 5})
        assert fp.popcount() == 3


class TestTanimoto:
    def test_identity(self):
        fp = morgan_fingerprint(parse_smiles("x", "CCOc1ccccc1"))
        assert tanimoto(fp, fp) == 1.0

    def test_disjoint(self):
        assert tanimoto(fp_of({0, 1}), fp_of({2, 3})) == 0.0

    def test_hand_computed_overlap(self):
        assert tanimoto(fp_of({1, 2}), fp_of({2, 3})) == pytest.approx(1 / 3)

    def test_symmetry(self):
        a = morgan_fingerprint(parse_smiles("a", "CCO"))
        b = morgan_fingerprint(parse_smiles("b", "CCN"))
        assert tanimoto(a, b) == tanimoto(b, a)

    def test_both_empty_is_one(self):
        assert tanimoto(fp_of(set()), fp_of(set())) == 1.0

    def test_width_mismatch_rejected(self):
        with pytest.raises(LengthMismatch):
            tanimoto(fp_of({0}, width=8), fp_of({0}, width=16))

    def test_bounded_by_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = fp_of(set(rng.integers(0, 16, 5).tolist()), width=16)
            b = fp_of(set(rng.integers(0, 16, 5).tolist()), width=16)
            assert 0.0 <= tanimoto(a, b) <= 1.0
