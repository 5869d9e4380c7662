"""Typical sets, binning, and robust joint typicality."""

import math

import numpy as np
import pytest

import relaycast as rc
from relaycast.errors import (
    DegenerateTypicalSet,
    LengthMismatch,
    TooLarge,
    UnknownVariable,
)


class TestTypicalSourceCodebook:
    def test_uniform_binary_m4(self):
        # oracle: enumerate all 16 words, keep those with 1..3 ones
        cb = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 4, 0.5)
        assert cb.M == 14
        ones = cb.sequences.sum(axis=1)
        assert set(ones.tolist()) == {1, 2, 3}

    def test_point_mass_source(self):
        cb = rc.build_typical_source_codebook(np.array([1.0, 0.0]), 5, 0.5)
        assert cb.M == 1
        np.testing.assert_array_equal(cb.sequences[0], np.zeros(5))

    def test_degenerate_empty_set(self):
        with pytest.raises(DegenerateTypicalSet):
            rc.build_typical_source_codebook(np.array([0.5, 0.5]), 5, 0.0)

    def test_enumeration_cap(self):
        with pytest.raises(TooLarge):
            rc.build_typical_source_codebook(np.array([0.5, 0.5]), 21, 1.0)

    def test_cardinality_bound(self):
        # M <= 2^{m (H + eps)} up to rounding
        for marg, m, eps in [(np.array([0.5, 0.5]), 8, 0.5),
                             (np.array([0.8, 0.2]), 10, 0.8),
                             (np.array([0.5, 0.3, 0.2]), 6, 1.0)]:
            cb = rc.build_typical_source_codebook(marg, m, eps)
            h = -(marg[marg > 0] * np.log2(marg[marg > 0])).sum()
            assert cb.M <= math.ceil(2 ** (m * (h + eps)))

    def test_deterministic_order(self):
        a = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 6, 0.6)
        b = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 6, 0.6)
        np.testing.assert_array_equal(a.sequences, b.sequences)
        # lexicographic
        keys = [tuple(s) for s in a.sequences]
        assert keys == sorted(keys)


class TestAssignBins:
    def test_zero_rate_single_bin(self):
        cb = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 6, 1.0)
        bins = rc.assign_bins(cb, 0.0, seed=3)
        assert bins.num_bins == 1
        assert set(bins.map.tolist()) == {0}

    def test_same_seed_same_map(self):
        cb = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 6, 1.0)
        a = rc.assign_bins(cb, 0.7, seed=42)
        b = rc.assign_bins(cb, 0.7, seed=42)
        np.testing.assert_array_equal(a.map, b.map)
        c = rc.assign_bins(cb, 0.7, seed=43)
        assert not np.array_equal(a.map, c.map)

    def test_high_rate_mostly_singletons(self):
        # birthday bound: expected colliding-pair count ~ M^2 / (2 M_k)
        cb = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 8, 3.0)
        collisions = []
        for seed in range(20):
            bins = rc.assign_bins(cb, 1.5, seed=seed)   # 4096 bins, M=256
            counts = np.bincount(bins.map, minlength=bins.num_bins)
            collisions.append(int((counts > 1).sum()))
        expected = cb.M ** 2 / (2 * 4096)
        assert expected / 2 <= np.mean(collisions) <= expected * 2

    def test_distinct_terminals_independent(self):
        cb = rc.build_typical_source_codebook(np.array([0.5, 0.5]), 8, 3.0)
        a = rc.assign_bins(cb, 1.0, seed=5, terminal=1)
        b = rc.assign_bins(cb, 1.0, seed=5, terminal=2)
        assert not np.array_equal(a.map, b.map)


class TestJointTypicality:
    def test_law_of_large_numbers(self):
        ref = rc.uniform_pmf(("A", "B"), (2, 2))
        rng = np.random.default_rng(42)
        hits = 0
        for _ in range(1000):
            flat = rng.integers(0, 4, size=200)
            if rc.joint_typicality({"A": flat // 2, "B": flat % 2}, ref, 0.3):
                hits += 1
        assert hits / 1000 >= 0.95

    def test_constant_sequence_atypical(self):
        ref = rc.uniform_pmf(("A",), (2,))
        assert not rc.joint_typicality({"A": np.zeros(100, dtype=int)},
                                       ref, 0.5)

    def test_zero_probability_cell_rejected(self):
        diag = rc.JointPmf(("A", "B"), (2, 2), [0.5, 0, 0, 0.5])
        a = np.array([0, 1, 0, 1] * 25)
        b = a.copy()
        b[0] ^= 1           # one forbidden (0,1) cell
        assert rc.joint_typicality({"A": a, "B": a}, diag, 0.5)
        assert not rc.joint_typicality({"A": a, "B": b}, diag, 0.5)

    def test_length_mismatch(self):
        ref = rc.uniform_pmf(("A", "B"), (2, 2))
        with pytest.raises(LengthMismatch):
            rc.joint_typicality({"A": [0, 1], "B": [0, 1, 0]}, ref, 0.5)

    def test_unknown_label(self):
        ref = rc.uniform_pmf(("A",), (2,))
        with pytest.raises(UnknownVariable):
            rc.joint_typicality({"Z": [0, 1]}, ref, 0.5)

    def test_matches_exact_definition(self):
        # cross-check against a direct cell-by-cell evaluation
        rng = np.random.default_rng(9)
        ref = rc.random_pmf(("A", "B"), (2, 3), rng, positive=True)
        for _ in range(200):
            n = 40
            a = rng.integers(0, 2, n)
            b = rng.integers(0, 3, n)
            got = rc.joint_typicality({"A": a, "B": b}, ref, 0.4)
            want = True
            for i in range(2):
                for j in range(3):
                    freq = int(((a == i) & (b == j)).sum())
                    p = ref.probs[i, j]
                    if abs(freq - n * p) > 0.4 * n * p + 1e-9:
                        want = False
            assert got == want
