import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from permdot.sumsets import (
    additive_energy,
    falling_factorial_energy_bound,
    halasz_block_decomposition,
    k_fold_distinct_sums,
    positive_majority_subset,
    subset_sum_count,
    subset_sums,
    supportive_halasz_lower_bound,
)

from .conftest import rationals

F = Fraction


def brute_energy(D, k):
    """Count 2k-tuples directly."""
    D = list(D)
    sums = [sum(t) for t in itertools.product(D, repeat=k)]
    return sum(1 for x in sums for y in sums if x == y)


def brute_subset_sums(D):
    D = list(D)
    return {sum((D[i] for i in range(len(D)) if mask >> i & 1), F(0)) for mask in range(1 << len(D))}


def brute_blocks(P, k):
    """Blocks L_t + k^P_t straight from the definitions."""
    P = sorted(P)
    M = len(P)
    out = []
    for t in range(M // k):
        L = sum(P[M - k * t:], F(0))
        prefix = P[: M - k * t]
        out.append({L + sum(c) for c in itertools.combinations(prefix, k)})
    return out


increment_sets = st.lists(rationals, min_size=1, max_size=9, unique=True)


class TestSubsetSums:
    def test_dyadic(self):
        assert subset_sums([1, 2, 4]) == frozenset(F(x) for x in range(8))

    def test_empty(self):
        assert subset_sums([]) == {F(0)}

    def test_collision_at_zero(self):
        assert subset_sums([-1, 1]) == {F(-1), F(0), F(1)}

    def test_guard(self):
        with pytest.raises(ValueError):
            subset_sums(range(1, 32))
        assert subset_sum_count(range(1, 32), cap=31) == 31 * 32 // 2 + 1

    def test_repeats_rejected(self):
        with pytest.raises(ValueError):
            subset_sums([1, 1])

    @pytest.mark.parametrize("method", ["enumerate", "mitm", "bitmap"])
    def test_methods_agree_with_brute(self, method):
        rng = random.Random(3)
        for _ in range(60):
            m = rng.randint(0, 12)
            D = {F(rng.randint(-40, 40), rng.randint(1, 6)) for _ in range(m)}
            assert subset_sums(D, method=method) == brute_subset_sums(D)

    def test_full_enumeration_equals_mitm(self):
        rng = random.Random(11)
        for _ in range(100):
            m = rng.randint(0, 16)
            D = {F(rng.randint(-10**6, 10**6), rng.randint(1, 30)) for _ in range(m)}
            assert subset_sum_count(D, method="enumerate") == subset_sum_count(D, method="mitm")

    def test_mitm_beyond_twenty(self):
        D = [2**i for i in range(22)]
        assert subset_sum_count(D, method="mitm") == 2**22
        assert subset_sum_count(range(1, 25), method="mitm") == 24 * 25 // 2 + 1

    def test_huge_values_fall_back_to_python_ints(self):
        D = [F(3**80 + i, 7) for i in range(10)]
        assert subset_sum_count(D) == len(brute_subset_sums(D))


class TestEnergy:
    def test_singleton(self):
        assert additive_energy([5], 2).energy == 1

    def test_small_ap(self):
        assert additive_energy([1, 2, 3], 2).energy == 19 == brute_energy([1, 2, 3], 2)

    def test_sidon(self):
        assert additive_energy([1, 2, 5, 11], 2).energy == 28 == brute_energy([1, 2, 5, 11], 2)

    def test_k_range(self):
        with pytest.raises(ValueError):
            additive_energy([1, 2], 4)

    def test_report_fields(self):
        r = additive_energy([1, 2, 3], 3)
        assert r.k == 3 and r.tuple_count_checked == 27 and r.energy == brute_energy([1, 2, 3], 3)

    @given(st.lists(rationals, min_size=1, max_size=6, unique=True), st.integers(1, 3))
    def test_matches_brute(self, D, k):
        assert additive_energy(D, k).energy == brute_energy(D, k)

    @given(increment_sets, rationals, st.integers(1, 3))
    def test_translation_invariant(self, D, c, k):
        assert additive_energy(D, k).energy == additive_energy([x + c for x in D], k).energy

    @given(increment_sets, rationals.filter(bool), st.integers(1, 3))
    def test_dilation_invariant(self, D, c, k):
        assert additive_energy(D, k).energy == additive_energy([x * c for x in D], k).energy

    @given(increment_sets, st.integers(1, 3))
    def test_diagonal_lower_bound(self, D, k):
        assert additive_energy(D, k).energy >= len(D) ** k

    @pytest.mark.parametrize("m", [1, 4, 9, 20])
    def test_sidon_formula(self, m):
        from permdot.families import mian_chowla
        assert additive_energy(mian_chowla(m), 2).energy == 2 * m * m - m


class TestKFold:
    def test_pairs(self):
        assert k_fold_distinct_sums([1, 2, 3], 2) == {3, 4, 5}

    def test_single_pair(self):
        assert k_fold_distinct_sums([1, 2], 2) == {3}

    def test_triples(self):
        assert k_fold_distinct_sums([1, 2, 3, 4], 3) == {6, 7, 8, 9}

    def test_too_small(self):
        with pytest.raises(ValueError):
            k_fold_distinct_sums([1], 2)

    def test_numpy_path(self):
        C = list(range(0, 300, 3))
        assert k_fold_distinct_sums(C, 2) == {a + b for a, b in itertools.combinations(C, 2)}


class TestFallingFactorialBound:
    def test_examples(self):
        assert falling_factorial_energy_bound([1, 2, 3], 2) == F(36, 19)
        assert brute_energy([1, 2], 2) == 6
        assert falling_factorial_energy_bound([1, 2], 2) == F(2, 3)
        assert falling_factorial_energy_bound(["7/3"], 1) == 1

    @given(st.lists(rationals, min_size=3, max_size=8, unique=True), st.integers(2, 3))
    def test_cauchy_schwarz(self, C, k):
        s = len(C)
        assert len(k_fold_distinct_sums(C, k)) * additive_energy(C, k).energy >= math.perm(s, k) ** 2


class TestSignSplit:
    def test_positive_majority(self):
        assert positive_majority_subset([1, 2, -3]) == ((F(1), F(2)), False)

    def test_all_negative(self):
        assert positive_majority_subset([-1, -2]) == ((F(1), F(2)), True)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            positive_majority_subset([0, 1])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            positive_majority_subset([])

    def test_tie_prefers_positive(self):
        assert positive_majority_subset([-5, 3]) == ((F(3),), False)


class TestBlocks:
    def test_one_to_five(self):
        dec = halasz_block_decomposition([1, 2, 3, 4, 5], 2)
        assert dec.levels == (0, 9, 14)
        assert dec.certified_bound == 10
        blocks = brute_blocks([1, 2, 3, 4, 5], 2)
        assert blocks[0] == set(range(3, 10)) and blocks[1] == {12, 13, 14}
        assert [b.size for b in dec.blocks] == [7, 3]
        assert len(subset_sums([1, 2, 3, 4, 5])) == 16

    def test_single_pair(self):
        dec = halasz_block_decomposition([1, 2], 2)
        assert len(dec.blocks) == 1 and dec.certified_bound == 1

    def test_dyadic_k1(self):
        dec = halasz_block_decomposition([1, 2, 4, 8], 1)
        blocks = brute_blocks([1, 2, 4, 8], 1)
        assert blocks == [{1, 2, 4, 8}, {9, 10, 12}, {13, 14}, {15}]
        assert dec.certified_bound == 10 <= len(subset_sums([1, 2, 4, 8])) == 16

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            halasz_block_decomposition([0, 1, 2], 2)

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            halasz_block_decomposition([1], 2)

    @given(st.lists(rationals.filter(lambda x: x > 0), min_size=3, max_size=12, unique=True), st.integers(1, 3))
    def test_blocks_match_definition(self, P, k):
        if len(P) < k:
            return
        dec = halasz_block_decomposition(P, k)
        blocks = brute_blocks(P, k)
        assert [b.size for b in dec.blocks] == [len(s) for s in blocks]
        for t, s in enumerate(blocks):
            assert max(s) == dec.levels[t + 1]
            if t:
                assert min(s) > max(blocks[t - 1])
        for s1, s2 in itertools.combinations(blocks, 2):
            assert not s1 & s2


class TestSupportiveHalasz:
    def test_sidon(self):
        bound, dec = supportive_halasz_lower_bound([1, 2, 5, 11], 2)
        assert len(subset_sums([1, 2, 5, 11])) == 16
        # P = D, blocks: 2^{1,2,5,11} has 6 sums, 2^{1,2} has 1
        assert bound == 7 <= 16

    def test_negation_symmetry(self):
        assert supportive_halasz_lower_bound([-1, -2, -5, -11], 2)[0] == supportive_halasz_lower_bound([1, 2, 5, 11], 2)[0]

    def test_one_to_twelve(self):
        D = list(range(1, 13))
        assert len(subset_sums(D)) == 79
        oracle = sum(len(s) for s in brute_blocks(D, 2))
        assert oracle == 66
        assert supportive_halasz_lower_bound(D, 2)[0] == oracle <= 79

    def test_zero_is_dropped(self):
        bound, dec = supportive_halasz_lower_bound([0, 1, 2, 5, 11], 2)
        assert dec.zero_removed and bound == 7

    @given(st.lists(rationals, min_size=2, max_size=12, unique=True), st.integers(1, 3))
    def test_bound_below_sigma(self, D, k):
        nz = [x for x in D if x != 0]
        pos = sum(x > 0 for x in nz)
        if max(pos, len(nz) - pos) < k:
            return
        bound, dec = supportive_halasz_lower_bound(D, k)
        assert dec.energy_bound <= bound <= len(subset_sums(D))
