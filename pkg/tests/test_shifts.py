"""Vertex shifts: consistency, independence, density verdicts, entropy."""

import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrobench import shifts as sh
from entrobench.errors import DomainError, ResourceError, ValidationError

import oracles

C = sh.Cylinder


def allowed_words(s: sh.Sft, length: int):
    out = []

    def extend(word, last):
        if len(word) == length:
            out.append("".join(word))
            return
        for j, sym in enumerate(s.alphabet):
            if s.matrix[last, j]:
                extend(word + [sym], j)

    for i, sym in enumerate(s.alphabet):
        extend([sym], i)
    return out


class TestConstruction:
    def test_full_shift(self):
        fs = sh.full_shift(2)
        assert fs.alphabet == ("0", "1")
        assert fs.forbidden_words == ()
        assert fs.matrix.all()

    def test_golden_mean(self):
        gm = sh.golden_mean()
        assert gm.alphabet == ("0", "1")
        assert gm.forbidden_words == ("11",)
        assert not gm.matrix[1, 1]

    def test_pruning_removes_stranded_symbols(self):
        m = np.array(
            [[True, True, False], [True, False, False], [True, False, False]]
        )
        s = sh.Sft(("a", "b", "c"), m)
        assert s.alphabet == ("a", "b")

    def test_empty_essential_part_rejected(self):
        with pytest.raises(ValidationError):
            sh.Sft(("a", "b"), np.array([[False, True], [False, False]]))

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(ValidationError):
            sh.Sft(("a", "a"), np.ones((2, 2), dtype=bool))

    def test_forbidden_word_validation(self):
        with pytest.raises(ValidationError):
            sh.from_forbidden_words(("0", "1"), ("12",))
        with pytest.raises(ValidationError):
            sh.from_forbidden_words(("0", "1"), ("",))

    def test_recoded_long_forbidden_word(self):
        s = sh.from_forbidden_words(("0", "1"), ("000",))
        assert s.alphabet == ("00", "01", "10", "11")
        tribonacci = 1.8392867552141612
        assert abs(sh.sft_entropy(s, 1e-13) - math.log(tribonacci)) < 1e-9


class TestCylinder:
    def test_empty_word_rejected(self):
        with pytest.raises(ValidationError):
            C("")

    def test_bad_anchor_rejected(self):
        with pytest.raises(ValidationError):
            C("0", anchor="1")

    def test_unknown_symbol_rejected(self):
        with pytest.raises(ValidationError):
            sh.golden_mean().validate_cylinder(C("2"))

    def test_internally_forbidden_word_rejected(self):
        with pytest.raises(ValidationError):
            sh.golden_mean().validate_cylinder(C("11"))


class TestConsistent:
    def test_full_shift_anything_goes(self):
        assert sh.consistent(sh.full_shift(2), [(0, C("0")), (5, C("1"))])

    def test_adjacent_forbidden(self):
        gm = sh.golden_mean()
        assert not sh.consistent(gm, [(0, C("1")), (1, C("1"))])

    def test_gap_allows_filler(self):
        gm = sh.golden_mean()
        assert sh.consistent(gm, [(0, C("1")), (2, C("1"))])

    def test_overlap_conflict(self):
        fs = sh.full_shift(2)
        assert not sh.consistent(fs, [(0, C("00")), (1, C("1"))])
        assert sh.consistent(fs, [(0, C("00")), (1, C("0"))])

    def test_cycle_gap_arithmetic(self):
        cyc = sh.cycle_shift(6)
        assert sh.consistent(cyc, [(0, C("0")), (6, C("0"))])
        assert not sh.consistent(cyc, [(0, C("0")), (3, C("0"))])
        assert sh.consistent(cyc, [(0, C("0")), (7, C("1"))])

    def test_negative_position_rejected(self):
        with pytest.raises(DomainError):
            sh.consistent(sh.full_shift(2), [(-1, C("0"))])

    def test_anchor_offsets_word(self):
        gm = sh.golden_mean()
        # Anchored cylinder places "1" at absolute position 1.
        assert not sh.consistent(gm, [(0, C("1", anchor=1)), (2, C("1"))])


class TestIndependence:
    def test_full_shift_window(self):
        assert sh.is_independence_set(sh.full_shift(2), {0, 1, 2}, C("0"), C("1"))

    def test_adjacent_positions_fail(self):
        assert not sh.is_independence_set(sh.golden_mean(), {0, 1}, C("0"), C("1"))

    def test_spread_positions_pass(self):
        assert sh.is_independence_set(sh.golden_mean(), {0, 2}, C("0"), C("1"))

    def test_guard(self):
        with pytest.raises(ResourceError):
            sh.is_independence_set(sh.full_shift(2), range(25), C("0"), C("1"))

    @given(st.sets(st.integers(0, 7), min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_on_golden_mean(self, positions):
        gm = sh.golden_mean()
        words = allowed_words(gm, 8)
        got = sh.is_independence_set(gm, positions, C("0"), C("1"))
        want = oracles.brute_is_independence_set(words, sorted(positions), "0", "1")
        assert got == want

    @given(st.sets(st.integers(0, 7), min_size=1, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_shift_invariance(self, positions):
        gm = sh.golden_mean()
        a = sh.is_independence_set(gm, positions, C("0"), C("1"))
        b = sh.is_independence_set(gm, {p + 1 for p in positions}, C("0"), C("1"))
        assert a == b

    @given(st.sets(st.integers(0, 9), min_size=2, max_size=5), st.integers(0, 100))
    @settings(max_examples=40, deadline=None)
    def test_subsets_stay_independent(self, positions, seed):
        gm = sh.golden_mean()
        if not sh.is_independence_set(gm, positions, C("0"), C("1")):
            return
        import random

        sub = set(random.Random(seed).sample(sorted(positions), len(positions) - 1))
        if sub:
            assert sh.is_independence_set(gm, sub, C("0"), C("1"))


class TestDensity:
    def test_full_shift_density_one(self):
        r = sh.max_independence_density(sh.full_shift(2), C("0"), C("1"), 8)
        assert r.positions == tuple(range(8))
        assert r.density == 1 and r.exact

    def test_golden_mean_exact_windows(self):
        gm = sh.golden_mean()
        r8 = sh.max_independence_density(gm, C("0"), C("1"), 8)
        assert r8.positions == (0, 2, 4, 6) and r8.density == F(1, 2)
        for n in (10, 12):
            assert sh.max_independence_density(gm, C("0"), C("1"), n).density == F(1, 2)

    def test_greedy_mode_flagged(self):
        gm = sh.golden_mean()
        r = sh.max_independence_density(gm, C("0"), C("1"), 13)
        assert not r.exact
        assert r.positions == (0, 2, 4, 6, 8, 10, 12)

    @given(st.integers(1, 7))
    @settings(max_examples=10, deadline=None)
    def test_matches_brute_force(self, n):
        gm = sh.golden_mean()
        words = allowed_words(gm, n)
        got = sh.max_independence_density(gm, C("0"), C("1"), n)
        want_pos, want_size = oracles.brute_max_independence(words, n, "0", "1")
        assert len(got.positions) == want_size
        assert list(got.positions) == want_pos


class TestVerdicts:
    def test_full_shift_positive_at_density_one(self):
        v = sh.ie_pair_verdict(sh.full_shift(2), C("0"), C("1"), 1, 8)
        assert v.positive

    def test_golden_mean_half_positive(self):
        v = sh.ie_pair_verdict(sh.golden_mean(), C("0"), C("1"), F(1, 2), 8)
        assert v.positive

    def test_golden_mean_three_quarters_negative(self):
        v = sh.ie_pair_verdict(sh.golden_mean(), C("0"), C("1"), F(3, 4), 8)
        assert not v.positive and v.negative_at == 4

    def test_positive_verdict_implies_density(self):
        for s, r in ((sh.full_shift(2), F(1)), (sh.golden_mean(), F(1, 2))):
            assert sh.ie_pair_verdict(s, C("0"), C("1"), r, 8).positive
            for l in range(1, 9):
                d = sh.max_independence_density(s, C("0"), C("1"), l)
                assert d.density >= r

    def test_parameter_validation(self):
        gm = sh.golden_mean()
        with pytest.raises(DomainError):
            sh.ie_pair_verdict(gm, C("0"), C("1"), F(3, 2), 4)
        with pytest.raises(DomainError):
            sh.ie_pair_verdict(gm, C("0"), C("1"), F(1, 2), 13)


class TestEntropy:
    def test_golden_mean(self):
        target = math.log((1 + math.sqrt(5)) / 2)
        assert abs(sh.sft_entropy(sh.golden_mean(), 1e-10) - target) < 1e-6

    def test_full_shifts_positive_with_full_density(self):
        for k in (2, 3):
            assert abs(sh.sft_entropy(sh.full_shift(k)) - math.log(k)) < 1e-9
            d = sh.max_independence_density(sh.full_shift(k), C("0"), C("1"), 6)
            assert d.density == 1

    def test_single_self_loop(self):
        assert abs(sh.sft_entropy(sh.full_shift(1))) < 1e-9

    def test_cycles_have_zero_entropy_and_no_pairs(self):
        for n in range(2, 7):
            cyc = sh.cycle_shift(n)
            assert abs(sh.sft_entropy(cyc)) < 1e-9
            for d in range(1, 2 * n):
                assert not sh.is_independence_set(cyc, {0, d}, C("0"), C("1"))

    def test_reducible_warns(self):
        m = np.array([[True, True], [False, True]])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            value = sh.sft_entropy(sh.Sft(("a", "b"), m))
        assert any("reducible" in str(w.message) for w in caught)
        assert abs(value) < 1e-3

    def test_tolerance_validation(self):
        with pytest.raises(DomainError):
            sh.sft_entropy(sh.golden_mean(), 0.0)

    def test_word_count_cross_check(self):
        gm = sh.golden_mean()
        assert [sh.word_count(gm, k) for k in range(1, 8)] == [2, 3, 5, 8, 13, 21, 34]
        slope = math.log(sh.word_count(gm, 20)) / 20
        assert abs(slope - sh.sft_entropy(gm)) < 5e-2

    def test_word_count_full_shift(self):
        assert sh.word_count(sh.full_shift(2), 10) == 1024
