"""Gamma step and rank, finite and symbolic backends."""

import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrobench import compacta as cp
from entrobench import gamma as gm
from entrobench.errors import DomainError

import oracles


def acc_example():
    return cp.Acc(F(1, 2), cp.BELOW, F(1, 4), F(1, 4), cp.Points((F(1, 2),)))


def blocks_on_nine() -> gm.FiniteRelation:
    space = gm.FiniteSpace.line_grid(9)
    m = np.eye(9, dtype=bool)
    m[0:5, 0:5] = True
    m[4:9, 4:9] = True
    return gm.FiniteRelation(space, m)


class TestFiniteStep:
    def test_transitive_input_with_zero_eps_only_gains_diagonal(self):
        space = gm.FiniteSpace.line_grid(3)
        E = gm.FiniteRelation.from_pairs(space, [(0, 1), (1, 0)])
        out = gm.gamma_step_finite(E, 0)
        assert out.pairs() == frozenset(
            [(0, 1), (1, 0), (0, 0), (1, 1), (2, 2)]
        )

    def test_full_square_is_fixed(self):
        space = gm.FiniteSpace.line_grid(9)
        full = gm.FiniteRelation.full(space)
        assert gm.gamma_step_finite(full, F(1, 8)) == full

    def test_shared_point_blocks_close_in_one_step(self):
        out = gm.gamma_step_finite(blocks_on_nine(), 0)
        assert out.is_full()

    def test_matches_brute_closure_oracle(self):
        space = gm.FiniteSpace.line_grid(9)
        pairs = [(0, 3), (3, 0), (3, 7), (7, 3), (5, 6), (6, 5)]
        E = gm.FiniteRelation.from_pairs(space, pairs)
        out = gm.gamma_step_finite(E, 0)
        expected = oracles.brute_transitive_closure(
            set(pairs) | {(i, i) for i in range(9)}
        )
        assert out.pairs() == frozenset(expected)

    def test_diagonal_fixed_at_every_eps(self):
        space = gm.FiniteSpace.line_grid(9)
        diag = gm.FiniteRelation.diagonal(space)
        for eps in [F(0), F(1, 8), F(1, 2), F(1)]:
            assert gm.gamma_step_finite(diag, eps) == diag

    def test_fatten_uses_metric_ball(self):
        space = gm.FiniteSpace.line_grid(9)
        E = gm.FiniteRelation.from_pairs(space, [(0, 8), (8, 0)])
        out = gm.gamma_step_finite(E, F(1, 8))
        assert (1, 7) in out.pairs()
        assert (2, 6) not in out.pairs()

    def test_symmetrize_warning(self):
        space = gm.FiniteSpace.line_grid(3)
        m = np.zeros((3, 3), dtype=bool)
        m[0, 1] = True
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rel = gm.FiniteRelation(space, m)
        assert any("symmetrizing" in str(w.message) for w in caught)
        assert rel.matrix[1, 0]

    @given(st.integers(0, 400), st.integers(2, 10))
    @settings(max_examples=40, deadline=None)
    def test_monotone_and_diagonal_absorbing(self, seed, n):
        rng = np.random.default_rng(seed)
        m = rng.random((n, n)) < 0.25
        m = m | m.T
        space = gm.FiniteSpace.line_grid(n)
        E = gm.FiniteRelation(space, m)
        out = gm.gamma_step_finite(E, F(1, 2 * n))
        assert (E.matrix & ~out.matrix).sum() == 0
        assert out.matrix.diagonal().all()

    @given(st.integers(0, 400), st.integers(2, 10))
    @settings(max_examples=40, deadline=None)
    def test_zero_eps_rank_at_most_one(self, seed, n):
        rng = np.random.default_rng(seed)
        m = rng.random((n, n)) < 0.3
        m = m | m.T
        E = gm.FiniteRelation(gm.FiniteSpace.line_grid(n), m)
        rank, _ = gm.gamma_rank_finite(E, 0)
        assert rank <= 1


class TestFiniteRank:
    def test_full_rank_zero(self):
        space = gm.FiniteSpace.line_grid(9)
        assert gm.gamma_rank_finite(gm.FiniteRelation.full(space), F(1, 8))[0] == 0

    def test_nine_grid_blocks(self):
        rank, fixed = gm.gamma_rank_finite(blocks_on_nine(), 0)
        assert rank == 1 and fixed.is_full()

    def test_diagonal_rank_zero(self):
        space = gm.FiniteSpace.line_grid(9)
        rank, fixed = gm.gamma_rank_finite(gm.FiniteRelation.diagonal(space), F(1, 8))
        assert rank == 0
        assert fixed.pair_count() == 9

    def test_trace_is_strictly_growing(self):
        trace = gm.gamma_trace_finite(blocks_on_nine(), 0)
        counts = [r.pair_count() for r in trace]
        assert counts == sorted(set(counts))


class TestSymbolic:
    def test_points_base_steps_to_full(self):
        R = gm.IntervalSquareRelation(cp.Points((F(1, 2),)))
        assert gm.gamma_step_symbolic(R).is_full()

    def test_full_is_fixed(self):
        R = gm.IntervalSquareRelation(cp.EMPTY)
        assert gm.gamma_step_symbolic(R) == R

    def test_acc_base_steps_to_target(self):
        R = gm.IntervalSquareRelation(acc_example())
        assert gm.gamma_step_symbolic(R).base == cp.Points((F(1, 2),))

    def test_rank_equals_cb_rank(self):
        cases = [
            (cp.Points((F(1, 2),)), 1, True),
            (cp.Perfect(F(1, 4), F(3, 4)), 0, False),
            (acc_example(), 2, True),
            (cp.Acc(F(1, 2), cp.BELOW, F(1, 4), F(1, 4), acc_example()), 3, True),
        ]
        for base, want_rank, want_full in cases:
            rank, fixed = gm.gamma_rank_symbolic(gm.IntervalSquareRelation(base))
            assert rank == want_rank
            assert fixed.is_full() == want_full
            assert rank == cp.cb_rank(base)[0]


class TestCrossValidate:
    def test_preconditions(self):
        with pytest.raises(DomainError):
            gm.cross_validate(cp.Points((F(1, 2),)), 8, F(1, 2))
        with pytest.raises(DomainError):
            gm.cross_validate(cp.Points((F(1, 2),)), 64, F(1, 64))

    def test_single_point_agrees(self):
        rep = gm.cross_validate(cp.Points((F(1, 2),)), 64, F(1, 32))
        assert rep["agree"] and rep["symbolic_rank"] == 1
        assert rep["first_unresolved_level"] is None

    def test_depth_two_nest_agrees(self):
        rep = gm.cross_validate(acc_example(), 1024, F(1, 512))
        assert rep["agree"] and rep["symbolic_rank"] == 2

    def test_perfect_flags_level_zero(self):
        rep = gm.cross_validate(cp.Perfect(F(1, 4), F(3, 4)), 256, F(1, 128))
        assert not rep["symbolic_full"]
        assert rep["first_unresolved_level"] == 0

    def test_rank_three_nest_flags_accumulating_level(self):
        nest = cp.Acc(F(1, 2), cp.BELOW, F(1, 4), F(1, 4), acc_example())
        rep = gm.cross_validate(nest, 1024, F(1, 256))
        assert rep["symbolic_rank"] == 3
        assert rep["agree"] or rep["first_unresolved_level"] is not None
