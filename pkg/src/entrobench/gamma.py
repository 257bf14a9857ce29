"""Closure-and-fatten iteration on relations, in two backends.

The symbolic backend works on relations that are unions of gap-closure
squares over a scheme, where one iteration step is exactly the scheme
derivative.  The finite backend discretizes onto a metric grid and
substitutes eps-fattening for topological closure, so its step count is
resolution dependent; ``cross_validate`` compares the two and reports the
first level the grid cannot resolve instead of failing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import compacta
from .errors import DomainError, ResourceError, ValidationError
from .rationals import frac

# Beyond this, dense bool matrices and their products stop being desk scale.
_MAX_SPACE = 4096


class FiniteSpace:
    """Finite metric space with exact rational distances."""

    def __init__(self, labels, distance: Callable):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("space labels must be distinct")
        if len(self.labels) > _MAX_SPACE:
            raise ResourceError(f"space exceeds {_MAX_SPACE} points")
        self._distance = distance
        self._coords = None

    @classmethod
    def line_grid(cls, n: int) -> "FiniteSpace":
        """n evenly spaced rationals spanning [0, 1]."""
        if n < 2:
            raise DomainError("a line grid needs at least 2 points")
        coords = tuple(Fraction(i, n - 1) for i in range(n))
        space = cls.from_points(coords)
        return space

    @classmethod
    def from_points(cls, points) -> "FiniteSpace":
        """A subset of the rational line with the absolute-value metric."""
        coords = tuple(frac(p) for p in points)
        space = cls(coords, lambda a, b: abs(a - b))
        space._coords = coords
        return space

    def __len__(self):
        return len(self.labels)

    def distance(self, i: int, j: int) -> Fraction:
        return self._distance(self.labels[i], self.labels[j])

    def neighbor_matrix(self, eps) -> np.ndarray:
        """Boolean matrix of index pairs at distance <= eps."""
        eps = frac(eps)
        if eps < 0:
            raise DomainError("eps must be nonnegative")
        n = len(self)
        if self._coords is not None:
            order = sorted(range(n), key=lambda i: self._coords[i])
            near = np.zeros((n, n), dtype=bool)
            j = 0
            for a_pos, i in enumerate(order):
                if j < a_pos:
                    j = a_pos
                while j + 1 < n and self._coords[order[j + 1]] - self._coords[i] <= eps:
                    j += 1
                for b_pos in range(a_pos, j + 1):
                    near[i, order[b_pos]] = True
                    near[order[b_pos], i] = True
            return near
        near = np.eye(n, dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                if self.distance(i, j) <= eps:
                    near[i, j] = near[j, i] = True
        return near


class FiniteRelation:
    """Symmetric set of ordered index pairs over a finite space."""

    def __init__(self, space: FiniteSpace, matrix: np.ndarray):
        if matrix.shape != (len(space), len(space)):
            raise ValidationError("relation matrix shape does not match the space")
        if not np.array_equal(matrix, matrix.T):
            warnings.warn("relation was not symmetric; symmetrizing", stacklevel=3)
            matrix = matrix | matrix.T
        self.space = space
        self.matrix = matrix.astype(bool)

    @classmethod
    def from_pairs(cls, space: FiniteSpace, pairs) -> "FiniteRelation":
        m = np.zeros((len(space), len(space)), dtype=bool)
        for i, j in pairs:
            m[i, j] = True
        return cls(space, m)

    @classmethod
    def diagonal(cls, space: FiniteSpace) -> "FiniteRelation":
        return cls(space, np.eye(len(space), dtype=bool))

    @classmethod
    def full(cls, space: FiniteSpace) -> "FiniteRelation":
        return cls(space, np.ones((len(space), len(space)), dtype=bool))

    def pairs(self) -> frozenset:
        return frozenset(zip(*np.nonzero(self.matrix)))

    def pair_count(self) -> int:
        return int(self.matrix.sum())

    def is_full(self) -> bool:
        return bool(self.matrix.all())

    def __eq__(self, other):
        return (
            isinstance(other, FiniteRelation)
            and self.space is other.space
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):  # pragma: no cover - relations are not dict keys
        return NotImplemented


def _bool_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Float matmul hits BLAS; counts stay exact far beyond desk sizes.
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0.5


def _transitive_closure(m: np.ndarray) -> np.ndarray:
    cur = m.copy()
    while True:
        nxt = cur | _bool_product(cur, cur)
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt


def gamma_step_finite(E: FiniteRelation, eps) -> FiniteRelation:
    """One closure-plus-fattening step at resolution eps.

    Fattening only spreads from off-diagonal pairs; the diagonal is always
    present but never acts as a witness, so the diagonal alone is a fixed
    point at every resolution.
    """
    eps = frac(eps)
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    n = len(E.space)
    eye = np.eye(n, dtype=bool)
    closed = _transitive_closure(E.matrix | eye)
    witnesses = closed & ~eye
    near = E.space.neighbor_matrix(eps)
    fat = _bool_product(_bool_product(near, witnesses), near)
    return FiniteRelation(E.space, closed | fat)


def gamma_rank_finite(E: FiniteRelation, eps) -> tuple:
    """Least n with the n-th step stationary, plus the fixed relation."""
    trace = gamma_trace_finite(E, eps)
    return len(trace) - 1, trace[-1]


def gamma_trace_finite(E: FiniteRelation, eps) -> list:
    """All iterates [E', step(E'), ...] up to and including the fixed point.

    The first entry is the symmetrized input, so the list has rank+1
    entries and consecutive entries differ except for the last pair.
    """
    cur = E
    out = [cur]
    while True:
        nxt = gamma_step_finite(cur, eps)
        if nxt == cur:
            return out
        out.append(nxt)
        cur = nxt


@dataclass(frozen=True)
class IntervalSquareRelation:
    """Union of gap-closure squares of a base scheme, plus the diagonal.

    An empty base denotes the full unit square: the empty set's only gap
    is all of (0,1).
    """

    base: compacta.Scheme

    def is_full(self) -> bool:
        return compacta.is_empty(self.base)


def entropy_square_relation(base: compacta.Scheme) -> IntervalSquareRelation:
    return IntervalSquareRelation(base)


def gamma_step_symbolic(R: IntervalSquareRelation) -> IntervalSquareRelation:
    """One exact step: the base drops to its derivative."""
    return IntervalSquareRelation(compacta.derivative(R.base))


def gamma_rank_symbolic(R: IntervalSquareRelation) -> tuple:
    cur = R
    rank = 0
    while True:
        nxt = gamma_step_symbolic(cur)
        if nxt == cur:
            return rank, cur
        cur = nxt
        rank += 1


def _snap(x: Fraction, n: int) -> int:
    scaled = x * (n - 1)
    return int(scaled + Fraction(1, 2)) if scaled >= 0 else 0


def discretize_squares(A: compacta.Scheme, grid_n: int) -> FiniteRelation:
    """Snap the gap-closure squares of A onto an evenly spaced grid.

    Gaps narrower than half a grid cell collapse to diagonal entries and
    are skipped; the gap stream is width ordered, so enumeration stops at
    the first such gap.
    """
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    space = FiniteSpace.line_grid(grid_n)
    m = np.eye(grid_n, dtype=bool)
    threshold = Fraction(1, 2 * (grid_n - 1))
    for gap in compacta.gap_stream(A):
        if gap.width < threshold:
            break
        i = _snap(gap.lo, grid_n)
        j = _snap(gap.hi, grid_n)
        m[i : j + 1, i : j + 1] = True
    return FiniteRelation(space, m)


def first_unresolved_level(A: compacta.Scheme, eps, depth: int = 12) -> Optional[int]:
    """Least derivative level whose realized points sit closer than 2*eps.

    Levels start at 1; the core level (rank itself) is also checked when
    the scheme has a nonempty perfect core, which is how a Cantor base
    reports level 0.  None means every level is resolvable.
    """
    eps = frac(eps)
    rank, core = compacta.cb_rank(A)
    levels = list(range(1, rank + 1))
    if not compacta.is_empty(core) and rank not in levels:
        levels.append(rank)
    der = A
    results = {}
    for alpha in range(rank + 1):
        if alpha in levels:
            results[alpha] = der
        der = compacta.derivative(der)
    for alpha in sorted(results):
        scheme = results[alpha]
        if compacta.is_empty(scheme):
            continue
        pts = compacta.realize(scheme, depth)
        if any(b - a <= 2 * eps for a, b in zip(pts, pts[1:])):
            return alpha
    return None


def cross_validate(A: compacta.Scheme, grid_n: int, eps) -> dict:
    """Compare the symbolic rank against the discretized rank.

    The report never raises on resolution problems: when the grid cannot
    separate some derivative level, ``first_unresolved_level`` names it
    and ``agree`` reflects the raw comparison.
    """
    eps = frac(eps)
    if grid_n < 16:
        raise DomainError("grid_n must be at least 16")
    if eps < Fraction(2, grid_n):
        raise DomainError("eps below grid resolution; need eps >= 2/grid_n")
    sym_rank, sym_fixed = gamma_rank_symbolic(IntervalSquareRelation(A))
    E = discretize_squares(A, grid_n)
    fin_rank, fin_fixed = gamma_rank_finite(E, eps)
    unresolved = first_unresolved_level(A, eps)
    agree = sym_rank == fin_rank and sym_fixed.is_full() == fin_fixed.is_full()
    return {
        "grid_n": grid_n,
        "eps": eps,
        "symbolic_rank": sym_rank,
        "symbolic_full": sym_fixed.is_full(),
        "finite_rank": fin_rank,
        "finite_full": fin_fixed.is_full(),
        "agree": agree,
        "first_unresolved_level": unresolved,
    }
