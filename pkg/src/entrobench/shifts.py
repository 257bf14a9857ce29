"""Vertex subshifts of finite type: cylinder consistency, independence sets,
windowed density verdicts, and spectral entropy."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ResourceError, ValidationError
from .rationals import frac

_MAX_EXHAUSTIVE = 24
_MAX_EXACT_WINDOW = 12


def _as_word(word) -> Tuple[str, ...]:
    if isinstance(word, str):
        symbols = tuple(word)
    else:
        symbols = tuple(str(w) for w in word)
    if not symbols:
        raise ValidationError("cylinder word must be nonempty")
    return symbols


@dataclass(frozen=True)
class Cylinder:
    """A finite word pinned at an offset relative to its placement position."""

    word: Tuple[str, ...]
    anchor: int = 0

    def __init__(self, word, anchor: int = 0):
        object.__setattr__(self, "word", _as_word(word))
        if isinstance(anchor, bool) or not isinstance(anchor, int):
            raise ValidationError("anchor must be an integer")
        object.__setattr__(self, "anchor", anchor)


class Sft:
    """Vertex shift: bi-infinite sequences over a finite alphabet whose
    consecutive pairs follow a boolean adjacency.

    The adjacency is pruned to its essential part (symbols with both an
    incoming and an outgoing transition) at construction.
    """

    def __init__(self, alphabet: Sequence[str], allowed: np.ndarray,
                 forbidden_words: Optional[Tuple[str, ...]] = None):
        symbols = tuple(str(a) for a in alphabet)
        if len(set(symbols)) != len(symbols):
            raise ValidationError("alphabet symbols must be distinct")
        m = np.asarray(allowed, dtype=bool)
        if m.shape != (len(symbols), len(symbols)):
            raise ValidationError("adjacency shape must match the alphabet")
        symbols, m = _prune(symbols, m)
        self.alphabet: Tuple[str, ...] = symbols
        self.matrix: np.ndarray = m
        self._index = {a: i for i, a in enumerate(symbols)}
        if forbidden_words is None:
            forbidden_words = tuple(
                symbols[i] + symbols[j]
                for i in range(len(symbols))
                for j in range(len(symbols))
                if not m[i, j]
            )
        self.forbidden_words: Tuple[str, ...] = tuple(forbidden_words)
        self._power_cache = {1: m}
        self._reach_cache: dict = {}

    def __eq__(self, other):
        return (
            isinstance(other, Sft)
            and self.alphabet == other.alphabet
            and np.array_equal(self.matrix, other.matrix)
        )

    def __repr__(self):
        return f"Sft(alphabet={self.alphabet!r})"

    def index_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValidationError(f"unknown symbol {symbol!r}") from None

    def _power(self, e: int) -> np.ndarray:
        """Boolean adjacency power A^e for e a power of two."""
        if e not in self._power_cache:
            half = self._power(e // 2)
            self._power_cache[e] = (
                half.astype(np.float32) @ half.astype(np.float32)
            ) > 0.5
        return self._power_cache[e]

    def reach(self, a: int, b: int, steps: int) -> bool:
        """Whether an allowed path of exactly `steps` transitions joins a to b."""
        if steps < 1:
            raise DomainError("steps must be >= 1")
        key = (a, b, steps)
        cached = self._reach_cache.get(key)
        if cached is None:
            row = np.zeros(len(self.alphabet), dtype=bool)
            row[a] = True
            e = 1
            while steps:
                if steps & 1:
                    row = (row.astype(np.float32) @ self._power(e).astype(np.float32)) > 0.5
                steps >>= 1
                e <<= 1
            cached = self._reach_cache[key] = bool(row[b])
        return cached

    def validate_cylinder(self, c: Cylinder) -> Tuple[int, ...]:
        """Symbol indices of the word; rejects words the shift forbids internally."""
        idx = tuple(self.index_of(s) for s in c.word)
        for a, b in zip(idx, idx[1:]):
            if not self.matrix[a, b]:
                raise ValidationError(
                    f"word {''.join(c.word)!r} contains a forbidden transition"
                )
        return idx


def _prune(symbols: Tuple[str, ...], m: np.ndarray):
    while True:
        keep = m.any(axis=1) & m.any(axis=0)
        if keep.all():
            break
        if not keep.any():
            raise ValidationError("adjacency has an empty essential part")
        m = m[np.ix_(keep, keep)]
        symbols = tuple(s for s, k in zip(symbols, keep) if k)
    return symbols, m


def full_shift(k: int) -> Sft:
    if k < 1:
        raise DomainError("alphabet size must be >= 1")
    return Sft(
        tuple(str(i) for i in range(k)),
        np.ones((k, k), dtype=bool),
        forbidden_words=(),
    )


def golden_mean() -> Sft:
    return from_forbidden_words(("0", "1"), ("11",))


def cycle_shift(n: int) -> Sft:
    """The shift whose only transitions walk a single n-cycle."""
    if n < 1:
        raise DomainError("cycle length must be >= 1")
    m = np.zeros((n, n), dtype=bool)
    for i in range(n):
        m[i, (i + 1) % n] = True
    return Sft(tuple(str(i) for i in range(n)), m)


def from_forbidden_words(alphabet: Sequence[str], forbidden: Iterable[str]) -> Sft:
    """Vertex shift realizing the given forbidden words, recoding to blocks
    when a forbidden word is longer than two symbols."""
    symbols = tuple(str(a) for a in alphabet)
    bad = tuple(forbidden)
    if any(not w for w in bad):
        raise ValidationError("forbidden words must be nonempty")
    if any(s not in symbols for w in bad for s in w):
        raise ValidationError("forbidden word uses a symbol outside the alphabet")
    longest = max((len(w) for w in bad), default=1)
    if longest <= 2:
        keep = [s for s in symbols if s not in bad]
        m = np.array(
            [[a + b not in bad for b in keep] for a in keep], dtype=bool
        )
        return Sft(tuple(keep), m, forbidden_words=tuple(bad))
    block = longest - 1
    blocks = [
        w
        for w in _all_words(symbols, block)
        if not any(v in w for v in bad)
    ]
    m = np.array(
        [
            [
                u[1:] == v[:-1] and not any(x in u + v[-1] for x in bad)
                for v in blocks
            ]
            for u in blocks
        ],
        dtype=bool,
    )
    return Sft(tuple(blocks), m, forbidden_words=tuple(bad))


def _all_words(symbols, length):
    if length == 0:
        yield ""
        return
    for w in _all_words(symbols, length - 1):
        for s in symbols:
            yield w + s


def _place(s: Sft, filled: dict, position: int, c: Cylinder) -> bool:
    """Merge a cylinder into the partial configuration; False on conflict."""
    idx = s.validate_cylinder(c)
    start = position + c.anchor
    if start < 0:
        raise DomainError("cylinder placement starts at a negative coordinate")
    for off, sym in enumerate(idx):
        p = start + off
        old = filled.get(p)
        if old is not None and old != sym:
            return False
        filled[p] = sym
    return True


def _filled_consistent(s: Sft, filled: dict) -> bool:
    items = sorted(filled.items())
    for (p, a), (q, b) in zip(items, items[1:]):
        if not s.reach(a, b, q - p):
            return False
    return True


def consistent(s: Sft, constraints: Sequence[Tuple[int, Cylinder]]) -> bool:
    """Whether some bi-infinite allowed sequence satisfies every placed word."""
    filled: dict = {}
    for position, c in sorted(constraints, key=lambda pc: pc[0]):
        if position < 0:
            raise DomainError("constraint positions must be nonnegative")
        if not _place(s, filled, position, c):
            return False
    return _filled_consistent(s, filled)


def is_independence_set(s: Sft, F, U: Cylinder, V: Cylinder) -> bool:
    """Whether every choice of U-or-V at each position of F is realized by
    some point of the shift."""
    positions = sorted(set(int(p) for p in F))
    if any(p < 0 for p in positions):
        raise DomainError("positions must be nonnegative")
    if len(positions) > _MAX_EXHAUSTIVE:
        raise ResourceError(
            f"exhaustive check limited to {_MAX_EXHAUSTIVE} positions"
        )
    s.validate_cylinder(U)
    s.validate_cylinder(V)

    def branch(i: int, filled: dict) -> bool:
        if i == len(positions):
            return True
        for c in (U, V):
            trial = dict(filled)
            if not _place(s, trial, positions[i], c):
                return False
            if not _filled_consistent(s, trial):
                return False
            if not branch(i + 1, trial):
                return False
        return True

    return branch(0, {})


@dataclass(frozen=True)
class IndependenceDensity:
    positions: Tuple[int, ...]
    density: Fraction
    exact: bool


def max_independence_density(s: Sft, U: Cylinder, V: Cylinder, n: int) -> IndependenceDensity:
    """Largest independence subset of the window [0, n) for the cylinder pair.

    Exact (branch-and-bound, lexicographically least witness) for n <= 12;
    greedy lower bound beyond that, flagged non-exact.
    """
    if n < 1:
        raise DomainError("window length must be >= 1")
    if n > _MAX_EXACT_WINDOW:
        chosen: list = []
        for i in range(n):
            if is_independence_set(s, chosen + [i], U, V):
                chosen.append(i)
        return IndependenceDensity(tuple(chosen), Fraction(len(chosen), n), False)

    best: list = []

    def explore(i: int, current: list):
        nonlocal best
        if len(current) + (n - i) <= len(best):
            return
        if i == n:
            if len(current) > len(best):
                best = list(current)
            return
        if is_independence_set(s, current + [i], U, V):
            explore(i + 1, current + [i])
        explore(i + 1, current)

    explore(0, [])
    return IndependenceDensity(tuple(best), Fraction(len(best), n), True)


@dataclass(frozen=True)
class IeVerdict:
    positive: bool
    threshold: Fraction
    negative_at: Optional[int] = None


def ie_pair_verdict(s: Sft, U: Cylinder, V: Cylinder, r, l_max: int) -> IeVerdict:
    """Windowed surrogate for the positive-density independence criterion:
    every window length l <= l_max must admit an independence set of size
    at least floor(r*l)."""
    r = frac(r)
    if not 0 < r <= 1:
        raise DomainError("density threshold must lie in (0, 1]")
    if l_max < 1:
        raise DomainError("l_max must be >= 1")
    if l_max > _MAX_EXACT_WINDOW:
        raise DomainError(
            f"exact verdicts are limited to window lengths <= {_MAX_EXACT_WINDOW}"
        )
    for l in range(1, l_max + 1):
        need = math.floor(r * l)
        got = len(max_independence_density(s, U, V, l).positions)
        if got < need:
            return IeVerdict(False, r, l)
    return IeVerdict(True, r)


def word_count(s: Sft, k: int) -> int:
    """Number of allowed words of length k (exact integer arithmetic)."""
    if k < 1:
        raise DomainError("word length must be >= 1")
    if k == 1:
        return len(s.alphabet)
    mat = s.matrix.astype(object)
    out = mat
    for _ in range(k - 2):
        out = out @ mat
    return int(out.sum())


def sft_entropy(s: Sft, tol: float = 1e-10) -> float:
    """Log of the adjacency's spectral radius.

    Power iteration runs on the identity-shifted adjacency (which shifts every
    Rayleigh quotient by exactly one) so that periodic transition graphs
    converge instead of oscillating.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    m = s.matrix
    n = len(s.alphabet)
    closure = _reach_closure(m)
    if not closure.all():
        warnings.warn(
            "reducible transition structure; entropy computed on the essential part",
            stacklevel=2,
        )
    shifted = m.astype(np.float64) + np.eye(n)
    v = np.ones(n)
    prev = None
    streak = 0
    for _ in range(100000):
        w = shifted @ v
        lam = float(v @ w) / float(v @ v)
        v = w / np.linalg.norm(w)
        # Subdominant eigenvalues may be complex, making the quotient
        # sequence oscillate; insist the stopping test holds repeatedly.
        if prev is not None and abs(lam - prev) < tol:
            streak += 1
            if streak >= 3:
                break
        else:
            streak = 0
        prev = lam
    return math.log(lam - 1.0)


def _reach_closure(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    while True:
        grown = out | ((out.astype(np.float32) @ out.astype(np.float32)) > 0.5)
        if np.array_equal(grown, out):
            return out
        out = grown
