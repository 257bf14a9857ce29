"""Pseudo-orbit machinery on finite grid systems: validity checks, finite
shadowing verdicts, the periodic-block weave, and pattern-verified
independence sets."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .errors import DomainError, ValidationError
from .gamma import FiniteSpace
from .rationals import frac


class GridSystem:
    """A finite metric space together with a total self-map."""

    def __init__(self, space: FiniteSpace, mapping):
        self.space = space
        index = {label: i for i, label in enumerate(space.labels)}
        if callable(mapping):
            targets = [mapping(label) for label in space.labels]
        elif isinstance(mapping, dict):
            missing = [l for l in space.labels if l not in mapping]
            if missing:
                raise ValidationError(f"map is not total: no image for {missing[0]!r}")
            targets = [mapping[label] for label in space.labels]
        else:
            targets = list(mapping)
            if len(targets) != len(space.labels):
                raise ValidationError("map must give one image per point")
        try:
            self._next = tuple(index[t] for t in targets)
        except KeyError as e:
            raise ValidationError(f"map image {e.args[0]!r} is not a grid point") from None
        self._index = index

    def index_of(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValidationError(f"{label!r} is not a grid point") from None

    def step_index(self, i: int) -> int:
        return self._next[i]

    def image(self, label):
        return self.space.labels[self._next[self.index_of(label)]]

    def iterate_index(self, i: int, k: int) -> int:
        for _ in range(k):
            i = self._next[i]
        return i

    def iterate(self, label, k: int):
        return self.space.labels[self.iterate_index(self.index_of(label), k)]

    def distance(self, a, b) -> Fraction:
        return self.space._distance(a, b)


@dataclass(frozen=True)
class PseudoOrbit:
    delta: Fraction
    seq: Tuple


def is_pseudo_orbit(sys: GridSystem, seq: Sequence, delta) -> bool:
    """Every consecutive pair satisfies d(map(x_i), x_{i+1}) <= delta, exactly."""
    delta = frac(delta)
    points = list(seq)
    if not points:
        raise DomainError("sequence must be nonempty")
    for label in points:
        sys.index_of(label)
    for a, b in zip(points, points[1:]):
        if sys.distance(sys.image(a), b) > delta:
            return False
    return True


def make_pseudo_orbit(sys: GridSystem, seq: Sequence, delta) -> PseudoOrbit:
    if not is_pseudo_orbit(sys, seq, delta):
        raise ValidationError("sequence violates the pseudo-orbit bound")
    return PseudoOrbit(frac(delta), tuple(seq))


def shadows(sys: GridSystem, y, seq: Sequence, eps) -> bool:
    """d(map^n(y), seq[n]) <= eps for every n below the sequence length."""
    eps = frac(eps)
    i = sys.index_of(y)
    for n, label in enumerate(seq):
        if n:
            i = sys.step_index(i)
        if sys.distance(sys.space.labels[i], label) > eps:
            return False
    return True


@dataclass(frozen=True)
class ShadowingVerdict:
    kind: str  # holds_exhaustive | fails | unknown_sampled
    witness: Optional[PseudoOrbit] = None
    trials: Optional[int] = None


def _balls(sys: GridSystem, radius: Fraction):
    labels = sys.space.labels
    cache: dict = {}

    def ball(i: int) -> tuple:
        got = cache.get(i)
        if got is None:
            center = labels[i]
            got = cache[i] = tuple(
                j for j, l in enumerate(labels)
                if sys.distance(center, l) <= radius
            )
        return got

    return ball


def finite_shadowing_check(sys: GridSystem, eps, delta, p: int, budget: int = 10**6,
                           seed: int = 0) -> ShadowingVerdict:
    """Check that every length-p delta-pseudo-orbit is eps-shadowed by a grid
    point.

    Exhaustive (with surviving-shadow-set pruning) when the enumeration bound
    |space| * branching^p fits the budget; otherwise randomized sampling that
    can only return a concrete failure witness or `unknown_sampled`.
    """
    eps, delta = frac(eps), frac(delta)
    if eps < 0 or delta < 0:
        raise DomainError("eps and delta must be nonnegative")
    if p < 2:
        raise DomainError("pseudo-orbit length must be >= 2")
    n = len(sys.space)
    labels = sys.space.labels
    eps_ball = _balls(sys, eps)
    succ_of = _balls(sys, delta)

    def successors(i: int) -> tuple:
        return succ_of(sys.step_index(i))

    def advance(survivors: frozenset, z: int) -> frozenset:
        near = eps_ball(z)
        return frozenset(sys.step_index(s) for s in survivors) & frozenset(near)

    def witness_from(prefix: list) -> PseudoOrbit:
        seq = list(prefix)
        while len(seq) < p + 1:
            seq.append(sys.step_index(seq[-1]))
        return PseudoOrbit(delta, tuple(labels[i] for i in seq))

    branching = max(len(succ_of(i)) for i in range(n))
    if n * branching**p <= budget:
        safe_depth: dict = {}

        def explore(i: int, survivors: frozenset, remaining: int):
            if remaining == 0:
                return None
            key = (i, survivors)
            if safe_depth.get(key, -1) >= remaining:
                return None
            for z in successors(i):
                surv = advance(survivors, z)
                if not surv:
                    return [z]
                deeper = explore(z, surv, remaining - 1)
                if deeper is not None:
                    return [z] + deeper
            safe_depth[key] = remaining
            return None

        for start in range(n):
            survivors = frozenset(eps_ball(start))
            if not survivors:
                return ShadowingVerdict("fails", witness_from([start]))
            tail = explore(start, survivors, p)
            if tail is not None:
                return ShadowingVerdict("fails", witness_from([start] + tail))
        return ShadowingVerdict("holds_exhaustive")

    rng = random.Random(seed)
    trials = max(1, min(4096, budget // max(1, n * p)))
    for _ in range(trials):
        i = rng.randrange(n)
        survivors = frozenset(eps_ball(i))
        prefix = [i]
        if not survivors:
            return ShadowingVerdict("fails", witness_from(prefix))
        for _ in range(p):
            z = rng.choice(successors(prefix[-1]))
            survivors = advance(survivors, z)
            prefix.append(z)
            if not survivors:
                return ShadowingVerdict("fails", witness_from(prefix))
    return ShadowingVerdict("unknown_sampled", trials=trials)


@dataclass(frozen=True)
class WeaveTable:
    """Anchor points and the eight connecting points used by the block weave.

    ``y22_n1``/``y22_n3`` are the middle-anchor loops with return times
    n1 and n3 respectively; the others connect anchor i to anchor j.
    """

    a1: object
    a2: object
    a3: object
    y11: object
    y12: object
    y21: object
    y23: object
    y32: object
    y33: object
    y22_n1: object
    y22_n3: object


def _check_table(sys: GridSystem, t: WeaveTable, n1: int, n3: int, half: Fraction):
    conditions = [
        ("y11 near a1", t.y11, 0, t.a1),
        ("map^n1(y11) near a1", t.y11, n1, t.a1),
        ("y12 near a1", t.y12, 0, t.a1),
        ("map^n1(y12) near a2", t.y12, n1, t.a2),
        ("y21 near a2", t.y21, 0, t.a2),
        ("map^n1(y21) near a1", t.y21, n1, t.a1),
        ("y23 near a2", t.y23, 0, t.a2),
        ("map^n3(y23) near a3", t.y23, n3, t.a3),
        ("y32 near a3", t.y32, 0, t.a3),
        ("map^n3(y32) near a2", t.y32, n3, t.a2),
        ("y33 near a3", t.y33, 0, t.a3),
        ("map^n3(y33) near a3", t.y33, n3, t.a3),
        ("y22_n1 near a2", t.y22_n1, 0, t.a2),
        ("map^n1(y22_n1) near a2", t.y22_n1, n1, t.a2),
        ("y22_n3 near a2", t.y22_n3, 0, t.a2),
        ("map^n3(y22_n3) near a2", t.y22_n3, n3, t.a2),
    ]
    for name, point, steps, center in conditions:
        moved = sys.iterate(point, steps)
        if sys.distance(moved, center) > half:
            raise DomainError(f"ball condition violated: {name} at radius {half}")


def weave(table: WeaveTable, n1: int, n3: int, f: Sequence[int], sys: GridSystem,
          delta) -> PseudoOrbit:
    """Assemble the woven pseudo-orbit for the pattern f.

    f lists the anchor choices (1 or 3) at consecutive multiples of
    N = 2*n1*n3; the result covers [0, N*(len(f)-1)] inclusive.
    """
    delta = frac(delta)
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if n1 < 2 or n3 < 2:
        raise DomainError("return times must be >= 2")
    pattern = tuple(f)
    if len(pattern) < 2:
        raise DomainError("pattern needs at least two values")
    if any(v not in (1, 3) for v in pattern):
        raise DomainError("pattern values must be 1 or 3")
    _check_table(sys, table, n1, n3, delta / 2)

    N = 2 * n1 * n3
    times = {1: n1, 3: n3}
    loops = {1: table.y11, 3: table.y33}
    from_mid = {1: table.y21, 3: table.y23}
    to_mid = {1: table.y12, 3: table.y32}
    mid_loop = {1: table.y22_n1, 3: table.y22_n3}

    def block_point(i: int, j: int, m: int):
        ni, nj = times[i], times[j]
        if i == j:
            return sys.iterate(loops[i], m % ni)
        if m < ni:
            return sys.iterate(to_mid[i], m)
        if m < ni * nj:
            return sys.iterate(mid_loop[i], m % ni)
        if m < ni * nj + nj:
            return sys.iterate(from_mid[j], m % nj)
        return sys.iterate(loops[j], m % nj)

    seq = []
    for k in range(len(pattern) - 1):
        i, j = pattern[k], pattern[k + 1]
        seq.extend(block_point(i, j, m) for m in range(N))
    seq.append(block_point(pattern[-2], pattern[-1], N))
    return make_pseudo_orbit(sys, seq, delta)


@dataclass(frozen=True)
class IndependenceReport:
    positions: Tuple[int, ...]
    verified: bool
    failing_pattern: Optional[Tuple[int, ...]] = None
    precheck: str = "none"


def find_shadow(sys: GridSystem, seq: Sequence, eps):
    """First grid point (in label order) eps-shadowing the sequence, or None."""
    eps = frac(eps)
    labels = sys.space.labels
    pairs = [(i, i) for i in range(len(labels))]
    for n, target in enumerate(seq):
        kept = []
        for origin, cur in pairs:
            if n:
                cur = sys.step_index(cur)
            if sys.distance(labels[cur], target) <= eps:
                kept.append((origin, cur))
        if not kept:
            return None
        pairs = kept
    return labels[min(origin for origin, _ in pairs)]


def independence_from_shadowing(sys: GridSystem, eps, K: int, table: WeaveTable,
                                n1: int, n3: int, delta, budget: int = 10**6,
                                precheck: str = "sampled",
                                seed: int = 0) -> IndependenceReport:
    """Verify that the multiples of N = 2*n1*n3 form an independence set for
    the two outer anchors: every 1/3-pattern over {0, N, ..., N(K-1)} must be
    realized by a grid point shadowing the woven pseudo-orbit."""
    eps = frac(eps)
    if K < 1:
        raise DomainError("need at least one constrained position")
    if precheck not in ("exhaustive", "sampled", "none"):
        raise DomainError("precheck must be exhaustive, sampled, or none")
    N = 2 * n1 * n3
    positions = tuple(N * k for k in range(K))

    precheck_kind = "skipped"
    if precheck != "none":
        verdict = finite_shadowing_check(sys, eps, delta, N * K, budget, seed)
        precheck_kind = verdict.kind
        if precheck == "exhaustive" and verdict.kind != "holds_exhaustive":
            raise DomainError(
                f"finite shadowing precheck did not hold exhaustively ({verdict.kind})"
            )

    anchors = {1: table.a1, 3: table.a3}
    for pattern in itertools.product((1, 3), repeat=K):
        # The weave needs one anchor choice past the last constrained
        # position; wrapping to the first keeps every pattern realizable
        # on periodic grids without touching the claimed positions.
        full = pattern + (pattern[0],)
        orbit = weave(table, n1, n3, full, sys, delta)
        y = find_shadow(sys, orbit.seq, eps)
        if y is None:
            return IndependenceReport(positions, False, pattern, precheck_kind)
        for k, choice in enumerate(pattern):
            landed = sys.iterate(y, N * k)
            if sys.distance(landed, anchors[choice]) > eps:
                return IndependenceReport(positions, False, pattern, precheck_kind)
    return IndependenceReport(positions, True, None, precheck_kind)


# ---------------------------------------------------------------------------
# Canonical grid worlds
# ---------------------------------------------------------------------------


def snap_to_grid(value, n: int) -> Fraction:
    """Nearest point of the (n+1)-point grid {i/n}, ties rounding up."""
    value = frac(value)
    k = (value * n * 2 + 1) // 2
    k = min(max(k, 0), n)
    return Fraction(k, n)


def line_system(intervals: int, fn) -> GridSystem:
    """fn on the uniform grid with the given interval count, images snapped."""
    space = FiniteSpace.line_grid(intervals + 1)
    return GridSystem(space, {x: snap_to_grid(fn(x), intervals) for x in space.labels})


def identity_system(intervals: int) -> GridSystem:
    return line_system(intervals, lambda x: x)


def constant_system(intervals: int, c) -> GridSystem:
    c = frac(c)
    return line_system(intervals, lambda x: c)


def discrete_metric(a, b) -> Fraction:
    return Fraction(0) if a == b else Fraction(1)


def rotation_system(n: int) -> GridSystem:
    """n points in a cycle under +1, discrete metric."""
    space = FiniteSpace(range(n), discrete_metric)
    return GridSystem(space, {i: (i + 1) % n for i in range(n)})


def two_block_system() -> GridSystem:
    """The four binary 2-blocks under cyclic rotation, discrete metric."""
    labels = ("00", "01", "10", "11")
    space = FiniteSpace(labels, discrete_metric)
    return GridSystem(space, {w: w[1:] + w[0] for w in labels})


def word_metric(u: str, v: str) -> Fraction:
    for j, (a, b) in enumerate(zip(u, v)):
        if a != b:
            return Fraction(1, 2 ** j)
    return Fraction(0)


def _rotations(word: str):
    return {word[r:] + word[:r] for r in range(len(word))}


# Per-block bit chunks of the words that track a woven orbit: chunk (i, j)
# records the first coordinates of the weave's (i, j)-block at n1 = n3 = 2.
_CHUNKS = {
    (1, 1): "00000000",
    (1, 3): "00010111",
    (3, 1): "11010100",
    (3, 3): "11111111",
}


def sequence_system(blocks: int = 6):
    """Cyclic binary words of length 8*blocks under the left shift.

    The space holds every word whose 8-blocks follow a chunk pattern, the
    period-2 word, and the four connector words, closed under rotation.
    Returns (system, table, params) ready for the weave at n1 = n3 = 2.
    """
    if blocks < 2:
        raise DomainError("need at least two blocks")
    length = 8 * blocks
    reps = length // 2
    a2 = "01" * reps
    connectors = {
        "y12": "00" + "01" * (reps - 1),
        "y21": "01" + "0" * (length - 2),
        "y23": "01" + "1" * (length - 2),
        "y32": "11" + "01" * (reps - 1),
    }

    words = set()
    for pattern in _weave_patterns(blocks):
        word = "".join(
            _CHUNKS[(pattern[k], pattern[(k + 1) % blocks])] for k in range(blocks)
        )
        words |= _rotations(word)
    for w in connectors.values():
        words |= _rotations(w)
    words |= _rotations(a2)

    space = FiniteSpace(sorted(words), word_metric)
    sys = GridSystem(space, lambda w: w[1:] + w[0])
    table = WeaveTable(
        a1="0" * length,
        a2=a2,
        a3="1" * length,
        y11="0" * length,
        y33="1" * length,
        y12=connectors["y12"],
        y21=connectors["y21"],
        y23=connectors["y23"],
        y32=connectors["y32"],
        y22_n1=a2,
        y22_n3=a2,
    )
    params = {"n1": 2, "n3": 2, "delta": Fraction(1, 2), "eps": Fraction(1, 4)}
    return sys, table, params


def _weave_patterns(blocks: int):
    out = [()]
    for _ in range(blocks):
        out = [p + (v,) for p in out for v in (1, 3)]
    return out
