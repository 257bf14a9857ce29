"""Symbolic schemes for compact subsets of the open unit interval.

A scheme is a finite description of a compact set built from four
constructors: a finite point set, a geometric accumulation of shrunken
copies of a body toward a target point, an affinely placed middle-thirds
Cantor set, and a disjoint union.  Every query (membership, gaps,
derivatives, finite realizations) is answered exactly over rationals.

Accumulation geometry: copy ``k`` of the body is its affine image under
``x -> c_k + (x - 1/2) * s_k`` with anchor ``c_k = target -/+ window *
ratio**(k-1)`` (side below/above) and scale ``s_k = window * ratio**(k-1)
* (1 - ratio) / 2``.  Consecutive copies are disjoint for every ratio in
(0, 1) and accumulate exactly at the target.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .errors import DomainError, ResourceError, ValidationError
from .rationals import frac

BELOW = "below"
ABOVE = "above"

_HALF = Fraction(1, 2)
_ZERO = Fraction(0)
_ONE = Fraction(1)

# Realizations larger than this are almost certainly a mistake at desk scale.
_REALIZE_POINT_CAP = 1 << 22


def _unit_point(value) -> Fraction:
    x = frac(value)
    if not _ZERO < x < _ONE:
        raise ValidationError(f"point {x} lies outside (0,1)")
    return x


@dataclass(frozen=True)
class Points:
    """A finite set of rational points, strictly increasing."""

    points: tuple = ()

    def __post_init__(self):
        pts = tuple(_unit_point(p) for p in self.points)
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise ValidationError("points must be strictly increasing")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class Perfect:
    """A middle-thirds Cantor set placed affinely on [lo, hi]."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = _unit_point(self.lo), _unit_point(self.hi)
        if lo >= hi:
            raise ValidationError("Perfect needs lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass(frozen=True)
class Acc:
    """Copies of ``body`` shrinking geometrically toward ``target``.

    The copies sit on the named side of the target: ``below`` places them
    in increasing order approaching the target from the left.
    """

    target: Fraction
    side: str
    ratio: Fraction
    window: Fraction
    body: "Scheme"

    def __post_init__(self):
        t = _unit_point(self.target)
        r = frac(self.ratio)
        w = frac(self.window)
        if self.side not in (BELOW, ABOVE):
            raise ValidationError(f"side must be '{BELOW}' or '{ABOVE}'")
        if not _ZERO < r < _ONE:
            raise ValidationError("ratio must lie in (0,1)")
        if w <= 0:
            raise ValidationError("window must be positive")
        if is_empty(self.body):
            raise ValidationError("accumulation body must be nonempty")
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "ratio", r)
        object.__setattr__(self, "window", w)
        blo, bhi = hull(self.body)
        if self.side == BELOW:
            edge = _affine(t - w, w * (1 - r) / 2, blo)
            if edge <= 0:
                raise ValidationError("first copy would leave (0,1) on the left")
        else:
            edge = _affine(t + w, w * (1 - r) / 2, bhi)
            if edge >= 1:
                raise ValidationError("first copy would leave (0,1) on the right")


@dataclass(frozen=True)
class Union:
    """A disjoint union of schemes with strictly separated hulls."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) < 2:
            raise ValidationError("a union needs at least two parts")
        for p in parts:
            if isinstance(p, Union):
                raise ValidationError("unions must be flattened")
            if is_empty(p):
                raise ValidationError("union parts must be nonempty")
        hulls = [hull(p) for p in parts]
        for (_, a_hi), (b_lo, _) in zip(hulls, hulls[1:]):
            if a_hi >= b_lo:
                raise ValidationError("union parts must have separated hulls, ascending")
        object.__setattr__(self, "parts", parts)


Scheme = Points | Perfect | Acc | Union

EMPTY = Points(())


def is_empty(s: Scheme) -> bool:
    return isinstance(s, Points) and not s.points


def union_of(parts) -> Scheme:
    """Normalize a list of schemes into a canonical disjoint union."""
    flat = []
    for p in parts:
        if is_empty(p):
            continue
        if isinstance(p, Union):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return EMPTY
    flat.sort(key=lambda p: hull(p)[0])
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(flat))


def _require_nonempty(s: Scheme):
    if is_empty(s):
        raise DomainError("operation requires a nonempty scheme")


def _affine(anchor: Fraction, scale: Fraction, x: Fraction) -> Fraction:
    return anchor + (x - _HALF) * scale


def hull(s: Scheme) -> tuple:
    """Exact (min, max) of the realized set."""
    _require_nonempty(s)
    if isinstance(s, Points):
        return (s.points[0], s.points[-1])
    if isinstance(s, Perfect):
        return (s.lo, s.hi)
    if isinstance(s, Acc):
        blo, bhi = hull(s.body)
        scale1 = s.window * (1 - s.ratio) / 2
        if s.side == BELOW:
            return (_affine(s.target - s.window, scale1, blo), s.target)
        return (s.target, _affine(s.target + s.window, scale1, bhi))
    return (hull(s.parts[0])[0], hull(s.parts[-1])[1])


def _copies(s: Acc) -> Iterator[tuple]:
    """Yield (anchor, scale, copy_lo, copy_hi) for k = 1, 2, ... lazily."""
    blo, bhi = hull(s.body)
    wk = s.window
    while True:
        c = s.target - wk if s.side == BELOW else s.target + wk
        sc = wk * (1 - s.ratio) / 2
        yield c, sc, _affine(c, sc, blo), _affine(c, sc, bhi)
        wk *= s.ratio


def member(s: Scheme, x) -> bool:
    """Exact membership of x in the realized set."""
    x = frac(x)
    if is_empty(s):
        return False
    if isinstance(s, Points):
        i = bisect.bisect_left(s.points, x)
        return i < len(s.points) and s.points[i] == x
    if isinstance(s, Perfect):
        return _cantor_member(s, x)
    if isinstance(s, Acc):
        return _acc_member(s, x)
    for p in s.parts:
        lo, hi = hull(p)
        if lo <= x <= hi:
            return member(p, x)
    return False


def _cantor_member(s: Perfect, x: Fraction) -> bool:
    if x < s.lo or x > s.hi:
        return False
    u = (x - s.lo) / (s.hi - s.lo)
    third, two_thirds = Fraction(1, 3), Fraction(2, 3)
    seen = set()
    while True:
        if u == 0 or u == 1:
            return True
        if third < u < two_thirds:
            return False
        if u in seen:
            # The ternary expansion cycles through digits 0 and 2 forever.
            return True
        seen.add(u)
        u = 3 * u if u <= third else 3 * u - 2


def _acc_member(s: Acc, x: Fraction) -> bool:
    if x == s.target:
        return True
    if s.side == BELOW:
        if x > s.target:
            return False
        for c, sc, lo, hi in _copies(s):
            if x < lo:
                return False
            if x <= hi:
                return member(s.body, (x - c) / sc + _HALF)
    else:
        if x < s.target:
            return False
        for c, sc, lo, hi in _copies(s):
            if x > hi:
                return False
            if x >= lo:
                return member(s.body, (x - c) / sc + _HALF)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class Gap:
    """A maximal open interval of (0,1) disjoint from the set.

    The flags record whether each endpoint belongs to the set (an endpoint
    at 0 or 1 never does).
    """

    lo: Fraction
    hi: Fraction
    lo_in_set: bool = True
    hi_in_set: bool = True

    def __post_init__(self):
        if not (_ZERO <= self.lo < self.hi <= _ONE):
            raise ValidationError("gap endpoints must satisfy 0 <= lo < hi <= 1")
        if self.lo == 0 and self.lo_in_set:
            raise ValidationError("0 is never in the set")
        if self.hi == 1 and self.hi_in_set:
            raise ValidationError("1 is never in the set")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class InSet:
    """Marker: the queried point belongs to the realized set."""


IN_SET = InSet()


def _bounds_around(s: Scheme, x: Fraction) -> tuple:
    """Greatest realized value < x and least realized value > x, or None.

    Precondition: x is not a member of s.
    """
    if isinstance(s, Points):
        i = bisect.bisect_left(s.points, x)
        lo = s.points[i - 1] if i > 0 else None
        hi = s.points[i] if i < len(s.points) else None
        return lo, hi
    if isinstance(s, Perfect):
        flo, fhi = s.lo, s.hi
        if x < flo:
            return None, flo
        if x > fhi:
            return fhi, None
        while True:
            w = (fhi - flo) / 3
            m1, m2 = flo + w, fhi - w
            if m1 < x < m2:
                return m1, m2
            if x <= m1:
                fhi = m1
            else:
                flo = m2
    if isinstance(s, Acc):
        return _acc_bounds(s, x)
    parts = s.parts
    for i, p in enumerate(parts):
        plo, phi = hull(p)
        if x < plo:
            left = hull(parts[i - 1])[1] if i > 0 else None
            return left, plo
        if x <= phi:
            blo, bhi = _bounds_around(p, x)
            return blo, bhi
    return hull(parts[-1])[1], None


def _acc_bounds(s: Acc, x: Fraction) -> tuple:
    if s.side == BELOW:
        if x > s.target:
            return s.target, None
        prev_hi = None
        for c, sc, lo, hi in _copies(s):
            if x < lo:
                return prev_hi, lo
            if x <= hi:
                blo, bhi = _bounds_around(s.body, (x - c) / sc + _HALF)
                return _affine(c, sc, blo), _affine(c, sc, bhi)
            prev_hi = hi
    else:
        if x < s.target:
            return None, s.target
        prev_lo = None
        for c, sc, lo, hi in _copies(s):
            if x > hi:
                return hi, prev_lo
            if x >= lo:
                blo, bhi = _bounds_around(s.body, (x - c) / sc + _HALF)
                return _affine(c, sc, blo), _affine(c, sc, bhi)
            prev_lo = lo
    raise AssertionError("unreachable")


def locate(s: Scheme, x):
    """Classify x as a member or return the unique gap containing it."""
    x = frac(x)
    if not _ZERO < x < _ONE:
        raise DomainError(f"{x} lies outside (0,1)")
    _require_nonempty(s)
    if member(s, x):
        return IN_SET
    lo, hi = _bounds_around(s, x)
    return Gap(
        lo if lo is not None else _ZERO,
        hi if hi is not None else _ONE,
        lo is not None,
        hi is not None,
    )


class _Extends:
    """Sentinel: the gap continues past this scheme's hull."""


_EXTENDS = _Extends()


def _gap_right(s: Scheme, a: Fraction):
    """Gap of s immediately right of member a.

    Returns a Gap, None when a is a limit of the set from the right, or
    the _EXTENDS sentinel when the gap continues beyond the hull.
    """
    if isinstance(s, Points):
        i = bisect.bisect_left(s.points, a)
        if i + 1 < len(s.points):
            return Gap(a, s.points[i + 1])
        return _EXTENDS
    if isinstance(s, Perfect):
        flo, fhi = s.lo, s.hi
        hi_of_left_mid = None
        seen = set()
        while True:
            if a == fhi:
                if hi_of_left_mid is None:
                    return _EXTENDS
                return Gap(a, hi_of_left_mid)
            if a == flo:
                return None
            key = (a - flo) / (fhi - flo)
            if key in seen:
                return None
            seen.add(key)
            w = (fhi - flo) / 3
            m1, m2 = flo + w, fhi - w
            if a <= m1:
                hi_of_left_mid = m2
                fhi = m1
            elif a >= m2:
                flo = m2
            else:
                raise DomainError(f"{a} is not a member")
    if isinstance(s, Acc):
        return _acc_gap_right(s, a)
    parts = s.parts
    for i, p in enumerate(parts):
        plo, phi = hull(p)
        if plo <= a <= phi:
            g = _gap_right(p, a)
            if g is _EXTENDS:
                if i + 1 < len(parts):
                    return Gap(a, hull(parts[i + 1])[0])
                return _EXTENDS
            return g
    raise DomainError(f"{a} is not a member")


def _acc_gap_right(s: Acc, a: Fraction):
    if a == s.target:
        # Below: the target is the maximum.  Above: copies crowd in on the
        # right of the target, so no gap starts there.
        return _EXTENDS if s.side == BELOW else None
    blo, bhi = hull(s.body)
    if s.side == BELOW:
        for c, sc, lo, hi in _copies(s):
            if a < lo:
                raise DomainError(f"{a} is not a member")
            if a <= hi:
                g = _gap_right(s.body, (a - c) / sc + _HALF)
                if g is _EXTENDS:
                    # Gap runs from the end of this copy to the start of the next.
                    wk2 = (s.target - c) * s.ratio
                    c2 = s.target - wk2
                    sc2 = wk2 * (1 - s.ratio) / 2
                    return Gap(a, _affine(c2, sc2, blo))
                if g is None:
                    return None
                return Gap(_affine(c, sc, g.lo), _affine(c, sc, g.hi))
    else:
        prev = None
        for c, sc, lo, hi in _copies(s):
            if a > hi:
                raise DomainError(f"{a} is not a member")
            if a >= lo:
                g = _gap_right(s.body, (a - c) / sc + _HALF)
                if g is _EXTENDS:
                    if prev is None:
                        return _EXTENDS
                    return Gap(a, prev)
                if g is None:
                    return None
                return Gap(_affine(c, sc, g.lo), _affine(c, sc, g.hi))
            prev = lo
    raise AssertionError("unreachable")


def gap_right_of(s: Scheme, a) -> Optional[Gap]:
    """The gap whose left endpoint is a, or None when a is a right limit."""
    a = frac(a)
    _require_nonempty(s)
    if not member(s, a):
        raise DomainError(f"{a} is not in the set")
    g = _gap_right(s, a)
    if g is _EXTENDS:
        return Gap(a, _ONE, True, False)
    return g


def is_left_endpoint(s: Scheme, a) -> bool:
    """Whether a begins a gap, i.e. belongs to the set of gap left-endpoints."""
    return gap_right_of(s, a) is not None


class _GapMerge:
    """Merge gap streams ordered by (width descending, left endpoint ascending)."""

    def __init__(self):
        self._heap = []
        self._n = 0

    @staticmethod
    def _key(g: Gap) -> tuple:
        return (-(g.hi - g.lo), g.lo)

    def _push(self, key, kind, payload):
        heapq.heappush(self._heap, (key, self._n, kind, payload))
        self._n += 1

    def push_gap(self, g: Gap):
        self._push(self._key(g), "gap", g)

    def push_stream(self, it: Iterator[Gap]):
        first = next(it, None)
        if first is not None:
            self._push(self._key(first), "stream", (first, it))

    def push_opener(self, key, fn):
        """Defer fn() until no pending item precedes the given key."""
        self._push(key, "open", fn)

    def stream(self) -> Iterator[Gap]:
        while self._heap:
            _, _, kind, payload = heapq.heappop(self._heap)
            if kind == "gap":
                yield payload
            elif kind == "stream":
                first, it = payload
                yield first
                self.push_stream(it)
            else:
                payload(self)


def _inner_gaps(s: Scheme) -> Iterator[Gap]:
    """Gaps strictly inside the hull, widest first, ties left-first."""
    if isinstance(s, Points):
        gaps = [Gap(a, b) for a, b in zip(s.points, s.points[1:])]
        gaps.sort(key=_GapMerge._key)
        return iter(gaps)
    if isinstance(s, Perfect):
        return _perfect_gaps(s)
    if isinstance(s, Acc):
        return _acc_gaps(s)
    merge = _GapMerge()
    for p in s.parts:
        merge.push_stream(_inner_gaps(p))
    for a, b in zip(s.parts, s.parts[1:]):
        merge.push_gap(Gap(hull(a)[1], hull(b)[0]))
    return merge.stream()


def _cell_offsets(depth: int) -> Iterator[Fraction]:
    """Left offsets (relative to span) of the 2**depth Cantor cells, ascending."""
    if depth == 0:
        yield _ZERO
        return
    for bits in itertools.product((0, 1), repeat=depth):
        yield sum(Fraction(2 * b, 3 ** j) for j, b in enumerate(bits, start=1))


def _perfect_gaps(s: Perfect) -> Iterator[Gap]:
    span = s.hi - s.lo
    level = 1
    while True:
        cell_w = span / 3 ** (level - 1)
        for ofs in _cell_offsets(level - 1):
            lo = s.lo + ofs * span
            yield Gap(lo + cell_w / 3, lo + 2 * cell_w / 3)
        level += 1


def _acc_gaps(s: Acc) -> Iterator[Gap]:
    merge = _GapMerge()

    def between_copies() -> Iterator[Gap]:
        for (_, sc, lo, hi), (_, sc2, lo2, hi2) in itertools.pairwise(_copies(s)):
            if s.side == BELOW:
                yield Gap(hi, lo2)
            else:
                yield Gap(hi2, lo)

    merge.push_stream(between_copies())

    first_inner = next(_inner_gaps(s.body), None)
    if first_inner is not None:

        def opener_for(wk: Fraction):
            def open_copy(m: _GapMerge):
                c = s.target - wk if s.side == BELOW else s.target + wk
                sc = wk * (1 - s.ratio) / 2
                m.push_stream(
                    Gap(_affine(c, sc, g.lo), _affine(c, sc, g.hi))
                    for g in _inner_gaps(s.body)
                )
                m.push_opener(_opener_key(wk * s.ratio), opener_for(wk * s.ratio))

            return open_copy

        def _opener_key(wk: Fraction) -> tuple:
            c = s.target - wk if s.side == BELOW else s.target + wk
            sc = wk * (1 - s.ratio) / 2
            g = first_inner
            return (-(g.hi - g.lo) * sc, _affine(c, sc, g.lo))

        merge.push_opener(_opener_key(s.window), opener_for(s.window))

    return merge.stream()


def gap_stream(s: Scheme) -> Iterator[Gap]:
    """All gaps of (0,1) minus the set, widest first, ties left-first."""
    _require_nonempty(s)
    merge = _GapMerge()
    lo, hi = hull(s)
    if lo > 0:
        merge.push_gap(Gap(_ZERO, lo, False, True))
    if hi < 1:
        merge.push_gap(Gap(hi, _ONE, True, False))
    merge.push_stream(_inner_gaps(s))
    return merge.stream()


def contiguous_intervals(s: Scheme, k: int) -> list:
    """The k widest gaps, in decreasing width, ties broken left-first."""
    if k < 1:
        raise DomainError("k must be at least 1")
    return list(itertools.islice(gap_stream(s), k))


def left_endpoints(s: Scheme, k: int) -> list:
    """Left endpoints, belonging to the set, of the k widest gaps; ascending."""
    return sorted(g.lo for g in contiguous_intervals(s, k) if g.lo_in_set)


def derivative(s: Scheme) -> Scheme:
    """The set of limit points, as a scheme."""
    if isinstance(s, Points):
        return EMPTY
    if isinstance(s, Perfect):
        return s
    if isinstance(s, Acc):
        body = derivative(s.body)
        if is_empty(body):
            return Points((s.target,))
        return Acc(s.target, s.side, s.ratio, s.window, body)
    return union_of(derivative(p) for p in s.parts)


def cb_rank(s: Scheme) -> tuple:
    """Least n with the n-th derivative stationary, plus that fixed core."""
    cur = s
    rank = 0
    while True:
        nxt = derivative(cur)
        if nxt == cur:
            return rank, cur
        cur = nxt
        rank += 1


def realize(s: Scheme, depth: int) -> list:
    """Finite unrolling: d accumulation windows, depth-d Cantor endpoints."""
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    out = _realize(s, depth)
    out.sort()
    return out


def _realize(s: Scheme, depth: int) -> list:
    if isinstance(s, Points):
        return list(s.points)
    if isinstance(s, Perfect):
        if depth > 21:
            raise ResourceError(f"Cantor realization at depth {depth} is too large")
        span = s.hi - s.lo
        cell_w = span / 3 ** depth
        out = []
        for ofs in _cell_offsets(depth):
            lo = s.lo + ofs * span
            out.append(lo)
            out.append(lo + cell_w)
        return out
    if isinstance(s, Acc):
        base = _realize(s.body, depth)
        if (len(base) + 1) * max(depth, 1) > _REALIZE_POINT_CAP:
            raise ResourceError("realization would exceed the point budget")
        out = [s.target]
        wk = s.window
        for _ in range(depth):
            c = s.target - wk if s.side == BELOW else s.target + wk
            sc = wk * (1 - s.ratio) / 2
            out.extend(_affine(c, sc, x) for x in base)
            wk *= s.ratio
        return out
    out = []
    for p in s.parts:
        out.extend(_realize(p, depth))
    return out
