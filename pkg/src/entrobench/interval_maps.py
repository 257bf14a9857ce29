"""Piecewise-linear interval maps: the tent family, pasted-tent maps over a
compact scheme, lap-number entropy estimates, and the completeness verdict
for the induced entropy-pair relation."""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import compacta as cp
from .errors import DomainError, ResourceError
from .gamma import IntervalSquareRelation
from .rationals import frac

_MAX_BREAKPOINTS = 10**7


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """Continuous map [0,1] -> [0,1], linear between exact rational breakpoints."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(frac(b) for b in self.breakpoints)
        vals = tuple(frac(v) for v in self.values)
        if len(bps) != len(vals):
            raise DomainError("breakpoints and values must have equal length")
        if len(bps) < 2:
            raise DomainError("need at least the two endpoint breakpoints")
        if bps[0] != 0 or bps[-1] != 1:
            raise DomainError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(v < 0 or v > 1 for v in vals):
            raise DomainError("values must lie in [0,1]")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    def __call__(self, x) -> Fraction:
        x = frac(x)
        if x < 0 or x > 1:
            raise DomainError(f"{x} outside [0,1]")
        bps, vals = self.breakpoints, self.values
        i = bisect_right(bps, x) - 1
        if i == len(bps) - 1:
            return vals[-1]
        a, b = bps[i], bps[i + 1]
        va, vb = vals[i], vals[i + 1]
        return va + (x - a) * (vb - va) / (b - a)

    def slopes(self) -> tuple:
        bps, vals = self.breakpoints, self.values
        return tuple(
            (vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i])
            for i in range(len(bps) - 1)
        )

    def normalized(self) -> "PiecewiseLinearMap":
        """Drop interior breakpoints where the slope does not change."""
        bps, vals = self.breakpoints, self.values
        keep_b, keep_v = [bps[0]], [vals[0]]
        slopes = self.slopes()
        for i in range(1, len(bps) - 1):
            if slopes[i - 1] != slopes[i]:
                keep_b.append(bps[i])
                keep_v.append(vals[i])
        keep_b.append(bps[-1])
        keep_v.append(vals[-1])
        return PiecewiseLinearMap(tuple(keep_b), tuple(keep_v))


def identity() -> PiecewiseLinearMap:
    return PiecewiseLinearMap((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))


def tent() -> PiecewiseLinearMap:
    return PiecewiseLinearMap(
        (Fraction(0), Fraction(1, 3), Fraction(2, 3), Fraction(1)),
        (Fraction(0), Fraction(1), Fraction(0), Fraction(1)),
    )


def _raw_map(bps: tuple, vals: tuple) -> PiecewiseLinearMap:
    """Construct without revalidation; caller guarantees the invariants."""
    m = object.__new__(PiecewiseLinearMap)
    object.__setattr__(m, "breakpoints", bps)
    object.__setattr__(m, "values", vals)
    return m


def compose(outer: PiecewiseLinearMap, inner: PiecewiseLinearMap) -> PiecewiseLinearMap:
    """Exact composition x -> outer(inner(x))."""
    if (len(outer.breakpoints) - 1) * (len(inner.breakpoints) - 1) >= _MAX_BREAKPOINTS:
        raise ResourceError("composition would exceed the breakpoint budget")
    obps, ovals = outer.breakpoints, outer.values
    ibps, ivals = inner.breakpoints, inner.values
    at_bp: dict = {}
    bps: list = []
    vals: list = []
    for i in range(len(ibps) - 1):
        a, b = ibps[i], ibps[i + 1]
        va, vb = ivals[i], ivals[i + 1]
        bps.append(a)
        cached = at_bp.get(va)
        if cached is None:
            cached = at_bp[va] = outer(va)
        vals.append(cached)
        if va == vb:
            continue
        # Preimages of outer breakpoints interior to this segment's value
        # range, emitted in increasing x order.
        scale = (b - a) / (vb - va)
        offset = a - va * scale
        if va < vb:
            j = bisect_right(obps, va)
            while j < len(obps) and obps[j] < vb:
                bps.append(obps[j] * scale + offset)
                vals.append(ovals[j])
                j += 1
        else:
            j = bisect_left(obps, va) - 1
            while j >= 0 and obps[j] > vb:
                bps.append(obps[j] * scale + offset)
                vals.append(ovals[j])
                j -= 1
    bps.append(ibps[-1])
    vals.append(outer(ivals[-1]))
    if len(bps) > _MAX_BREAKPOINTS:
        raise ResourceError("composition exceeded the breakpoint budget")
    return _raw_map(tuple(bps), tuple(vals))


def iterate(f: PiecewiseLinearMap, n: int) -> PiecewiseLinearMap:
    if n < 1:
        raise DomainError("iterate count must be >= 1")
    out = None
    power = f
    while n:
        if n & 1:
            out = power if out is None else compose(power, out)
        n >>= 1
        if n:
            power = compose(power, power)
    return out


def lap_count(f: PiecewiseLinearMap, n: int = 1) -> int:
    """Number of maximal monotonicity intervals of the n-th iterate."""
    g = iterate(f, n)
    vals = g.values
    signs = [
        vals[i + 1] > vals[i]
        for i in range(len(vals) - 1)
        if vals[i + 1] != vals[i]
    ]
    if not signs:
        return 1
    return 1 + sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def entropy_estimate(f: PiecewiseLinearMap, n: int) -> float:
    return math.log(lap_count(f, n)) / n


@dataclass(frozen=True)
class PsiMap:
    """Identity on the realized set of a scheme, scaled tent on each gap closure."""

    scheme: object


def eval_psi(m: PsiMap, x) -> Fraction:
    x = frac(x)
    if x < 0 or x > 1:
        raise DomainError(f"{x} outside [0,1]")
    if x == 0 or x == 1:
        return x
    where = cp.locate(m.scheme, x)
    if where is cp.IN_SET:
        return x
    lo, hi = where.lo, where.hi
    width = hi - lo
    return lo + width * tent()((x - lo) / width)


def psi_finite(A, d: int) -> PiecewiseLinearMap:
    """The pasted-tent map over the depth-d finite realization of A."""
    if d < 0:
        raise DomainError("depth must be >= 0")
    anchors = [Fraction(0)] + list(cp.realize(A, d)) + [Fraction(1)]
    bps = [Fraction(0)]
    vals = [Fraction(0)]
    for a, b in zip(anchors, anchors[1:]):
        w = b - a
        bps.extend([a + w / 3, a + 2 * w / 3, b])
        vals.extend([b, a, b])
    return PiecewiseLinearMap(tuple(bps), tuple(vals))


def entropy_pairs_symbolic(A) -> IntervalSquareRelation:
    if cp.is_empty(A):
        raise DomainError("scheme must be nonempty")
    return IntervalSquareRelation(A)


@dataclass(frozen=True)
class CpeVerdict:
    verdict: str
    rank: int
    witness: Optional[object] = None


def cpe_verdict(A) -> CpeVerdict:
    """Complete positive entropy holds exactly when the derivative cascade
    of the underlying scheme empties out."""
    if cp.is_empty(A):
        raise DomainError("scheme must be nonempty")
    rank, core = cp.cb_rank(A)
    if cp.is_empty(core):
        return CpeVerdict("CPE", rank)
    return CpeVerdict("NotCPE", rank, core)


def product_cpe_verdict(v: CpeVerdict, copies: int) -> CpeVerdict:
    """The verdict for a finite product of copies equals the base verdict."""
    if copies < 1:
        raise DomainError("need at least one copy")
    return v
