"""Gap-order maps and finite product-relation slices for closed sets in (0, 1).

Given a closed set presented as a scheme, the functions here realize the
exact order data carried by its gap structure: for each gap, which point of
the set gets pinned at probes to the right of the gap (``t_of``, assembled
from ``n_of`` and ``m_of``), and how that pinned data organizes itself along
the derivative chain.  ``CoordinateModel`` then fixes finitely many gap left
endpoints as coordinates and enumerates assignments over a small value
domain, so the induced pair relations -- change the value at one gap, keep
the pinned values to its right -- become finite boolean matrices that can be
unioned, boxed, and transitively closed exhaustively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .compacta import (
    Gap,
    Scheme,
    cb_rank,
    derivative,
    gap_right_of,
    is_empty,
    is_left_endpoint,
    locate,
    member,
)
from .errors import DomainError, ResourceError, ValidationError
from .gamma import _transitive_closure
from .rationals import frac

_ZERO = Fraction(0)
_ONE = Fraction(1)

_MAX_COORDS = 5
_MAX_VALUES = 6
_MAX_POINTS = 8192

_chain_cache: dict = {}


def _level_sets(s: Scheme) -> tuple:
    """Derivative chain of a scheme: (levels, rank, core).

    ``levels[k]`` is the k-th derivative; the chain has ``rank + 1`` entries
    and ``levels[rank]`` equals the stationary core (empty for scattered
    sets).
    """
    if s in _chain_cache:
        return _chain_cache[s]
    rank, core = cb_rank(s)
    chain = [s]
    for _ in range(rank):
        chain.append(derivative(chain[-1]))
    out = (tuple(chain), rank, core)
    _chain_cache[s] = out
    return out


def _min_in(s: Scheme, lo: Fraction, hi: Fraction):
    """Smallest member of s in [lo, hi], or None when the slice is empty."""
    if is_empty(s):
        return None
    if member(s, lo):
        return lo
    g = locate(s, lo)
    if not g.hi_in_set or g.hi > hi:
        return None
    return g.hi


def m_of(A: Scheme, a) -> Fraction:
    """Right endpoint of the next-level gap interval around a point.

    A point sitting at derivative level k maps to the right endpoint of the
    level-(k+1) contiguous interval containing it.  Points of the stationary
    core map to themselves.  When the next level is empty, or the point sits
    right of all of it, the boundary convention value 1 is returned.
    """
    a = frac(a)
    if not member(A, a):
        raise DomainError("point %s is not in the set" % a)
    chain, rank, core = _level_sets(A)
    if not is_empty(core) and member(core, a):
        return a
    level = 0
    for k in range(1, rank + 1):
        if member(chain[k], a):
            level = k
        else:
            break
    nxt = chain[level + 1]
    if is_empty(nxt):
        return _ONE
    g = locate(nxt, a)
    return g.hi if g.hi_in_set else _ONE


def n_of(A: Scheme, gap: Gap, c) -> Fraction:
    """First return of the deepest derivative level on [r(gap), c].

    Scans the derivative chain for levels that meet [r(gap), c]; nested
    levels make the minima increase, so the answer is the minimum of the
    deepest level that still meets the window.
    """
    c = frac(c)
    if not isinstance(gap, Gap):
        raise ValidationError("expected a Gap, got %r" % (gap,))
    if not gap.hi_in_set:
        raise DomainError("the gap right of %s has no endpoint inside the set" % gap.lo)
    b = gap.hi
    if not member(A, c):
        raise DomainError("probe %s is not in the set" % c)
    if c < b:
        raise DomainError("probe %s lies left of the gap end %s" % (c, b))
    chain, _, _ = _level_sets(A)
    best = b
    for level in chain:
        v = _min_in(level, b, c)
        if v is not None:
            best = v
    return best


def t_of(A: Scheme, gap: Gap, c) -> Fraction:
    """Value the gap pins at a probe: m_of applied to n_of.

    The probe must itself be a gap left endpoint at or right of the gap's
    end.  The result never lies left of r(gap).
    """
    c = frac(c)
    if not is_left_endpoint(A, c):
        raise DomainError("probe %s is not a gap left endpoint" % c)
    return m_of(A, n_of(A, gap, c))


def _dotted_gap_at(s: Scheme, a: Fraction) -> Gap:
    """Gap of s whose dotted interval (gap plus left endpoint) holds a.

    For the empty scheme the whole open unit interval acts as the single
    gap.
    """
    if is_empty(s):
        return Gap(_ZERO, _ONE, False, False)
    if member(s, a):
        g = gap_right_of(s, a)
        if g is None:
            raise DomainError("%s is a right-limit of the level set" % a)
        return g
    return locate(s, a)


class CoordinateModel:
    """Finite coordinate slice of the gap-indexed product construction.

    Coordinates are finitely many gap left endpoints of ``scheme``.  Each
    coordinate takes values from a shared domain holding every pinned
    t-value that the chosen coordinates reference, plus two abstract moving
    symbols.  Fraction values are held fixed by the move relation; by
    default only the two symbols may swap.

    With ``tail_mode="immutable"`` an extra read-only coordinate tracks,
    per changing gap, the value the set pins arbitrarily far to the right.
    Pairs built from different gap families then carry different tail
    values, which no box or closure can erase.
    """

    def __init__(self, scheme: Scheme, left_points, tail_mode: str = "open",
                 edges=None, symbols=("s0", "s1")):
        pts = tuple(sorted(frac(p) for p in left_points))
        if not pts:
            raise ValidationError("at least one coordinate is required")
        if len(set(pts)) != len(pts):
            raise ValidationError("coordinates must be distinct")
        if len(pts) > _MAX_COORDS:
            raise ValidationError("too many coordinates (max %d)" % _MAX_COORDS)
        for p in pts:
            try:
                ok = is_left_endpoint(scheme, p)
            except DomainError:
                ok = False
            if not ok:
                raise ValidationError("coordinate %s is not a gap left endpoint" % p)
        if tail_mode not in ("open", "immutable"):
            raise ValidationError("tail_mode must be 'open' or 'immutable'")
        syms = tuple(str(s) for s in symbols)
        if len(syms) != 2 or syms[0] == syms[1]:
            raise ValidationError("exactly two distinct abstract symbols are required")

        self.scheme = scheme
        self.left_points = pts
        self.tail_mode = tail_mode
        self.symbols = syms

        chain, rank, core = _level_sets(scheme)
        self.rank = rank
        self.core = core

        self.gaps = {a: gap_right_of(scheme, a) for a in pts}
        t_table = {}
        for a in pts:
            g = self.gaps[a]
            row = {}
            if g.hi_in_set:
                for c in pts:
                    if c >= g.hi:
                        row[c] = t_of(scheme, g, c)
            t_table[a] = row
        self.t_table = t_table

        # Far-right pinned value per coordinate: the value t would take at a
        # probe beyond every realized point.  None for a gap reaching 1.
        classes = {}
        for a in pts:
            g = self.gaps[a]
            if not g.hi_in_set:
                classes[a] = None
                continue
            probe = g.hi
            for level in chain:
                v = _min_in(level, g.hi, _ONE)
                if v is not None:
                    probe = v
            classes[a] = m_of(scheme, probe)
        self.tail_classes = classes

        vals = set()
        for row in t_table.values():
            vals.update(row.values())
        vals.update(v for v in classes.values() if v is not None)
        self.fraction_values = tuple(sorted(vals))
        self.values = self.fraction_values + self.symbols
        if len(self.values) > _MAX_VALUES:
            raise ValidationError(
                "value domain has %d entries (max %d)" % (len(self.values), _MAX_VALUES))

        if tail_mode == "immutable":
            self.tail_values = tuple(sorted({v for v in classes.values() if v is not None}))
        else:
            self.tail_values = ()
        self.has_tail = bool(self.tail_values)

        radices = [len(self.values)] * len(pts)
        if self.has_tail:
            radices.append(len(self.tail_values))
        self.radices = tuple(radices)
        n_points = 1
        for r in radices:
            n_points *= r
        if n_points > _MAX_POINTS:
            raise ResourceError(
                "model enumerates %d assignments (cap %d)" % (n_points, _MAX_POINTS))
        self.n_points = n_points
        self.digits = np.array(
            list(itertools.product(*[range(r) for r in radices])), dtype=np.int64)
        weights = [1] * len(radices)
        for j in range(len(radices) - 2, -1, -1):
            weights[j] = weights[j + 1] * radices[j + 1]
        self._weights = np.array(weights, dtype=np.int64)
        self._indices = np.arange(n_points, dtype=np.int64)

        if edges is None:
            edges = ((syms[0], syms[1]),)
        norm = []
        for e in edges:
            try:
                u, v = e
            except (TypeError, ValueError):
                raise ValidationError("each move edge must be a value pair")
            norm.append((self._as_value(u), self._as_value(v)))
        self.edges = tuple(norm)

    def _as_value(self, v):
        if isinstance(v, str) and v in self.symbols:
            return v
        try:
            f = frac(v)
        except (ValidationError, ValueError, TypeError):
            raise ValidationError("%r is not a value of this model" % (v,))
        if f not in self.fraction_values:
            raise ValidationError("%s is not a value of this model" % f)
        return f

    def coordinate_position(self, a) -> int:
        a = frac(a)
        try:
            return self.left_points.index(a)
        except ValueError:
            raise ValidationError("%s is not a coordinate of this model" % a)

    def value_position(self, v) -> int:
        v = self._as_value(v)
        return self.values.index(v)

    def point_values(self, idx: int) -> dict:
        """Readable assignment for one enumerated point, for witnesses."""
        row = self.digits[idx]
        out = {}
        for pos, a in enumerate(self.left_points):
            v = self.values[row[pos]]
            out[str(a)] = v if isinstance(v, str) else str(v)
        if self.has_tail:
            out["tail"] = str(self.tail_values[row[-1]])
        return out

    def _off_signature(self, positions) -> np.ndarray:
        """Point codes that ignore the digits at the given coordinate positions."""
        sig = self._indices.copy()
        for j in positions:
            sig -= self.digits[:, j] * self._weights[j]
        return sig

    def _pin_mask(self, pins: dict, tail_value=None) -> np.ndarray:
        """Mask of points whose coordinates (and tail) match the pinned values."""
        ok = np.ones(self.n_points, dtype=bool)
        for a, v in pins.items():
            ok &= self.digits[:, self.coordinate_position(a)] == self.value_position(v)
        if tail_value is not None:
            ok &= self.digits[:, -1] == self.tail_values.index(tail_value)
        return ok

    def _edge_matrix(self) -> np.ndarray:
        """Allowed unordered value moves; fraction values are always fixed."""
        k = len(self.values)
        e = np.zeros((k, k), dtype=bool)
        for u, v in self.edges:
            iu, iv = self.values.index(u), self.values.index(v)
            e[iu, iv] = e[iv, iu] = True
        for v in self.fraction_values:
            i = self.values.index(v)
            e[i, i] = True
        return e

    def moves_connected(self) -> bool:
        """Whether the move edges alone link every value to every other."""
        k = len(self.values)
        if k <= 1:
            return True
        adj = {i: set() for i in range(k)}
        for u, v in self.edges:
            iu, iv = self.values.index(u), self.values.index(v)
            adj[iu].add(iv)
            adj[iv].add(iu)
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in adj[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == k


@dataclass(eq=False)
class ProductRelation:
    """Boolean pair relation over a model's enumerated assignments."""

    model: CoordinateModel
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.model.n_points
        if self.matrix.shape != (n, n):
            raise ValidationError("relation matrix shape does not match the model")
        self.matrix = self.matrix.astype(bool)

    def pair_count(self) -> int:
        return int(self.matrix.sum())

    def is_full(self) -> bool:
        return bool(self.matrix.all())

    def equals(self, other: "ProductRelation") -> bool:
        return self.model is other.model and np.array_equal(self.matrix, other.matrix)

    def is_subset(self, other: "ProductRelation") -> bool:
        return self.model is other.model and not (self.matrix & ~other.matrix).any()

    def __or__(self, other: "ProductRelation") -> "ProductRelation":
        if other.model is not self.model:
            raise ValidationError("cannot combine relations over different models")
        return ProductRelation(self.model, self.matrix | other.matrix)


def relation_empty(model: CoordinateModel) -> ProductRelation:
    return ProductRelation(model, np.zeros((model.n_points,) * 2, dtype=bool))


def relation_diagonal(model: CoordinateModel) -> ProductRelation:
    return ProductRelation(model, np.eye(model.n_points, dtype=bool))


def relation_full(model: CoordinateModel) -> ProductRelation:
    return ProductRelation(model, np.ones((model.n_points,) * 2, dtype=bool))


def _gap_pair_matrix(model: CoordinateModel, a: Fraction, with_moves: bool) -> np.ndarray:
    """Pairs that agree everywhere except at one gap's coordinate.

    Both sides carry the gap's pinned values at coordinates to its right
    (and, under an immutable tail, the gap's far-right class).  With
    ``with_moves`` the two values at the changing coordinate must also form
    an allowed move.
    """
    j = model.coordinate_position(a)
    tail = model.tail_classes[a] if model.has_tail else None
    ok = model._pin_mask(model.t_table[a], tail)
    sig = model._off_signature((j,))
    m = (sig[:, None] == sig[None, :]) & ok[:, None] & ok[None, :]
    if with_moves:
        va = model.digits[:, j]
        edge = model._edge_matrix()
        m &= edge[va[:, None], va[None, :]]
    return m


_KINDS = ("D_a", "B_a", "D_A", "B_A")


def build_relation(model: CoordinateModel, kind: str, a=None) -> ProductRelation:
    """One of the four basic relations over the model's assignments.

    ``D_a``: pairs equal off the coordinate a, both sides pinned right of
    a's gap.  ``B_a``: additionally the changing values form an allowed
    move.  ``D_A``: union of D_a over all coordinates.  ``B_A``: union of
    B_a plus the diagonal.
    """
    if kind not in _KINDS:
        raise ValidationError("kind must be one of %s" % (_KINDS,))
    if kind in ("D_a", "B_a"):
        if a is None:
            raise ValidationError("kind %r needs a coordinate" % kind)
        return ProductRelation(model, _gap_pair_matrix(model, frac(a), kind == "B_a"))
    if a is not None:
        raise ValidationError("kind %r takes no coordinate" % kind)
    m = np.zeros((model.n_points,) * 2, dtype=bool)
    for p in model.left_points:
        m |= _gap_pair_matrix(model, p, kind == "B_A")
    if kind == "B_A":
        m |= np.eye(model.n_points, dtype=bool)
    return ProductRelation(model, m)


def box(model: CoordinateModel, coords, rel: ProductRelation) -> ProductRelation:
    """Free the listed coordinates on both sides of every pair.

    A pair survives when some pair of the input agrees with it at every
    coordinate outside the freed set.  The tail coordinate is never freed.
    """
    if rel.model is not model:
        raise ValidationError("relation belongs to a different model")
    positions = sorted({model.coordinate_position(c) for c in coords})
    if not positions:
        return ProductRelation(model, rel.matrix.copy())
    nd = len(model.radices)
    cube = rel.matrix.reshape(model.radices + model.radices)
    axes = tuple(positions) + tuple(p + nd for p in positions)
    red = cube.any(axis=axes, keepdims=True)
    out = np.broadcast_to(red, model.radices + model.radices)
    return ProductRelation(model, out.reshape(rel.matrix.shape).copy())


def closure_plus(rel: ProductRelation) -> ProductRelation:
    """Pairs reachable by chaining one or more related steps."""
    return ProductRelation(rel.model, _transitive_closure(rel.matrix))


def stabilize(rel: ProductRelation) -> ProductRelation:
    """Transitive closure with the diagonal adjoined; fixed under both."""
    eye = np.eye(rel.model.n_points, dtype=bool)
    return ProductRelation(rel.model, _transitive_closure(rel.matrix | eye))


def level_gap_slices(model: CoordinateModel, level: int) -> list:
    """Per-gap boxed relations at one derivative level.

    Coordinates are grouped by the level gap whose dotted interval holds
    them; each group's single-gap relations are unioned, then boxed over
    the group's own coordinates.  Returns (gap, coordinates, relation)
    triples ordered left to right.
    """
    chain, rank, _ = _level_sets(model.scheme)
    if not isinstance(level, int) or isinstance(level, bool) or not 0 <= level <= rank:
        raise DomainError("level must be an integer between 0 and %d" % rank)
    groups = {}
    for a in model.left_points:
        g = _dotted_gap_at(chain[level], a)
        groups.setdefault((g.lo, g.hi), (g, []))[1].append(a)
    out = []
    for _, (g, coords) in sorted(groups.items()):
        m = np.zeros((model.n_points,) * 2, dtype=bool)
        for a in coords:
            m |= _gap_pair_matrix(model, a, False)
        out.append((g, tuple(coords), box(model, coords, ProductRelation(model, m))))
    return out


def e_sets(model: CoordinateModel, level: int) -> ProductRelation:
    """Union of the level's boxed gap slices, with the diagonal adjoined."""
    m = np.eye(model.n_points, dtype=bool)
    for _, _, rel in level_gap_slices(model, level):
        m = m | rel.matrix
    return ProductRelation(model, m)


def _first_pair(model: CoordinateModel, matrix: np.ndarray):
    """Decode the first pair of a boolean matrix for witness reporting."""
    idx = np.argwhere(matrix)
    if idx.size == 0:
        return None
    i, j = (int(v) for v in idx[0])
    return {"left": model.point_values(i), "right": model.point_values(j)}


def check_propositions(model: CoordinateModel) -> list:
    """Run the structural checks the construction promises; one record each.

    Every record carries the check name, whether the model meets the
    check's hypotheses (``applicable``), whether it held (vacuously true
    when not applicable), a counterexample ``witness`` when it failed, and
    a one-line ``detail``.
    """
    chain, rank, core = _level_sets(model.scheme)
    records = []

    def add(name, applicable, passed, witness=None, detail=""):
        records.append({
            "check": name,
            "applicable": bool(applicable),
            "passed": bool(passed),
            "witness": witness,
            "detail": detail,
        })

    # Pinned values never fall left of their gap's end.
    seen = False
    bad = None
    for a in model.left_points:
        b = model.gaps[a].hi
        for c, v in sorted(model.t_table[a].items()):
            seen = True
            if v < b:
                bad = {"coordinate": str(a), "probe": str(c),
                       "value": str(v), "gap_end": str(b)}
    add("t-value-at-least-gap-end", seen, bad is None, bad,
        "each pinned value sits at or right of the pinning gap's end")

    # t agrees across sibling gaps: coordinates sharing a level gap pin the
    # same values at probes right of that gap.
    seen = False
    bad = None
    for level in range(1, rank + 1):
        groups = {}
        for a in model.left_points:
            g = _dotted_gap_at(chain[level], a)
            groups.setdefault((g.lo, g.hi), []).append(a)
        for (_, hi), coords in groups.items():
            for a1, a2 in itertools.combinations(coords, 2):
                for c in model.left_points:
                    if c >= hi:
                        seen = True
                        if model.t_table[a1][c] != model.t_table[a2][c]:
                            bad = {"level": level, "coordinates": [str(a1), str(a2)],
                                   "probe": str(c),
                                   "values": [str(model.t_table[a1][c]),
                                              str(model.t_table[a2][c])]}
    add("t-agrees-across-sibling-gaps", seen, bad is None, bad,
        "gaps sharing a level gap pin identical values right of it")

    # Right of a core gap every sheltered coordinate pins the gap's end.
    seen = False
    bad = None
    if not is_empty(core):
        for a in model.left_points:
            g = _dotted_gap_at(core, a)
            for c in model.left_points:
                if c >= g.hi:
                    seen = True
                    if model.t_table[a][c] != g.hi:
                        bad = {"coordinate": str(a), "probe": str(c),
                               "value": str(model.t_table[a][c]),
                               "core_gap_end": str(g.hi)}
    add("t-constant-right-of-core-gaps", seen, bad is None, bad,
        "inside a core gap, every pin right of the gap equals its end")

    # Probes caught strictly inside the next level's gap pin its end.
    seen = False
    bad = None
    for alpha in range(rank):
        for a in model.left_points:
            g_next = _dotted_gap_at(chain[alpha + 1], a)
            g_here = _dotted_gap_at(chain[alpha], a)
            for c in model.left_points:
                if c >= g_here.hi and g_next.lo < c < g_next.hi:
                    seen = True
                    if model.t_table[a][c] != g_next.hi:
                        bad = {"level": alpha, "coordinate": str(a),
                               "probe": str(c),
                               "value": str(model.t_table[a][c]),
                               "expected": str(g_next.hi)}
    add("t-fixed-inside-next-level-gap", seen, bad is None, bad,
        "probes inside the coarser gap all pin the coarser gap's end")

    d_all = build_relation(model, "D_A")
    b_all = build_relation(model, "B_A")
    eye = np.eye(model.n_points, dtype=bool)

    # Move pairs are change pairs: B_A never relates more than D_A plus the
    # diagonal does.
    extra = b_all.matrix & ~(d_all.matrix | eye)
    add("move-pairs-are-change-pairs", True, not extra.any(),
        _first_pair(model, extra),
        "the move relation is the change relation with moves filtered")

    # Box laws: idempotence, union distributivity, nested containment.
    half = max(1, len(model.left_points) // 2)
    first = model.left_points[:half]
    second = model.left_points[half:]
    law = None
    bx = box(model, first, d_all)
    if not box(model, first, bx).equals(bx):
        law = "repeat"
    union = d_all | b_all
    if (law is None
            and not box(model, first, union).equals(
                box(model, first, d_all) | box(model, first, b_all))):
        law = "union"
    if law is None and second:
        nested = box(model, first, box(model, second, d_all))
        if not nested.is_subset(box(model, model.left_points, d_all)):
            law = "nesting"
    add("box-laws-hold-on-samples", True, law is None,
        None if law is None else {"law": law},
        "repeat application, unions, and nesting behave on built relations")

    slices = {lv: level_gap_slices(model, lv) for lv in range(rank + 1)}
    esets = {}
    for lv in range(rank + 1):
        m = eye.copy()
        for _, _, rel in slices[lv]:
            m |= rel.matrix
        esets[lv] = ProductRelation(model, m)

    # Each boxed gap slice is transitive as it stands.
    bad = None
    for lv in range(rank + 1):
        for g, _, rel in slices[lv]:
            if not closure_plus(rel).equals(rel):
                bad = {"level": lv, "gap": [str(g.lo), str(g.hi)]}
    add("boxed-gap-slices-are-transitive", True, bad is None, bad,
        "chaining pairs of one slice never leaves the slice")

    # Dual route: each boxed slice equals its direct logical description --
    # pairs equal outside the group's coordinates whose sides match some
    # member gap's pins right of the level gap.
    bad = None
    for lv in range(rank + 1):
        for g, coords, rel in slices[lv]:
            positions = [model.coordinate_position(a) for a in coords]
            sig = model._off_signature(positions)
            direct = np.zeros((model.n_points,) * 2, dtype=bool)
            for a in coords:
                pins = {c: v for c, v in model.t_table[a].items() if c >= g.hi}
                tail = model.tail_classes[a] if model.has_tail else None
                ok = model._pin_mask(pins, tail)
                direct |= ok[:, None] & ok[None, :]
            direct &= sig[:, None] == sig[None, :]
            if not np.array_equal(direct, rel.matrix):
                bad = {"level": lv, "gap": [str(g.lo), str(g.hi)]}
    add("boxed-slices-match-direct-form", True, bad is None, bad,
        "box machinery and the closed-form description build the same pairs")

    # The bottom level reproduces the base change relation exactly.
    add("level-zero-matches-base", True,
        np.array_equal(esets[0].matrix, d_all.matrix | eye), None,
        "level-0 slices recover the union of single-gap relations")

    # The base relation embeds into every level.
    bad = None
    for lv in range(rank + 1):
        if not d_all.is_subset(esets[lv]):
            bad = {"level": lv,
                   "pair": _first_pair(model, d_all.matrix & ~esets[lv].matrix)}
    add("base-pairs-inside-every-level", True, bad is None, bad,
        "every single-gap pair survives into each level's slices")

    # Two inhabited level gaps keep the level relation partial.
    seen = False
    bad = None
    for lv in range(rank + 1):
        if len(slices[lv]) >= 2:
            seen = True
            if esets[lv].is_full():
                bad = {"level": lv}
    add("two-inhabited-gaps-leave-pairs-out", seen, bad is None, bad,
        "distinct gap families cannot relate everything at their level")

    # Finer dotted gaps nest inside coarser ones and stay disjoint.
    bad = None
    for alpha in range(rank):
        for a in model.left_points:
            g_fine = _dotted_gap_at(chain[alpha], a)
            g_coarse = _dotted_gap_at(chain[alpha + 1], a)
            if not (g_coarse.lo <= g_fine.lo and g_fine.hi <= g_coarse.hi):
                bad = {"level": alpha, "coordinate": str(a)}
    for lv in range(rank + 1):
        gaps = sorted((g.lo, g.hi) for g, _, _ in slices[lv])
        for (_, hi1), (lo2, _) in zip(gaps, gaps[1:]):
            if hi1 > lo2:
                bad = {"level": lv, "overlap": [str(hi1), str(lo2)]}
    add("finer-gaps-nest-inside-coarser", rank >= 1, bad is None, bad,
        "each coordinate's finer gap sits inside its coarser gap")

    scattered = is_empty(core)
    tails_split = model.has_tail and len(model.tail_values) >= 2

    # Moving one level up stays inside the transitive closure below.
    app = scattered and not tails_split and rank >= 1
    bad = None
    if app:
        for alpha in range(rank):
            clo = _transitive_closure(esets[alpha].matrix)
            missing = esets[alpha + 1].matrix & ~clo
            if missing.any():
                bad = {"level": alpha + 1, "pair": _first_pair(model, missing)}
    add("level-step-stays-inside-closure", app, bad is None, bad,
        "each level's pairs chain together from the level below")

    # For scattered sets the top level relates everything.
    app = scattered and not tails_split
    add("top-level-collapses-for-scattered-sets", app,
        esets[rank].is_full() if app else True, None,
        "once the derivative chain empties, the slice frees every coordinate")

    # ... and chaining the base relation alone reaches everything.
    bad = None
    if app:
        stab = stabilize(d_all)
        if not stab.is_full():
            bad = {"missing_pair": _first_pair(model, ~stab.matrix)}
        else:
            for lv in range(rank + 1):
                if not esets[lv].is_subset(stab):
                    bad = {"level": lv}
    add("base-reaches-everything-for-scattered-sets", app, bad is None, bad,
        "closing the base change relation recovers the full square")

    # When moves connect every value, the move and change relations close
    # to the same thing.
    connected = model.moves_connected()
    passed = True
    witness = None
    if connected:
        sb = stabilize(b_all)
        sd = stabilize(d_all)
        passed = sb.equals(sd)
        if not passed:
            witness = _first_pair(model, sb.matrix ^ sd.matrix)
    add("connected-moves-close-like-changes", connected, passed, witness,
        "with a connected move graph, filtering moves costs no reachability")

    # Immutable tails keep distinct core gap families apart even after the
    # terminal family is freed and everything is chained.
    core_slices = [] if scattered else slices[rank]
    nonterminal = [s for s in core_slices if s[0].hi < _ONE]
    terminal = [s for s in core_slices if s[0].hi == _ONE]
    app = (not scattered) and tails_split and len(nonterminal) >= 2
    passed = True
    witness = None
    detail = "pairs pinned to different far-right values never merge"
    if app:
        top = esets[rank]
        if terminal:
            top = box(model, terminal[0][1], top)
        stab = stabilize(top)
        passed = not stab.is_full()
        if passed:
            detail = ("%d of %d pairs after closing; %s"
                      % (stab.pair_count(), model.n_points ** 2,
                         "already closed" if stab.equals(
                             ProductRelation(model, top.matrix | eye))
                         else "closure added pairs"))
        else:
            witness = {"note": "closure reached the full square"}
    add("pinned-tails-keep-core-families-apart", app, passed, witness, detail)

    return records
