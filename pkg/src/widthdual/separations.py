"""Oriented separations, separation systems and separation universes.

A separation of a ground set cuts it into two sides.  Each separation has two
orientations (one per side it can "point to"); orientations are partially
ordered, and flipping a separation reverses the order:

    r <= s  iff  inverse(s) <= inverse(r).                              (*)

A *separation system* is a finite set of orientations closed under inversion,
with that order.  A *universe* additionally carries a join (supremum) and meet
(infimum) satisfying inverse(r v s) = inverse(r) ^ inverse(s).

Everything here is payload-driven: a universe owns a list of concrete payloads
(pairs of bitmasks over ground elements), and an OrientedSep is just a handle
(universe, index).  Universes intern payloads on demand, so joins and meets of
known separations are always available even when they fall outside whatever
order bound a system was built with.  All canonical choices (tie-breaks,
serialization) go through payload keys, never through set iteration order, so
identical inputs give byte-identical outputs.

Vocabulary used throughout the package:

  degenerate   s == inverse(s)
  small        s <= inverse(s)
  trivial      some *other* separation in the system has both of its
               orientations strictly above s; the witness matters and is
               reported
  co-trivial   inverse(s) is trivial
  star         a non-empty set of orientations pointing pairwise toward each
               other: r <= inverse(s) for all distinct members
  consistent   a set with no two members of distinct separations pointing
               away from each other: never inverse(x) < y for x, y chosen
"""

from __future__ import annotations

import itertools


class SeparationError(Exception):
    """Invalid payload, mixed universes, or misuse of an operation."""


def mask_of(items) -> int:
    m = 0
    for v in items:
        m |= 1 << v
    return m


def bits_of(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class OrientedSep:
    """One orientation of a separation; a handle into its universe."""

    __slots__ = ("universe", "index")

    def __init__(self, universe, index):
        self.universe = universe
        self.index = index

    @property
    def payload(self) -> tuple[int, int]:
        return self.universe._payloads[self.index]

    @property
    def side_a(self) -> tuple[int, ...]:
        return bits_of(self.payload[0])

    @property
    def side_b(self) -> tuple[int, ...]:
        return bits_of(self.payload[1])

    @property
    def inverse(self) -> "OrientedSep":
        return self.universe.inverse(self)

    def key(self):
        """Canonical sort key: lexicographic on (side A, side B)."""
        return self.universe._key_of(self.index)

    def sep_key(self):
        """Canonical key of the underlying unordered separation."""
        u = self.universe
        return min(u._key_of(self.index), u._key_of(u._inv[self.index]))

    def __eq__(self, other):
        return (
            isinstance(other, OrientedSep)
            and self.universe is other.universe
            and self.index == other.index
        )

    def __hash__(self):
        return hash((id(self.universe), self.index))

    def __repr__(self):
        a, b = self.payload
        return "({%s}|{%s})" % (
            ",".join(map(str, bits_of(a))),
            ",".join(map(str, bits_of(b))),
        )


class SepUniverse:
    """Base: interned payloads with inversion, order, join and meet.

    Payloads are (a_mask, b_mask) over ground elements 0..n-1.  The order is
    containment both ways: (A1,B1) <= (A2,B2) iff A1 is a subset of A2 and B1
    a superset of B2.  Join and meet are the componentwise union/intersection
    pair; subclasses restrict which payloads are admissible and must be closed
    under these operations.
    """

    def __init__(self, n_ground: int):
        self.n_ground = n_ground
        self.full_mask = (1 << n_ground) - 1
        self._payloads: list[tuple[int, int]] = []
        self._lookup: dict[tuple[int, int], int] = {}
        self._inv: list[int] = []
        self._keys: list[tuple] = []
        self._base_count = 0

    def _key_of(self, idx: int):
        # sort keys are asked for millions of times; build them once
        keys = self._keys
        while len(keys) <= idx:
            a, b = self._payloads[len(keys)]
            keys.append((bits_of(a), bits_of(b)))
        return keys[idx]

    # -- payload admission -------------------------------------------------

    def _check_payload(self, a_mask: int, b_mask: int) -> None:
        raise NotImplementedError

    def _intern(self, a_mask: int, b_mask: int) -> int:
        key = (a_mask, b_mask)
        idx = self._lookup.get(key)
        if idx is not None:
            return idx
        self._check_payload(a_mask, b_mask)
        idx = len(self._payloads)
        self._payloads.append(key)
        self._lookup[key] = idx
        inv_key = (b_mask, a_mask)
        jdx = self._lookup.get(inv_key)
        if jdx is None:
            jdx = len(self._payloads)
            self._payloads.append(inv_key)
            self._lookup[inv_key] = jdx
            self._inv.append(jdx)  # for idx
            self._inv.append(idx)  # for jdx
        else:
            self._inv.append(jdx)
        return idx

    def sep_from_masks(self, a_mask: int, b_mask: int) -> OrientedSep:
        return OrientedSep(self, self._intern(a_mask, b_mask))

    def sep(self, side_a, side_b) -> OrientedSep:
        return self.sep_from_masks(mask_of(side_a), mask_of(side_b))

    def seal_base(self) -> None:
        """Mark the currently interned payloads as the materialized base."""
        self._base_count = len(self._payloads)

    def base_elements(self) -> list[OrientedSep]:
        return [OrientedSep(self, i) for i in range(self._base_count)]

    # -- algebra ------------------------------------------------------------

    def _require_same(self, *seps) -> None:
        for s in seps:
            if s.universe is not self:
                raise SeparationError("separations from different universes")

    def inverse(self, s: OrientedSep) -> OrientedSep:
        self._require_same(s)
        return OrientedSep(self, self._inv[s.index])

    def leq(self, r: OrientedSep, s: OrientedSep) -> bool:
        self._require_same(r, s)
        ra, rb = r.payload
        sa, sb = s.payload
        return (ra & ~sa) == 0 and (sb & ~rb) == 0

    def lt(self, r: OrientedSep, s: OrientedSep) -> bool:
        return r.index != s.index and self.leq(r, s)

    def join(self, r: OrientedSep, s: OrientedSep) -> OrientedSep:
        self._require_same(r, s)
        ra, rb = r.payload
        sa, sb = s.payload
        return self.sep_from_masks(ra | sa, rb & sb)

    def meet(self, r: OrientedSep, s: OrientedSep) -> OrientedSep:
        self._require_same(r, s)
        ra, rb = r.payload
        sa, sb = s.payload
        return self.sep_from_masks(ra & sa, rb | sb)

    def is_degenerate(self, s: OrientedSep) -> bool:
        a, b = s.payload
        return a == b

    def is_small(self, s: OrientedSep) -> bool:
        return self.leq(s, self.inverse(s))


def is_star(members) -> bool:
    """True iff the non-empty set of orientations points pairwise inward."""
    members = list(members)
    if not members:
        raise SeparationError("a star must be non-empty")
    u = members[0].universe
    for r, s in itertools.combinations(members, 2):
        if not (u.leq(r, u.inverse(s)) and u.leq(s, u.inverse(r))):
            return False
    return True


def is_consistent(members) -> bool:
    """No two chosen orientations of distinct separations point apart.

    Violated exactly when inverse(x) < y for members x, y whose underlying
    separations differ.
    """
    members = list(members)
    if not members:
        return True
    u = members[0].universe
    for x, y in itertools.permutations(members, 2):
        ix = u.inverse(x)
        if ix.index == y.index or x.index == y.index:
            continue  # same separation
        if u.lt(ix, y):
            return False
    return True


def consistency_violations(members):
    """All offending pairs (x, y) with inverse(x) < y, for error reports."""
    members = list(members)
    bad = []
    if not members:
        return bad
    u = members[0].universe
    for x, y in itertools.permutations(members, 2):
        ix = u.inverse(x)
        if ix.index == y.index or x.index == y.index:
            continue
        if u.lt(ix, y):
            bad.append((x, y))
    return bad


def nested(r: OrientedSep, s: OrientedSep) -> bool:
    """True iff some orientations of r and s are comparable."""
    u = r.universe
    si = u.inverse(s)
    return u.leq(r, s) or u.leq(s, r) or u.leq(r, si) or u.leq(si, r)


def points_toward(r: OrientedSep, s: OrientedSep) -> bool:
    """True iff r <= s or r <= inverse(s)."""
    u = r.universe
    return u.leq(r, s) or u.leq(r, u.inverse(s))


class Classification:
    """All flags that apply to one orientation inside one system."""

    __slots__ = ("degenerate", "small", "trivial", "co_trivial", "witness")

    def __init__(self, degenerate, small, trivial, co_trivial, witness):
        self.degenerate = degenerate
        self.small = small
        self.trivial = trivial
        self.co_trivial = co_trivial
        self.witness = witness

    @property
    def plain(self) -> bool:
        return not (self.degenerate or self.small or self.trivial or self.co_trivial)

    def __repr__(self):
        flags = [
            name
            for name in ("degenerate", "small", "trivial", "co_trivial")
            if getattr(self, name)
        ]
        return "Classification(%s)" % (",".join(flags) or "plain")


class SeparationSystem:
    """A finite inversion-closed set of orientations from one universe.

    Elements get canonical local indices (sorted by payload key).  Dense
    order rows are built lazily as bitmasks over local indices and are only
    precomputed for systems up to DENSE_LIMIT elements; beyond that leq is
    answered from payloads on demand.
    """

    DENSE_LIMIT = 20000

    def __init__(self, universe, oriented, order_fn=None, order_bound=None):
        self.universe = universe
        elems = sorted(set(oriented), key=lambda s: s.key())
        for s in elems:
            universe._require_same(s)
        present = {s.index for s in elems}
        for s in elems:
            if universe._inv[s.index] not in present:
                raise SeparationError("system not closed under inversion: %r" % (s,))
        self.elements: tuple[OrientedSep, ...] = tuple(elems)
        self._local: dict[int, int] = {s.index: i for i, s in enumerate(elems)}
        self.order_fn = order_fn
        self.order_bound = order_bound
        self._below: list[int] | None = None
        self._strictly_above: list[int] | None = None
        self._trivial: list[OrientedSep | None] | None = None
        self._canonical: list[OrientedSep] | None = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def local(self, s: OrientedSep) -> int:
        i = self._local.get(s.index)
        if i is None:
            raise SeparationError("separation not in system: %r" % (s,))
        return i

    def contains(self, s: OrientedSep) -> bool:
        """Membership; order-backed systems re-test via the order function."""
        if s.universe is not self.universe:
            return False
        if self.order_fn is not None:
            return self.order_fn(s) < self.order_bound
        return s.index in self._local

    def inverse_local(self, i: int) -> int:
        return self._local[self.universe._inv[self.elements[i].index]]

    def separations(self) -> list[OrientedSep]:
        """One canonical orientation per underlying separation."""
        if self._canonical is None:
            seen = set()
            out = []
            for s in self.elements:
                k = s.sep_key()
                if k not in seen:
                    seen.add(k)
                    out.append(min(s, s.inverse, key=lambda t: t.key()))
            self._canonical = out
        return list(self._canonical)

    def degenerate_elements(self) -> list[OrientedSep]:
        return [s for s in self.elements if self.universe.is_degenerate(s)]

    # -- dense order --------------------------------------------------------

    def _build_dense(self):
        n = len(self.elements)
        leq = self.universe.leq
        below = [0] * n
        above = [0] * n
        for i, x in enumerate(self.elements):
            for j, y in enumerate(self.elements):
                if i != j and leq(y, x):
                    below[i] |= 1 << j
                    above[j] |= 1 << i
        self._below = below
        self._strictly_above = above

    def below_mask(self, i: int) -> int:
        """Bitmask of local indices strictly (as elements) below element i."""
        if self._below is None:
            if len(self.elements) > self.DENSE_LIMIT:
                leq = self.universe.leq
                x = self.elements[i]
                m = 0
                for j, y in enumerate(self.elements):
                    if i != j and leq(y, x):
                        m |= 1 << j
                return m
            self._build_dense()
        return self._below[i]

    def above_mask(self, i: int) -> int:
        if self._strictly_above is None:
            if len(self.elements) > self.DENSE_LIMIT:
                leq = self.universe.leq
                x = self.elements[i]
                m = 0
                for j, y in enumerate(self.elements):
                    if i != j and leq(x, y):
                        m |= 1 << j
                return m
            self._build_dense()
        return self._strictly_above[i]

    # -- classification -----------------------------------------------------

    def _build_trivial(self):
        n = len(self.elements)
        wit: list[OrientedSep | None] = [None] * n
        for i, r in enumerate(self.elements):
            # r trivial iff both orientations of some other separation lie
            # strictly above r; scan in canonical order so the first witness
            # is reproducible.
            for s in self.elements:
                if s.sep_key() == r.sep_key():
                    continue
                si = s.inverse
                if self.universe.lt(r, s) and self.universe.lt(r, si):
                    wit[i] = min(s, si, key=lambda t: t.key())
                    break
        self._trivial = wit

    def trivial_witness(self, s: OrientedSep) -> OrientedSep | None:
        if self._trivial is None:
            self._build_trivial()
        return self._trivial[self.local(s)]

    def classify(self, s: OrientedSep) -> Classification:
        u = self.universe
        witness = self.trivial_witness(s)
        co = self.trivial_witness(u.inverse(s)) is not None
        return Classification(
            degenerate=u.is_degenerate(s),
            small=u.is_small(s),
            trivial=witness is not None,
            co_trivial=co,
            witness=witness,
        )


class Orientation:
    """A choice of exactly one orientation per separation of a system."""

    def __init__(self, system: SeparationSystem, chosen):
        self.system = system
        chosen = sorted(set(chosen), key=lambda s: s.key())
        got = {}
        for s in chosen:
            if s.index not in system._local:
                raise SeparationError("orientation uses foreign element %r" % (s,))
            k = s.sep_key()
            if k in got and got[k].index != s.index:
                raise SeparationError(
                    "both orientations chosen for %r" % (s,))
            got[k] = s
        want = {s.sep_key() for s in system.elements}
        missing = want - set(got)
        if missing:
            raise SeparationError(
                "orientation misses %d separations" % len(missing))
        self.chosen: tuple[OrientedSep, ...] = tuple(chosen)

    def __iter__(self):
        return iter(self.chosen)

    def __len__(self):
        return len(self.chosen)

    def __contains__(self, s):
        return any(t == s for t in self.chosen)

    def chosen_mask(self) -> int:
        m = 0
        for s in self.chosen:
            m |= 1 << self.system.local(s)
        return m

    def is_consistent(self) -> bool:
        return is_consistent(self.chosen)


def low_order_subsystem(universe, order_fn, k: int) -> SeparationSystem:
    """All materialized separations of order < k, as a system.

    The universe must have been built with a cap of at least k so the base
    enumeration is complete for this bound.
    """
    if k <= 0:
        raise SeparationError("order bound must be positive, got %r" % (k,))
    cap = getattr(universe, "order_cap", None)
    if cap is not None and k > cap:
        raise SeparationError(
            "universe materialized up to order %d, cannot restrict at %d" % (cap, k)
        )
    elems = [s for s in universe.base_elements() if order_fn(s) < k]
    return SeparationSystem(universe, elems, order_fn=order_fn, order_bound=k)
