"""Constructive duality engine.

Given a separation system and a standard family of forbidden stars, decide
which of the two dual outcomes exists and build it: a tree all of whose
node stars lie in the family, or an orientation of the system avoiding the
family (consistent on the strong path).  The construction fixes the
orientations forced by singleton members first and resolves the remaining
separations one at a time, recursing on families enlarged by one forbidden
singleton and gluing the two sub-answers along a minimum-order link.

Everything here is deterministic: candidate sets are scanned in canonical
key order and ties are broken by payload.
"""

from .separations import (
    OrientedSep,
    Orientation,
    SeparationError,
    is_consistent,
    is_star,
)
from .stree import STree
from .universes import BipartitionUniverse, VertexSepUniverse


# -- star families ------------------------------------------------------------


class StarFamily:
    """Forbidden stars, queried by membership.

    Subclasses answer ``contains`` for an exact member test (the argument
    is an iterable of oriented separations with set semantics) and
    ``find_member_within``, which returns a member lying inside a given
    collection of orientations, or None.  Enumerating all members is only
    possible for explicit families.
    """

    def contains(self, star) -> bool:
        raise NotImplementedError

    def find_member_within(self, chosen):
        raise NotImplementedError

    def forces(self, s: OrientedSep) -> bool:
        """True when the reverse of s is forbidden alone, or s is its own
        reverse; such orientations appear in every avoiding orientation."""
        return s.universe.is_degenerate(s) or self.contains((s.inverse,))


class ExplicitStarFamily(StarFamily):
    """A finite family given by listing its member stars."""

    def __init__(self, universe, members):
        self.universe = universe
        canon = {}
        for m in members:
            star = tuple(sorted(set(m), key=lambda s: s.key()))
            if not star:
                raise SeparationError("a family member must not be empty")
            for s in star:
                universe._require_same(s)
            if not is_star(star):
                raise SeparationError("member %r is not a star" % (star,))
            canon[frozenset(s.index for s in star)] = star
        self._index = canon
        self.members = tuple(
            sorted(canon.values(), key=lambda st: [s.key() for s in st]))

    def contains(self, star) -> bool:
        return frozenset(s.index for s in star) in self._index

    def find_member_within(self, chosen):
        have = {s.index for s in chosen}
        for star in self.members:
            if all(s.index in have for s in star):
                return star
        return None


class AugmentedFamily(StarFamily):
    """A base family plus extra forbidden singletons.

    The duality recursion only ever grows a family by single-element stars,
    so the additions are kept as a plain set of orientations.
    """

    def __init__(self, base: StarFamily, extras):
        self.base = base
        self.extras = frozenset(extras)

    def contains(self, star) -> bool:
        star = tuple(star)
        if (star and len({s.index for s in star}) == 1
                and star[0] in self.extras):
            return True
        return self.base.contains(star)

    def find_member_within(self, chosen):
        chosen = list(chosen)
        for s in sorted(self.extras, key=lambda t: t.key()):
            if any(t == s for t in chosen):
                return (s,)
        return self.base.find_member_within(chosen)


def is_avoided(chosen, family) -> bool:
    """True iff no member of the family lies inside the given orientations."""
    return family.find_member_within(chosen) is None


def compute_forced(family, system):
    """Orientations of the system whose reverse is a forbidden singleton.

    Every orientation of the system that avoids the family must pick these;
    they seed both duality constructions.  Predicate-backed families are
    not enumerable, hence the scan over the system rather than the family.
    """
    return frozenset(
        s for s in system.elements if family.contains((s.inverse,)))


def is_standard(family, system) -> bool:
    """Does the family force every trivial orientation of the system?"""
    for s in system.elements:
        if system.trivial_witness(s) is not None and not family.forces(s):
            return False
    return True


def _require_standard(system, family):
    for s in system.elements:
        if system.trivial_witness(s) is not None and not family.forces(s):
            raise SeparationError(
                "family does not force the trivial orientation %r" % (s,))


# -- shifting -----------------------------------------------------------------


def shift_map(r, s0, s, universe=None):
    """Image of s under the shift that takes r to s0.

    Defined for separations with an orientation above r, the reverse of r
    excluded: orientations above r go to their join with s0, the remaining
    ones to the inverse of their reverse's image.  Requires r <= s0.
    """
    u = universe if universe is not None else r.universe
    if not u.leq(r, s0):
        raise SeparationError(
            "shift target %r does not lie above %r" % (s0, r))
    if s == r.inverse:
        raise SeparationError(
            "the reverse of %r is outside the shift domain" % (r,))
    if u.leq(r, s):
        return u.join(s, s0)
    if u.leq(r, s.inverse):
        return u.join(s.inverse, s0).inverse
    raise SeparationError("%r has no orientation above %r" % (s, r))


def is_linked(s0, r, system, universe=None) -> bool:
    """Does every system orientation above r keep its join with s0 inside
    the system?  This is what lets a whole tree be relabeled through
    ``shift_map`` without leaving the system."""
    u = universe if universe is not None else r.universe
    if not u.leq(r, s0):
        return False
    for s in system.elements:
        if s == r.inverse:
            continue
        if u.leq(r, s) and not system.contains(u.join(s, s0)):
            return False
    return True


def find_link(r, r2, system, order_fn=None, universe=None):
    """Minimum-order separation s0 with r <= s0 <= r2, canonical tie-break.

    The scan runs over the whole universe interval between r and r2, not
    just the system: submodularity of the order function makes the minimum
    a link toward r and, reversed, toward the reverse of r2, and its order
    is at most min(ord(r), ord(r2)), so it lands back in the system.
    """
    ordf = order_fn if order_fn is not None else system.order_fn
    if ordf is None:
        raise SeparationError("find_link needs an order function")
    u = universe if universe is not None else system.universe
    if not u.leq(r, r2):
        raise SeparationError("%r does not lie below %r" % (r, r2))
    a1, b1 = r.payload
    a2, b2 = r2.payload
    best = None
    best_rank = None

    def consider(s):
        nonlocal best, best_rank
        rank = (ordf(s), s.key())
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best = s

    if isinstance(u, BipartitionUniverse):
        # one candidate per ground subset between the two left sides
        delta = a2 & ~a1
        sub = 0
        while True:
            consider(u.sep_from_masks(a1 | sub, b1 & ~sub))
            if sub == delta:
                break
            sub = (sub - delta) & delta
    elif (isinstance(u, VertexSepUniverse)
          and getattr(ordf, "name", "") == "separator_size"):
        # per left side A, the order-minimal right side is forced: the rest
        # of the graph, its neighbourhood inside A, and r2's right side
        g = u.graph
        full = (1 << g.n) - 1
        delta = a2 & ~a1
        sub = 0
        while True:
            a = a1 | sub
            rest = full & ~a
            bmin = rest | (a & g.neighbors_mask(rest)) | b2
            if bmin & ~b1 == 0:
                consider(u.sep_from_masks(a, bmin))
            if sub == delta:
                break
            sub = (sub - delta) & delta
    else:
        for s in u.base_elements():
            if u.leq(r, s) and u.leq(s, r2):
                consider(s)
    if best is None:
        raise SeparationError(
            "no candidate between %r and %r" % (r, r2))
    if not system.contains(best):
        raise SeparationError(
            "link %r of order %d fell outside the system" % (best, ordf(best)))
    return best


def shift_stree(tree: STree, x: int, s0, family, system=None) -> STree:
    """Relabel a tree through the shift taking the leaf label at x to s0.

    The outgoing label r at the leaf x must be nondegenerate, nontrivial
    when a system is given, below s0, and must label no other directed
    edge; the tree must be irredundant.  Every relabeled star except the
    one at x is membership-tested against the family, and with a system
    given every new label is tested for membership, so a family or system
    that is not closed under this shift is reported instead of silently
    producing a broken tree.
    """
    if tree.degree(x) != 1:
        raise SeparationError("node %r is not a leaf" % (x,))
    y0 = tree.neighbors(x)[0]
    r = tree.alpha(x, y0)
    u = tree.universe
    if u.is_degenerate(r):
        raise SeparationError("leaf label %r is degenerate" % (r,))
    if system is not None and system.trivial_witness(r) is not None:
        raise SeparationError("leaf label %r is trivial" % (r,))
    if not tree.is_irredundant():
        raise SeparationError("tree is not irredundant")
    for e in tree.directed_edges():
        if e != (x, y0) and tree.alpha(*e) == r:
            raise SeparationError(
                "label %r also occurs on edge %r" % (r, e))
    if not u.leq(r, s0):
        raise SeparationError(
            "shift target %r does not lie above %r" % (s0, r))
    labels = {}
    for (a, b) in tree.directed_edges():
        if (a, b) == (x, y0):
            labels[(a, b)] = s0
        elif (a, b) == (y0, x):
            labels[(a, b)] = s0.inverse
        else:
            labels[(a, b)] = shift_map(r, s0, tree.alpha(a, b), u)
    out = STree(tree.n_nodes, labels)
    if system is not None:
        for e in out.directed_edges():
            lab = out.alpha(*e)
            if not system.contains(lab):
                raise SeparationError(
                    "shifted label %r leaves the system: %r is not linked "
                    "to %r here" % (lab, s0, r))
    for t in out.nodes():
        star = out.oriented_star_at(t)
        if t == x:
            if star != (s0.inverse,):
                raise SeparationError(
                    "shifted leaf carries %r instead of the link" % (star,))
            continue
        if not family.contains(star):
            raise SeparationError(
                "family rejects the shifted star %r at node %r; it is not "
                "closed under shifting toward %r" % (star, t, s0))
    return out


# -- tree assembly ------------------------------------------------------------


class DualityWitness:
    """Exactly one of a decomposition tree or an avoiding orientation."""

    def __init__(self, stree=None, tangle=None):
        if (stree is None) == (tangle is None):
            raise SeparationError("witness must carry exactly one side")
        self.stree = stree
        self.tangle = tangle

    @property
    def side(self) -> str:
        return "stree" if self.stree is not None else "tangle"

    def to_json_dict(self) -> dict:
        if self.stree is not None:
            return self.stree.to_json_dict()
        return {
            "kind": "tangle",
            "oriented": [
                {"A": list(s.side_a), "B": list(s.side_b)}
                for s in self.tangle
            ],
        }

    def __repr__(self):
        return "DualityWitness(%s)" % self.side


def merge_at_leaves(t1: STree, x1: int, t2: STree, x2: int, s0) -> STree:
    """Glue two trees, dropping leaf x1 of t1 and leaf x2 of t2.

    The star at x1 must be the reverse singleton {s0*} and the star at x2
    the singleton {s0}, each occurring at no other node of its tree.  The
    deleted leaves' neighbours are joined by a new edge labeled s0 toward
    t1's side, which re-supplies exactly the labels the deletions removed,
    so every surviving star is unchanged as a set.
    """
    inv = s0.inverse
    _require_unique_assoc(t1, x1, (inv,))
    _require_unique_assoc(t2, x2, (s0,))
    y1 = t1.neighbors(x1)[0]
    y2 = t2.neighbors(x2)[0]
    map1 = {}
    for t in t1.nodes():
        if t != x1:
            map1[t] = len(map1)
    map2 = {}
    for t in t2.nodes():
        if t != x2:
            map2[t] = len(map1) + len(map2)
    labels = {}
    for (a, b) in t1.directed_edges():
        if x1 not in (a, b):
            labels[(map1[a], map1[b])] = t1.alpha(a, b)
    for (a, b) in t2.directed_edges():
        if x2 not in (a, b):
            labels[(map2[a], map2[b])] = t2.alpha(a, b)
    labels[(map2[y2], map1[y1])] = s0
    labels[(map1[y1], map2[y2])] = inv
    return STree(len(map1) + len(map2), labels)


def _require_unique_assoc(tree, x, star):
    if tree.degree(x) != 1:
        raise SeparationError("node %r is not a leaf" % (x,))
    got = tree.oriented_star_at(x)
    if got != star:
        raise SeparationError(
            "leaf %r is associated with %r, expected %r" % (x, got, star))
    for t in tree.nodes():
        if t != x and tree.oriented_star_at(t) == star:
            raise SeparationError(
                "association %r occurs at node %r as well" % (star, t))


def _k2_tree(s) -> STree:
    return STree(2, {(0, 1): s})


def _forced_pair(forced):
    """Canonical orientation both of whose directions are forced, if any."""
    for s in sorted(forced, key=lambda t: t.key()):
        if s.inverse in forced:
            return s
    return None


def _star_tree_from_member(universe, family, member) -> STree:
    """A one-center tree realizing a forbidden star found inside an
    orientation; every leaf is associated with a forced reverse singleton.

    A degenerate member is its own reverse, so no singleton forces it;
    the center is doubled across the degenerate label instead, and both
    copies carry the full star.  A star holds at most one degenerate
    element, so one doubling always suffices.
    """
    member = tuple(sorted(set(member), key=lambda s: s.key()))
    if len(member) < 2:
        raise SeparationError(
            "member %r is too small to realize as a tree" % (member,))
    loose = [s for s in member
             if universe.is_degenerate(s) and not family.contains((s,))]
    if not loose:
        labels = {}
        for i, s in enumerate(member):
            labels[(i + 1, 0)] = s
        return STree(len(member) + 1, labels)
    d = loose[0]
    rest = [s for s in member if s != d]
    labels = {(0, 1): d}
    nxt = 2
    for center in (0, 1):
        for s in rest:
            labels[(nxt, center)] = s
            nxt += 1
    return STree(nxt, labels)


# -- the two duality constructions ---------------------------------------------


def weak_duality(system, family) -> DualityWitness:
    """Tree over the family, or an orientation avoiding it.

    The family must consist of stars and force every trivial orientation.
    The orientation side makes no consistency promise; use
    ``strong_duality`` when one is needed.  Exactly one side can exist:
    any tree over a star family is hit by every orientation at one of its
    sink nodes.
    """
    _require_standard(system, family)
    memo = {}

    def solve(extras):
        if extras in memo:
            return memo[extras]
        fam = AugmentedFamily(family, extras) if extras else family
        forced = compute_forced(fam, system)
        both = _forced_pair(forced)
        if both is not None:
            out = DualityWitness(stree=_k2_tree(both))
        else:
            out = _weak_step(system, family, fam, extras, forced, solve)
        memo[extras] = out
        return out

    return solve(frozenset())


def _weak_step(system, base, fam, extras, forced, solve):
    u = system.universe
    undecided = [s for s in system.separations()
                 if not u.is_degenerate(s)
                 and s not in forced and s.inverse not in forced]
    if not undecided:
        chosen = set(forced)
        chosen.update(system.degenerate_elements())
        member = fam.find_member_within(chosen)
        if member is None:
            return DualityWitness(tangle=Orientation(system, chosen))
        return DualityWitness(
            stree=_star_tree_from_member(u, fam, member))
    s0 = undecided[0]
    first = _settle(solve(extras | {s0}), s0, fam)
    if isinstance(first, DualityWitness):
        return first
    second = _settle(solve(extras | {s0.inverse}), s0.inverse, fam)
    if isinstance(second, DualityWitness):
        return second
    ta, xa = first
    tb, xb = second
    # xa carries {s0}, xb carries {s0*}; the glue edge re-supplies both
    return DualityWitness(stree=merge_at_leaves(tb, xb, ta, xa, s0))


def _settle(sub: DualityWitness, forbidden, fam):
    """Digest a sub-answer for the family enlarged by {forbidden}.

    An orientation avoiding the larger family avoids the smaller one, and
    a tree may turn out to use only stars of the smaller family; both pass
    through as final.  Otherwise exactly one leaf of the pruned tree is
    associated with the forbidden singleton, and that pair is returned.
    """
    if sub.side == "tangle":
        return sub
    tree = sub.stree.prune(0)
    bad = [t for t in tree.nodes()
           if not fam.contains(tree.oriented_star_at(t))]
    if not bad:
        return DualityWitness(stree=tree)
    if len(bad) > 1 or tree.oriented_star_at(bad[0]) != (forbidden,):
        raise SeparationError(
            "sub-answer kept stars outside the family: %r" % (bad,))
    return tree, bad[0]


def strong_duality(system, family, order_fn=None, universe=None) -> DualityWitness:
    """Tree over the family, or a consistent orientation avoiding it.

    Needs an order function (taken from the system if built with one); the
    link separations it produces are what keep relabeled trees inside the
    system.  Families that are not closed under those relabelings are
    detected at shift time and reported as errors rather than mis-answered;
    the built-in width families are all closed.
    """
    _require_standard(system, family)
    ordf = order_fn if order_fn is not None else system.order_fn
    if ordf is None:
        raise SeparationError("strong duality needs an order function")
    u = universe if universe is not None else system.universe
    memo = {}
    base_forced = compute_forced(family, system)

    def solve(extras):
        if extras in memo:
            return memo[extras]
        if extras:
            fam = AugmentedFamily(family, extras)
            # augmenting adds forbidden singletons only, so the forced set
            # grows by exactly their inverses
            forced = base_forced | frozenset(x.inverse for x in extras)
        else:
            fam = family
            forced = base_forced
        both = _forced_pair(forced)
        if both is not None:
            out = DualityWitness(stree=_k2_tree(both))
        else:
            out = _strong_step(
                system, fam, extras, forced, ordf, u, solve)
        memo[extras] = out
        return out

    witness = solve(frozenset())
    if witness.side == "stree":
        report = witness.stree.validate_over(family, system)
        if not report.ok:
            raise SeparationError(
                "constructed tree failed validation: %r" % (report,))
    else:
        if not witness.tangle.is_consistent():
            raise SeparationError("constructed orientation is inconsistent")
        if family.find_member_within(witness.tangle.chosen) is not None:
            raise SeparationError("constructed orientation hits the family")
    return witness


def _strong_step(system, fam, extras, forced, ordf, u, solve):
    undecided = [s for s in system.separations()
                 if not u.is_degenerate(s)
                 and s not in forced and s.inverse not in forced]
    if not undecided:
        chosen = set(forced)
        chosen.update(system.degenerate_elements())
        member = fam.find_member_within(chosen)
        if member is not None:
            return DualityWitness(
                stree=_star_tree_from_member(u, fam, member))
        if not is_consistent(chosen):
            raise SeparationError(
                "family is not separable over this system: its forced "
                "orientations are inconsistent")
        return DualityWitness(tangle=Orientation(system, chosen))

    r0 = min((o for s in undecided for o in (s, s.inverse)),
             key=lambda t: t.key())
    r1 = _canonical_minimal_below(system, forced, r0)
    r2 = _canonical_minimal_below(system, forced, r0.inverse).inverse
    s0 = find_link(r1, r2, system, ordf, u)

    def grown(rsmall, target):
        """Solve with {reverse of rsmall} forbidden, then move the one
        leftover leaf association onto the link via shifting."""
        sub = _settle(solve(extras | {rsmall.inverse}), rsmall.inverse, fam)
        if isinstance(sub, DualityWitness):
            return sub
        tree, x = sub
        tree, x = tree.reduce_to_unique_leaf_label(x, system)
        return shift_stree(tree, x, target, fam, system), x

    if not fam.contains((s0,)):
        first = grown(r1, s0)
        if isinstance(first, DualityWitness):
            return first
        t1, x1 = first
        if fam.contains((s0.inverse,)):
            return DualityWitness(stree=t1)
        second = grown(r2.inverse, s0.inverse)
        if isinstance(second, DualityWitness):
            return second
        t2, x2 = second
        return DualityWitness(stree=merge_at_leaves(t1, x1, t2, x2, s0))
    # {s0} itself is forbidden, so the one sub-recursion already lands in
    # the family: the relabeled tree's extra star is {s0}
    second = grown(r2.inverse, s0.inverse)
    if isinstance(second, DualityWitness):
        return second
    return DualityWitness(stree=second[0])


def _canonical_minimal_below(system, forced, top):
    """Canonically first minimal unforced nondegenerate orientation <= top."""
    u = system.universe
    elems = system.elements
    ti = system.local(top)
    allowed = system.below_mask(ti) | (1 << ti)
    cand_mask = 0
    m = allowed
    while m:
        i = (m & -m).bit_length() - 1
        m &= m - 1
        s = elems[i]
        if s not in forced and not u.is_degenerate(s):
            cand_mask |= 1 << i
    # i is dominated iff some candidate is <= it but not >= it
    mins = []
    m = cand_mask
    while m:
        i = (m & -m).bit_length() - 1
        m &= m - 1
        if not (system.below_mask(i) & ~system.above_mask(i) & cand_mask):
            mins.append(elems[i])
    return min(mins, key=lambda s: s.key())
