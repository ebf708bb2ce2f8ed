"""Star families for the classical width parameters, plus translators
between tree/orientation witnesses and the classical certificates.

Families present the ``StarFamily`` interface: membership is a predicate
on a candidate star, and ``find_member_within`` hunts for a member inside
a supplied orientation.  Nothing is materialized up front, and every
search is complete: it returns a member whenever one exists inside the
supplied set, which is what the engine's final answers rest on.

The second half holds the classical objects (tree-, branch- and matroid
tree-decompositions, brambles, blockages) with validators, width
measures, JSON codecs, and the translations to and from the engine's
witnesses.
"""

from itertools import combinations

from .engine import StarFamily
from .separations import (
    Orientation,
    SeparationError,
    bits_of,
    is_star,
    mask_of,
    popcount,
)
from .stree import STree
from .universes import BipartitionUniverse, InputError, build_vertex_universe


def _graph_behind(universe):
    graph = getattr(universe, "graph", None)
    if graph is None:
        raise InputError(
            "this operation needs a universe of graph vertex separations")
    return graph


def _canon(star):
    return tuple(sorted(set(star), key=lambda s: s.key()))


# -- families ------------------------------------------------------------------


class CoverageFamily(StarFamily):
    """Sets of at most three oriented separations whose left sides
    together cover the whole object.

    With graph scope, covering means every vertex lies in some left
    side and every edge inside one; with ground scope it means the left
    sides exhaust the ground set of a bipartition universe.  With
    ``stars_only`` membership is further restricted to stars, the
    variant trees are built over; the unrestricted family is the one
    tangles avoid.
    """

    def __init__(self, system, scope="graph", stars_only=False):
        if scope not in ("graph", "ground"):
            raise InputError("unknown coverage scope %r" % (scope,))
        self.system = system
        self.scope = scope
        self.stars_only = stars_only
        if scope == "graph":
            graph = _graph_behind(system.universe)
            self._edge_masks = [mask_of(e) for e in graph.edges]
        else:
            self._edge_masks = []
        self._full = system.universe.full_mask

    def contains(self, star) -> bool:
        members = _canon(star)
        if not 1 <= len(members) <= 3:
            return False
        if any(not self.system.contains(s) for s in members):
            return False
        if self.stars_only and not is_star(members):
            return False
        return self._covers(members)

    def _covers(self, members) -> bool:
        union = 0
        for s in members:
            union |= s.payload[0]
        if union != self._full:
            return False
        for em in self._edge_masks:
            if not any(em & ~s.payload[0] == 0 for s in members):
                return False
        return True

    def find_member_within(self, chosen):
        elems = sorted(
            (s for s in set(chosen) if self.system.contains(s)),
            key=lambda s: s.key())
        member = self._cover_within(elems)
        if member is None or not self.stars_only:
            return member
        star = self._corner_reduce(member, set(elems))
        if star is not None:
            return star
        # an inconsistent input can strand the corner walk; fall back to
        # a direct scan, still complete since members have at most three
        # elements
        for size in (1, 2, 3):
            for combo in combinations(elems, size):
                if is_star(combo) and self._covers(combo):
                    return combo
        return None

    def _cover_within(self, elems):
        # enlarging a member only grows what it covers, so a cover
        # inside the set exists iff one exists among its maximal
        # elements
        u = self.system.universe
        maximal = [s for s in elems if not any(u.lt(s, t) for t in elems)]
        for size in (1, 2, 3):
            for combo in combinations(maximal, size):
                if self._covers(combo):
                    return combo
        return None

    def _corner_reduce(self, member, available):
        """Shrink a covering set inside ``available`` to a covering star.

        Comparable pairs lose their smaller element; a crossing pair is
        resolved by replacing one element with its corner against the
        other, which submodularity keeps inside the system and which a
        consistent orientation must itself contain.  Coverage survives
        both moves: whatever a corner gives up is covered by the element
        kept.  Left sides shrink, or stay put while right sides grow, so
        the walk settles; the loop bound only guards against bugs.
        """
        u = self.system.universe
        cur = list(member)
        bound = (3 * (popcount(self._full) + 2)) ** 2 + 8
        for _ in range(bound):
            cur = sorted(set(cur), key=lambda s: s.key())
            pair = None
            for i in range(len(cur)):
                for j in range(i + 1, len(cur)):
                    if not u.leq(cur[i], cur[j].inverse):
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                out = tuple(cur)
                if not (is_star(out) and self._covers(out)):
                    raise SeparationError(
                        "internal: corner walk left a non-member %r" % (out,))
                return out
            i, j = pair
            x, y = cur[i], cur[j]
            if u.leq(x, y):
                del cur[i]
            elif u.leq(y, x):
                del cur[j]
            else:
                cx = u.meet(x, y.inverse)
                cy = u.meet(y, x.inverse)
                if self.system.contains(cx) and cx in available:
                    cur[i] = cx
                elif self.system.contains(cy) and cy in available:
                    cur[j] = cy
                else:
                    return None
        raise SeparationError("internal: corner walk failed to settle")


class CoreBoundFamily(StarFamily):
    """Stars whose members' right sides share fewer than ``bound``
    elements, optionally capped at ``max_size`` members.

    The cap at two members gives the path-style family; an uncapped
    bound equal to the system's order bound gives the tree-style
    family; a looser bound describes decompositions whose bags may
    exceed their attachment sets.
    """

    def __init__(self, system, bound, max_size=None):
        self.system = system
        self.bound = bound
        self.max_size = max_size
        self._full = system.universe.full_mask

    def contains(self, star) -> bool:
        members = _canon(star)
        if not members:
            return False
        if self.max_size is not None and len(members) > self.max_size:
            return False
        if any(not self.system.contains(s) for s in members):
            return False
        if not is_star(members):
            return False
        core = self._full
        for s in members:
            core &= s.payload[1]
        return popcount(core) < self.bound

    def find_member_within(self, chosen):
        """First member found by a pruned search over compatible sets.

        Stars are exactly the pairwise compatible sets, so the search
        walks cliques of the compatibility relation in canonical order,
        cutting branches whose remaining candidates cannot push the
        shared core below the bound.  That optimistic cut never discards
        a member, so the search is complete on any input set.
        """
        elems = sorted(
            (s for s in set(chosen) if self.system.contains(s)),
            key=lambda s: (popcount(s.payload[1]), s.key()))
        n = len(elems)
        u = self.system.universe
        compat = [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                if u.leq(elems[i], elems[j].inverse):
                    compat[i] |= 1 << j
                    compat[j] |= 1 << i
        right = [s.payload[1] for s in elems]

        def grow(stack, core, cand):
            if popcount(core) < self.bound:
                return tuple(elems[i] for i in stack)
            if self.max_size is not None and len(stack) >= self.max_size:
                return None
            reach = core
            rest = cand
            while rest:
                reach &= right[(rest & -rest).bit_length() - 1]
                rest &= rest - 1
            if popcount(reach) >= self.bound:
                return None
            rest = cand
            while rest:
                j = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                got = grow(stack + [j], core & right[j], rest & compat[j])
                if got is not None:
                    return got
            return None

        for i in range(n):
            got = grow([i], self._full & right[i], compat[i] & -(1 << (i + 1)))
            if got is not None:
                return _canon(got)
        return None


class RankSumFamily(StarFamily):
    """Stars of ground bipartitions whose right-side ranks sum below
    the bound after discounting the full rank once per extra member.

    For a star with members (A_0,B_0)..(A_n,B_n) the measured value is
    r(B_0)+...+r(B_n) - n*r(M).  Any star below the bound automatically
    consists of separations of connectivity below the bound; that
    consequence is re-checked on every positive membership and a
    violation surfaces as an internal error.
    """

    def __init__(self, system, matroid):
        self.system = system
        self.matroid = matroid
        self.bound = system.order_bound
        self._full = system.universe.full_mask
        self._total = matroid.total_rank

    def star_sum(self, members) -> int:
        members = _canon(members)
        total = sum(self.matroid.rank(s.payload[1]) for s in members)
        return total - (len(members) - 1) * self._total

    def contains(self, star) -> bool:
        members = _canon(star)
        if not members:
            return False
        if any(s.universe is not self.system.universe for s in members):
            return False
        if not is_star(members):
            return False
        if self.star_sum(members) >= self.bound:
            return False
        for s in members:
            if not self.system.contains(s):
                raise SeparationError(
                    "internal: star measured below %d holds %r of "
                    "connectivity %d" % (
                        self.bound, s,
                        self.matroid.connectivity(s.payload[0])))
        return True

    def find_member_within(self, chosen):
        """Exact search via packing of disjoint left sides.

        Members are the non-empty sets of elements with pairwise
        disjoint left sides, and adding an element changes the measured
        value by r(B) - r(M) <= 0, so the minimum over members equals
        r(M) minus the best weight packing with weights r(M) - r(B).
        A subset dynamic program over the ground set solves that
        exactly, which makes this search complete.
        """
        elems = sorted(
            (s for s in set(chosen) if self.system.contains(s)),
            key=lambda s: s.key())
        if not elems:
            return None
        weights = [self._total - self.matroid.rank(s.payload[1])
                   for s in elems]
        lefts = [s.payload[0] for s in elems]
        full = self._full
        best = [0] * (full + 1)
        pick = [None] * (full + 1)
        for mask in range(1, full + 1):
            low = mask & -mask
            top = best[mask & (mask - 1)]
            choice = None
            for i, lm in enumerate(lefts):
                if lm & low and lm & ~mask == 0:
                    cand = weights[i] + best[mask & ~lm]
                    if cand > top:
                        top = cand
                        choice = i
            best[mask] = top
            pick[mask] = choice
        if self._total - best[full] >= self.bound:
            return None
        if best[full] == 0:
            # all weights vanish, so any single element already fits
            member = (elems[0],)
        else:
            got = []
            mask = full
            while mask and best[mask] > 0:
                i = pick[mask]
                if i is None:
                    mask &= mask - 1
                    continue
                got.append(elems[i])
                mask &= ~lefts[i]
            member = _canon(got)
        if not self.contains(member):
            raise SeparationError(
                "internal: packing produced a non-member %r" % (member,))
        return member


def tangle_family(system, mode="graph"):
    """The coverage family and its star subfamily, as a pair (F, F*).

    Avoiding the first is what makes an orientation a tangle; trees are
    built over the second.  Graph mode covers vertices and edges of the
    graph behind a vertex separation universe; submodular mode covers
    the ground set of a bipartition universe.
    """
    if mode == "graph":
        scope = "graph"
    elif mode == "submodular":
        scope = "ground"
        if not isinstance(system.universe, BipartitionUniverse):
            raise InputError(
                "submodular tangles need a bipartition universe")
    else:
        raise InputError("unknown tangle mode %r" % (mode,))
    return (CoverageFamily(system, scope, stars_only=False),
            CoverageFamily(system, scope, stars_only=True))


def treewidth_family(system, w=None):
    """Stars whose right sides share fewer than w vertices.

    The default w, the system's own order bound, is the tree-width
    duality family; a larger w bounds bag sizes independently of the
    attachment bound.  Smaller w is refused.
    """
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    if w is None:
        w = k
    if w < k:
        raise InputError(
            "the core bound w=%d must be at least the order bound k=%d"
            % (w, k))
    return CoreBoundFamily(system, w)


def pathwidth_family(system):
    """The restriction of the tree-width family to at most two members."""
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    return CoreBoundFamily(system, k, max_size=2)


def matroid_family(system, matroid):
    """Stars of bipartitions whose rank sum stays below the order bound."""
    if system.order_bound is None:
        raise InputError("the system needs an order bound")
    if system.universe.full_mask != (1 << matroid.m) - 1:
        raise InputError("matroid and universe ground sets differ")
    return RankSumFamily(system, matroid)


# -- classical decompositions ---------------------------------------------------


def _check_tree(n_nodes, edges, what):
    """Verify tree shape and return the adjacency map."""
    adj = {t: set() for t in range(n_nodes)}
    seen = set()
    for (a, b) in edges:
        if not (0 <= a < n_nodes and 0 <= b < n_nodes) or a == b:
            raise InputError("%s has a bad edge (%r, %r)" % (what, a, b))
        key = (min(a, b), max(a, b))
        if key in seen:
            raise InputError("%s repeats the edge %r" % (what, key))
        seen.add(key)
        adj[a].add(b)
        adj[b].add(a)
    if n_nodes == 0:
        if edges:
            raise InputError("%s has edges but no nodes" % (what,))
        return adj
    if len(seen) != n_nodes - 1:
        raise InputError(
            "%s has %d edges on %d nodes, a tree needs %d"
            % (what, len(seen), n_nodes, n_nodes - 1))
    stack, reached = [0], {0}
    while stack:
        for s in adj[stack.pop()]:
            if s not in reached:
                reached.add(s)
                stack.append(s)
    if len(reached) != n_nodes:
        raise InputError("%s is not connected" % (what,))
    return adj


def _tree_side(adj, x, y):
    """Nodes of the component of tree minus edge xy that contains y."""
    out = {y}
    stack = [y]
    while stack:
        for s in adj[stack.pop()]:
            if s != x and s not in out:
                out.add(s)
                stack.append(s)
    return out


class TreeDecomposition:
    """A tree whose nodes carry vertex bags."""

    def __init__(self, n_nodes, edges, bags):
        self.n_nodes = n_nodes
        self.edges = [tuple(e) for e in edges]
        self.bags = {int(t): frozenset(bag) for t, bag in bags.items()}

    def validate(self, graph):
        if self.n_nodes < 1:
            raise InputError("a tree decomposition needs at least one node")
        adj = _check_tree(self.n_nodes, self.edges, "tree decomposition")
        if set(self.bags) != set(range(self.n_nodes)):
            raise InputError("bags and tree nodes disagree")
        for t in range(self.n_nodes):
            for v in self.bags[t]:
                if not 0 <= v < graph.n:
                    raise InputError(
                        "bag %d holds a foreign vertex %r" % (t, v))
        for v in range(graph.n):
            holders = {t for t in range(self.n_nodes) if v in self.bags[t]}
            if not holders:
                raise InputError("vertex %d appears in no bag" % (v,))
            start = min(holders)
            stack, reached = [start], {start}
            while stack:
                for s in adj[stack.pop()]:
                    if s in holders and s not in reached:
                        reached.add(s)
                        stack.append(s)
            if reached != holders:
                raise InputError(
                    "the bags holding vertex %d do not form a subtree" % (v,))
        for (x, y) in graph.edges:
            if not any(x in bag and y in bag for bag in self.bags.values()):
                raise InputError("edge (%d, %d) is inside no bag" % (x, y))

    def width(self) -> int:
        if not self.bags:
            return -1
        return max(len(bag) for bag in self.bags.values()) - 1

    def adhesion(self) -> int:
        if not self.edges:
            return len(self.bags.get(0, frozenset()))
        return max(len(self.bags[a] & self.bags[b]) for (a, b) in self.edges)

    def to_json_dict(self) -> dict:
        return {
            "bags": {str(t): sorted(bag) for t, bag in self.bags.items()},
            "edges": [list(e) for e in self.edges],
        }


def tree_decomposition_from_json_dict(data) -> TreeDecomposition:
    bags = {int(t): frozenset(vs) for t, vs in data["bags"].items()}
    n = (max(bags) + 1) if bags else 0
    edges = [tuple(e) for e in data["edges"]]
    return TreeDecomposition(n, edges, bags)


class BranchDecomposition:
    """A ternary tree whose leaves stand for the edges of a graph."""

    def __init__(self, n_nodes, edges, leaf_for):
        self.n_nodes = n_nodes
        self.edges = [tuple(e) for e in edges]
        self.leaf_for = {int(e): int(t) for e, t in leaf_for.items()}

    def validate(self, graph):
        adj = _check_tree(self.n_nodes, self.edges, "branch decomposition")
        m = len(graph.edges)
        if set(self.leaf_for) != set(range(m)):
            raise InputError(
                "the leaf map must name each edge index exactly once")
        for t in range(self.n_nodes):
            if len(adj[t]) >= 2 and len(adj[t]) != 3:
                raise InputError(
                    "inner node %d has degree %d, need exactly 3"
                    % (t, len(adj[t])))
        leaves = {t for t in range(self.n_nodes) if len(adj[t]) <= 1}
        mapped = list(self.leaf_for.values())
        if len(set(mapped)) != len(mapped):
            raise InputError("two edges map to one leaf")
        if set(mapped) != leaves:
            raise InputError(
                "mapped nodes %r and leaves %r disagree"
                % (sorted(mapped), sorted(leaves)))

    def width(self, graph) -> int:
        if not self.edges:
            return 0
        adj = {t: set() for t in range(self.n_nodes)}
        for (a, b) in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        best = 0
        for (a, b) in self.edges:
            here = _tree_side(adj, b, a)
            ma = mb = 0
            for ei, leaf in self.leaf_for.items():
                em = mask_of(graph.edges[ei])
                if leaf in here:
                    ma |= em
                else:
                    mb |= em
            best = max(best, popcount(ma & mb))
        return best

    def to_json_dict(self) -> dict:
        return {
            "tree": {
                "n_nodes": self.n_nodes,
                "edges": [list(e) for e in self.edges],
            },
            "leaf_map": {str(e): t for e, t in self.leaf_for.items()},
        }


def branch_decomposition_from_json_dict(data) -> BranchDecomposition:
    tree = data["tree"]
    return BranchDecomposition(
        tree["n_nodes"],
        [tuple(e) for e in tree["edges"]],
        {int(e): t for e, t in data["leaf_map"].items()})


class Bramble:
    """Connected, pairwise touching vertex sets."""

    def __init__(self, sets):
        self.sets = [frozenset(s) for s in sets]

    def validate(self, graph):
        for i, vs in enumerate(self.sets):
            if not vs:
                raise InputError("bramble set %d is empty" % (i,))
            if any(not 0 <= v < graph.n for v in vs):
                raise InputError("bramble set %d holds a foreign vertex" % (i,))
            if len(graph.components(mask_of(vs))) != 1:
                raise InputError("bramble set %d is not connected" % (i,))
        for i in range(len(self.sets)):
            for j in range(i + 1, len(self.sets)):
                if not self._touch(graph, self.sets[i], self.sets[j]):
                    raise InputError(
                        "bramble sets %d and %d do not touch" % (i, j))

    @staticmethod
    def _touch(graph, a, b) -> bool:
        if a & b:
            return True
        am, bm = mask_of(a), mask_of(b)
        for (x, y) in graph.edges:
            xm, ym = 1 << x, 1 << y
            if (xm & am and ym & bm) or (xm & bm and ym & am):
                return True
        return False

    def order(self, graph) -> int:
        """Size of a smallest vertex set meeting every member."""
        pool = sorted(set().union(*self.sets)) if self.sets else []
        for size in range(len(pool) + 1):
            for combo in combinations(pool, size):
                hit = set(combo)
                if all(hit & vs for vs in self.sets):
                    return size
        raise SeparationError("internal: hitting set search fell through")

    def to_json_dict(self) -> dict:
        return {"sets": [sorted(vs) for vs in self.sets]}


def bramble_from_json_dict(data) -> Bramble:
    return Bramble([frozenset(vs) for vs in data["sets"]])


def vertex_boundary(graph, vertices) -> frozenset:
    """The vertices of the set with a neighbour outside it."""
    vm = mask_of(vertices)
    out = set()
    for v in vertices:
        if graph.adj[v] & ~vm:
            out.add(v)
    return frozenset(out)


class Blockage:
    """A family of vertex sets that picks exactly one side of every
    separation below its bound.

    Demands: every member keeps its boundary below the bound; any
    subset of a member with a small boundary is again a member; and of
    the two sides of each separation of order below the bound, exactly
    one is a member.
    """

    def __init__(self, sets, k):
        self.sets = [frozenset(s) for s in sets]
        self.k = int(k)
        self._index = set(self.sets)

    def holds(self, vertices) -> bool:
        return frozenset(vertices) in self._index

    def validate(self, graph):
        if len(self._index) != len(self.sets):
            raise InputError("the blockage repeats a set")
        for vs in self.sets:
            if any(not 0 <= v < graph.n for v in vs):
                raise InputError("blockage set %r holds a foreign vertex"
                                 % (sorted(vs),))
            bd = vertex_boundary(graph, vs)
            if len(bd) >= self.k:
                raise InputError(
                    "blockage set %r has %d boundary vertices, the bound "
                    "allows fewer than %d" % (sorted(vs), len(bd), self.k))
        for vs in self.sets:
            vm = mask_of(vs)
            sub = vm
            while True:
                inner = frozenset(bits_of(sub))
                if (len(vertex_boundary(graph, inner)) < self.k
                        and inner not in self._index):
                    raise InputError(
                        "blockage misses %r although it sits inside %r "
                        "with a small boundary"
                        % (sorted(inner), sorted(vs)))
                if sub == 0:
                    break
                sub = (sub - 1) & vm
        universe = build_vertex_universe(graph, self.k)
        seen = set()
        for s in universe.base_elements():
            if s.sep_key() in seen:
                continue
            seen.add(s.sep_key())
            one = frozenset(bits_of(s.payload[0]))
            two = frozenset(bits_of(s.payload[1]))
            if (one in self._index) == (two in self._index):
                raise InputError(
                    "the blockage must hold exactly one side of the "
                    "separation {%r, %r}" % (sorted(one), sorted(two)))

    def to_json_dict(self) -> dict:
        return {"sets": [sorted(vs) for vs in self.sets], "k": self.k}


def blockage_from_json_dict(data) -> Blockage:
    return Blockage([frozenset(vs) for vs in data["sets"]], data["k"])


class MatroidTreeDecomposition:
    """A tree with every ground element placed at one node."""

    def __init__(self, n_nodes, edges, placement):
        self.n_nodes = n_nodes
        self.edges = [tuple(e) for e in edges]
        self.placement = {int(e): int(t) for e, t in placement.items()}

    def validate(self, matroid):
        if self.n_nodes < 1:
            raise InputError(
                "a matroid tree decomposition needs at least one node")
        _check_tree(self.n_nodes, self.edges, "matroid tree decomposition")
        if set(self.placement) != set(range(matroid.m)):
            raise InputError("every ground element needs exactly one node")
        for e, t in self.placement.items():
            if not 0 <= t < self.n_nodes:
                raise InputError(
                    "element %d placed at the missing node %r" % (e, t))

    def _adj(self):
        adj = {t: set() for t in range(self.n_nodes)}
        for (a, b) in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def node_width(self, matroid, t) -> int:
        if self.n_nodes == 1:
            return matroid.total_rank
        adj = self._adj()
        total = 0
        degree = 0
        for s in adj[t]:
            side = _tree_side(adj, t, s)
            fm = 0
            for e, node in self.placement.items():
                if node in side:
                    fm |= 1 << e
            total += matroid.rank(((1 << matroid.m) - 1) & ~fm)
            degree += 1
        return total - (degree - 1) * matroid.total_rank

    def width(self, matroid) -> int:
        return max(self.node_width(matroid, t) for t in range(self.n_nodes))

    def to_json_dict(self) -> dict:
        return {
            "tree": {
                "n_nodes": self.n_nodes,
                "edges": [list(e) for e in self.edges],
            },
            "placement": {str(e): t for e, t in self.placement.items()},
        }


def matroid_tree_decomposition_from_json_dict(data) -> MatroidTreeDecomposition:
    tree = data["tree"]
    return MatroidTreeDecomposition(
        tree["n_nodes"],
        [tuple(e) for e in tree["edges"]],
        {int(e): t for e, t in data["placement"].items()})


# -- tree decomposition translations ---------------------------------------------


def stree_to_tree_decomposition(tree) -> TreeDecomposition:
    """Bags are the shared right sides of the labels entering a node."""
    full = tree.universe.full_mask
    bags = {}
    for t in tree.nodes():
        mask = full
        for s in tree.oriented_star_at(t):
            mask &= s.payload[1]
        bags[t] = frozenset(bits_of(mask))
    return TreeDecomposition(len(tree.nodes()), tree.edges(), bags)


def tree_decomposition_to_stree(td, system, w=None) -> STree:
    """Label each tree edge with its two subtree unions of bags.

    Needs bag sizes below w and attachment sets below the system's
    order bound; a single node input is padded with a copy of itself so
    the result has an edge.
    """
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    if w is None:
        w = k
    if w < k:
        raise InputError(
            "the bag bound w=%d must be at least the order bound k=%d"
            % (w, k))
    graph = _graph_behind(system.universe)
    td.validate(graph)
    for t in sorted(td.bags):
        if len(td.bags[t]) > w - 1:
            raise InputError(
                "bag %d has %d vertices, width below %d allows at most %d"
                % (t, len(td.bags[t]), w - 1, w - 1))
    universe = system.universe
    if td.n_nodes == 1:
        vm = mask_of(td.bags[0])
        if popcount(vm) >= k:
            raise InputError(
                "the single bag has %d vertices, the attachment bound "
                "allows fewer than %d" % (popcount(vm), k))
        return STree(2, {(0, 1): universe.sep_from_masks(vm, vm)})
    adj = _check_tree(td.n_nodes, td.edges, "tree decomposition")
    labels = {}
    for (a, b) in td.edges:
        ua = ub = 0
        bside = _tree_side(adj, a, b)
        for t in range(td.n_nodes):
            if t in bside:
                ub |= mask_of(td.bags[t])
            else:
                ua |= mask_of(td.bags[t])
        sep = universe.sep_from_masks(ua, ub)
        if not system.contains(sep):
            raise InputError(
                "tree edge (%d, %d) carries an attachment set of %d "
                "vertices, the bound allows fewer than %d"
                % (a, b, popcount(ua & ub), k))
        labels[(a, b)] = sep
        labels[(b, a)] = sep.inverse
    return STree(td.n_nodes, labels)


# -- branch decomposition translations -------------------------------------------


def stree_to_branch_decomposition(tree) -> BranchDecomposition:
    """Read a branch decomposition out of a tree over the covering
    star family.

    Each graph edge is pushed along the tree toward the side holding
    both its ends and lands at a sink node.  Sinks are given private
    leaves where needed, growth that carries no edge is trimmed, and
    degree-two nodes are smoothed away, leaving a ternary tree whose
    leaves are exactly the graph's edges.
    """
    graph = _graph_behind(tree.universe)
    m = len(graph.edges)
    if m == 0:
        return BranchDecomposition(0, [], {})
    if m == 1:
        return BranchDecomposition(1, [], {0: 0})
    work = tree.prune(0)
    for t in work.nodes():
        if work.degree(t) > 3:
            raise InputError(
                "node %d keeps degree %d after pruning; only trees of "
                "maximum degree 3 describe branch decompositions"
                % (t, work.degree(t)))
    nodes = list(work.nodes())
    wedges = work.edges()
    sinks = []
    for (x, y) in graph.edges:
        em = mask_of((x, y))
        out_deg = {t: 0 for t in nodes}
        for (a, b) in wedges:
            lab = work.alpha(a, b)
            if em & ~lab.payload[1] == 0:
                out_deg[a] += 1
            elif em & ~lab.payload[0] == 0:
                out_deg[b] += 1
            else:
                raise SeparationError(
                    "internal: edge (%d, %d) fits neither side of %r"
                    % (x, y, lab))
        cand = [t for t in nodes if out_deg[t] == 0]
        if not cand:
            raise SeparationError(
                "internal: no sink for edge (%d, %d)" % (x, y))
        sinks.append(min(cand))
    adjacency = {t: set(work.neighbors(t)) for t in nodes}
    labels = {(a, b): work.alpha(a, b) for (a, b) in work.directed_edges()}
    leaf_of = {}
    used = set()
    nxt = len(nodes)
    for ei in range(m):
        t = sinks[ei]
        em = mask_of(graph.edges[ei])
        if len(adjacency[t]) == 1 and t not in used:
            leaf_of[ei] = t
            used.add(t)
            continue
        heads = [s for s in sorted(adjacency[t])
                 if em & ~labels[(s, t)].payload[0] == 0]
        if not heads:
            raise SeparationError(
                "internal: the star at node %d covers no side holding "
                "edge %d" % (t, ei))
        tp = heads[0]
        mid, leaf = nxt, nxt + 1
        nxt += 2
        fwd = labels.pop((tp, t))
        rev = labels.pop((t, tp))
        adjacency[tp].discard(t)
        adjacency[t].discard(tp)
        adjacency[tp].add(mid)
        adjacency[t].add(mid)
        adjacency[mid] = {tp, t, leaf}
        adjacency[leaf] = {mid}
        labels[(tp, mid)] = fwd
        labels[(mid, t)] = fwd
        labels[(mid, tp)] = rev
        labels[(t, mid)] = rev
        leaf_of[ei] = leaf
        used.add(leaf)
    # trim growth carrying no edge, then smooth out degree twos
    while True:
        spare = [t for t in adjacency
                 if len(adjacency[t]) == 1 and t not in used]
        if not spare:
            break
        for t in spare:
            (y,) = adjacency[t]
            adjacency[y].discard(t)
            del adjacency[t]
    while True:
        two = sorted(t for t in adjacency if len(adjacency[t]) == 2)
        if not two:
            break
        t = two[0]
        a, b = sorted(adjacency[t])
        adjacency[a].discard(t)
        adjacency[b].discard(t)
        adjacency[a].add(b)
        adjacency[b].add(a)
        del adjacency[t]
    order = sorted(adjacency)
    remap = {t: i for i, t in enumerate(order)}
    out_edges = sorted(
        (min(remap[a], remap[b]), max(remap[a], remap[b]))
        for a in adjacency for b in adjacency[a] if a < b)
    bd = BranchDecomposition(
        len(order), out_edges, {ei: remap[t] for ei, t in leaf_of.items()})
    try:
        bd.validate(graph)
    except InputError as exc:
        raise SeparationError(
            "internal: extracted decomposition is broken: %s" % (exc,))
    return bd


def _pair_chunks(mask):
    bits = bits_of(mask)
    return [mask_of(bits[i:i + 2]) for i in range(0, len(bits), 2)]


def _chunk_caterpillar(system, loads) -> STree:
    """A spine of prefix separations with one small leaf per load.

    Loads must cover the ground set, hold any edge entirely, and stay
    below the order bound; consecutive loads may overlap.  Leaf labels
    point their load at everything, spine labels split the loads into
    prefix and suffix unions.
    """
    universe = system.universe
    full = universe.full_mask
    q = len(loads)
    if q == 0:
        raise SeparationError("internal: a caterpillar needs loads")

    def admit(sep):
        if not system.contains(sep):
            raise SeparationError(
                "internal: caterpillar label %r falls outside the system"
                % (sep,))
        return sep

    if q == 1:
        return STree(2, {(0, 1): admit(universe.sep_from_masks(loads[0], full))})
    suffix = [0] * (q + 1)
    for i in range(q - 1, -1, -1):
        suffix[i] = suffix[i + 1] | loads[i]
    labels = {}
    prefix = 0
    for i in range(q):
        leaf = admit(universe.sep_from_masks(loads[i], full))
        labels[(q + i, i)] = leaf
        labels[(i, q + i)] = leaf.inverse
        if i < q - 1:
            prefix |= loads[i]
            spine = admit(universe.sep_from_masks(prefix, suffix[i + 1]))
            labels[(i, i + 1)] = spine
            labels[(i + 1, i)] = spine.inverse
    return STree(2 * q, labels)


def branch_decomposition_to_stree(bd, system) -> STree:
    """Build a tree over the covering star family from a branch
    decomposition of width below the system's order bound.

    Tree edges are labeled with the vertex loads of their two leaf
    sides, and a side spanning at most two vertices has them copied to
    the other side as well so the stars at leaves keep covering
    everything.  Vertices no edge reaches ride along as chained pairs
    of extra leaves; graphs with fewer than three edges become a
    caterpillar over their vertex loads directly.
    """
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    if k <= 2:
        raise InputError(
            "order bounds up to 2 are refused: there the tree side of "
            "the duality does not track branch-width (a two-edge star "
            "has branch-width 1 and a one-edge graph has branch-width "
            "0, yet any graph with an edge carries an order-2 tangle, "
            "so neither admits such a tree)")
    graph = _graph_behind(system.universe)
    bd.validate(graph)
    got = bd.width(graph)
    if got >= k:
        raise InputError(
            "the decomposition has width %d, needed below %d" % (got, k))
    m = len(graph.edges)
    full = system.universe.full_mask
    touched = 0
    for e in graph.edges:
        touched |= mask_of(e)
    if m <= 2:
        loads = [mask_of(e) for e in graph.edges]
        loads += _pair_chunks(full & ~touched)
        return _chunk_caterpillar(system, loads)
    adjacency = {t: set() for t in range(bd.n_nodes)}
    for (a, b) in bd.edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    loadof = {}
    for ei, leaf in bd.leaf_for.items():
        loadof[leaf] = mask_of(graph.edges[ei])
    nxt = bd.n_nodes
    stray = full & ~touched
    if stray:
        a, b = min((min(e), max(e)) for e in bd.edges)
        hub = nxt
        nxt += 1
        adjacency[a].discard(b)
        adjacency[b].discard(a)
        adjacency[a].add(hub)
        adjacency[b].add(hub)
        adjacency[hub] = {a, b}
        tail = hub
        for chunk in _pair_chunks(stray):
            c, z = nxt, nxt + 1
            nxt += 2
            adjacency[tail].add(c)
            adjacency[c] = {tail, z}
            adjacency[z] = {c}
            loadof[z] = chunk
            tail = c
    labels = {}
    for x in sorted(adjacency):
        for y in sorted(adjacency[x]):
            if x > y:
                continue
            yside = _tree_side(adjacency, x, y)
            raw_b = 0
            for t in yside:
                raw_b |= loadof.get(t, 0)
            raw_a = 0
            for t in adjacency:
                if t not in yside:
                    raw_a |= loadof.get(t, 0)
            small_a = popcount(raw_a) <= 2
            small_b = popcount(raw_b) <= 2
            if small_a and small_b:
                raise SeparationError(
                    "internal: both sides of a tree edge are tiny despite "
                    "three or more graph edges")
            am = raw_a | (raw_b if small_b else 0)
            bm = raw_b | (raw_a if small_a else 0)
            sep = system.universe.sep_from_masks(am, bm)
            if not system.contains(sep):
                raise SeparationError(
                    "internal: label %r of the extracted tree leaves the "
                    "system" % (sep,))
            labels[(x, y)] = sep
            labels[(y, x)] = sep.inverse
    return STree(nxt, labels)


# -- bramble and blockage translations -------------------------------------------


def tangle_from_bramble(bramble, system) -> Orientation:
    """Point every separation at the side whose interior holds a
    bramble set."""
    graph = _graph_behind(system.universe)
    bramble.validate(graph)
    masks = [mask_of(vs) for vs in bramble.sets]
    chosen = []
    for s in system.separations():
        sides = (s,) if s == s.inverse else (s, s.inverse)
        picks = []
        for o in sides:
            interior = o.payload[1] & ~o.payload[0]
            if any(vm & ~interior == 0 for vm in masks):
                picks.append(o)
        if not picks:
            raise InputError(
                "the bramble leaves %r unoriented; its order is too "
                "small for this system" % (s,))
        if len(picks) > 1:
            raise SeparationError(
                "internal: touching sets sit on both sides of %r" % (s,))
        chosen.append(picks[0])
    return Orientation(system, chosen)


def _small_masks(n_bits, bound):
    out = [m for m in range(1 << n_bits) if popcount(m) < bound]
    out.sort(key=lambda m: (popcount(m), m))
    return out


def bramble_from_tangle(tangle) -> Bramble:
    """Collect the one component claimed behind each small vertex set."""
    system = tangle.system
    universe = system.universe
    graph = _graph_behind(universe)
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    full = universe.full_mask
    chosen = set(tangle.chosen)
    sets = set()
    for xm in _small_masks(graph.n, k):
        rest = full & ~xm
        if rest == 0:
            continue
        hits = []
        for cm in graph.components(rest):
            am = cm | graph.neighbors_mask(cm)
            sep = universe.sep_from_masks(am, full & ~cm)
            if sep.inverse in chosen:
                hits.append(cm)
        if len(hits) != 1:
            raise InputError(
                "the orientation claims %d components behind %r, a "
                "tangle of this family claims exactly one"
                % (len(hits), bits_of(xm)))
        sets.add(frozenset(bits_of(hits[0])))
    return Bramble(sorted(sets, key=lambda vs: (len(vs), sorted(vs))))


def tangle_from_blockage(blockage, system) -> Orientation:
    """Orient each separation toward its side held by the blockage."""
    graph = _graph_behind(system.universe)
    k = system.order_bound
    if blockage.k != k:
        raise InputError(
            "the blockage bound %d does not match the system bound %r"
            % (blockage.k, k))
    blockage.validate(graph)
    chosen = []
    for s in system.separations():
        sides = (s,) if s == s.inverse else (s, s.inverse)
        picks = [o for o in sides if blockage.holds(bits_of(o.payload[0]))]
        if len(picks) != 1:
            raise SeparationError(
                "internal: a validated blockage holds %d sides of %r"
                % (len(picks), s))
        chosen.append(picks[0])
    return Orientation(system, chosen)


def blockage_from_tangle(tangle) -> Blockage:
    """The left sides of the orientation, bundled with its bound."""
    system = tangle.system
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    sets = {frozenset(bits_of(s.payload[0])) for s in tangle.chosen}
    return Blockage(sorted(sets, key=lambda vs: (len(vs), sorted(vs))), k)


# -- matroid translations ---------------------------------------------------------


def stree_to_matroid_decomposition(tree, matroid) -> MatroidTreeDecomposition:
    """Place each ground element at the unique node all labels point
    toward."""
    nodes = list(tree.nodes())
    wedges = tree.edges()
    placement = {}
    for e in range(matroid.m):
        bit = 1 << e
        out_deg = {t: 0 for t in nodes}
        for (a, b) in wedges:
            if tree.alpha(a, b).payload[1] & bit:
                out_deg[a] += 1
            else:
                out_deg[b] += 1
        sinks = [t for t in nodes if out_deg[t] == 0]
        if len(sinks) != 1:
            raise InputError(
                "element %d has %d sinks; trees over the rank family "
                "give exactly one" % (e, len(sinks)))
        placement[e] = sinks[0]
    return MatroidTreeDecomposition(len(nodes), wedges, placement)


def matroid_decomposition_to_stree(mtd, matroid, system) -> STree:
    """Label each tree edge with the two placement preimages.

    A matroid whose rank is already below the bound short-circuits to
    the two-node tree over the empty/full bipartition.
    """
    k = system.order_bound
    if k is None:
        raise InputError("the system needs an order bound")
    universe = system.universe
    if matroid.total_rank < k:
        return STree(2, {(0, 1): universe.sep_from_masks(0, universe.full_mask)})
    mtd.validate(matroid)
    for t in range(mtd.n_nodes):
        wd = mtd.node_width(matroid, t)
        if wd >= k:
            raise InputError(
                "node %d has width %d, needed below %d" % (t, wd, k))
    adj = mtd._adj()
    labels = {}
    for (a, b) in mtd.edges:
        bside = _tree_side(adj, a, b)
        bm = 0
        for e, t in mtd.placement.items():
            if t in bside:
                bm |= 1 << e
        sep = universe.sep_from_masks(universe.full_mask & ~bm, bm)
        if not system.contains(sep):
            raise SeparationError(
                "internal: label %r of a width-checked decomposition "
                "leaves the system" % (sep,))
        labels[(a, b)] = sep
        labels[(b, a)] = sep.inverse
    return STree(mtd.n_nodes, labels)


def matroid_decomposition_translations(obj, matroid, system=None):
    """Dispatch both matroid translation directions on input type."""
    if isinstance(obj, STree):
        return stree_to_matroid_decomposition(obj, matroid)
    if isinstance(obj, MatroidTreeDecomposition):
        if system is None:
            raise InputError("building a tree needs the separation system")
        return matroid_decomposition_to_stree(obj, matroid, system)
    raise InputError("no matroid translation for %r" % (type(obj).__name__,))


def decomposition_width(obj, context) -> int:
    """Validate a decomposition against its graph or matroid and
    measure its width."""
    if isinstance(obj, TreeDecomposition):
        obj.validate(context)
        return obj.width()
    if isinstance(obj, BranchDecomposition):
        obj.validate(context)
        return obj.width(context)
    if isinstance(obj, MatroidTreeDecomposition):
        obj.validate(context)
        return obj.width(context)
    raise InputError("no width rule for %r" % (type(obj).__name__,))
