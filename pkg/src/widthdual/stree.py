"""Trees labeled with oriented separations, and their normal forms.

An STree is a finite tree with at least one edge together with a map alpha
from directed edges to oriented separations such that reversing an edge
inverts its label.  The set of labels entering a node t is the star
associated with t; the tree is *over* a family F when every such star lies
in F.

Three normalization steps from the duality machinery live here:

* prune: while some node has two neighbours sending it the same label,
  drop one of the two branches (keeping a distinguished node).  The
  surviving stars are unchanged as sets, so being over F is preserved.

* contraction: if a node t receives a label from one neighbour that it also
  sends to another, the whole middle part around t can be cut out and the
  two neighbours joined directly with that label.  Again stars survive.

* leaf-label reduction: starting from a leaf x whose outgoing label r is
  neither trivial nor degenerate, contractions make x's edge the unique
  directed edge labeled r.  Order preservation along the tree guarantees
  every intermediate edge also carries r, which is exactly the contraction
  pattern.

The natural partial order on directed edges ((x,y) <= (u,v) when the edge
uv sits on the y-side of xy and the edge xy on the u-side of uv) is what
"order preservation" refers to: on irredundant trees whose stars really are
stars, alpha is monotone for it.  validate_over re-checks that monotonicity
and the impossibility of equal labels pointing toward each other with a
nontrivial label; those can only fire when some associated set fails to be
a star, so they act as corruption detectors for externally supplied trees.
"""

from __future__ import annotations

from .separations import OrientedSep, SeparationError, bits_of, is_star


class ValidationIssue:
    """One defect found while validating a tree against a family."""

    __slots__ = ("kind", "where", "message")

    def __init__(self, kind: str, where, message: str):
        self.kind = kind
        self.where = where
        self.message = message

    def __repr__(self):
        return "ValidationIssue(%s at %r: %s)" % (self.kind, self.where, self.message)


class ValidationReport:
    def __init__(self, issues):
        self.issues = list(issues)

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> set:
        return {i.kind for i in self.issues}

    def __repr__(self):
        if self.ok:
            return "ValidationReport(ok)"
        return "ValidationReport(%d issues: %s)" % (
            len(self.issues),
            "; ".join(repr(i) for i in self.issues),
        )


class STree:
    """A tree with >= 1 edge whose directed edges carry oriented separations.

    ``labels`` maps directed node pairs to labels; only one direction per
    edge needs to be given, the reverse is filled in with the inverse label.
    If both directions are present they must already be inverse to each
    other.
    """

    def __init__(self, n_nodes: int, labels: dict):
        if n_nodes < 2:
            raise SeparationError("a labeled tree needs at least one edge")
        self.n_nodes = n_nodes
        alpha: dict[tuple[int, int], OrientedSep] = {}
        for (x, y), sep in sorted(labels.items(), key=lambda kv: kv[0]):
            if not (0 <= x < n_nodes and 0 <= y < n_nodes) or x == y:
                raise SeparationError("bad edge (%r,%r)" % (x, y))
            if (x, y) in alpha:
                if alpha[(x, y)] != sep:
                    raise SeparationError(
                        "conflicting labels for edge (%r,%r)" % (x, y))
                continue
            alpha[(x, y)] = sep
            alpha[(y, x)] = sep.inverse
        self._alpha = alpha
        undirected = {(min(x, y), max(x, y)) for (x, y) in alpha}
        if len(undirected) != n_nodes - 1:
            raise SeparationError(
                "%d nodes need %d edges, got %d"
                % (n_nodes, n_nodes - 1, len(undirected)))
        adj: list[list[int]] = [[] for _ in range(n_nodes)]
        for x, y in undirected:
            adj[x].append(y)
            adj[y].append(x)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        # Connectedness: n-1 edges + connected == tree.
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != n_nodes:
            raise SeparationError("edge set does not form a tree")
        uni = next(iter(alpha.values())).universe
        for sep in alpha.values():
            if sep.universe is not uni:
                raise SeparationError("labels from different universes")
        self.universe = uni

    # -- structure ----------------------------------------------------------

    def nodes(self):
        return range(self.n_nodes)

    def neighbors(self, t: int):
        return self._adj[t]

    def degree(self, t: int) -> int:
        return len(self._adj[t])

    def leaves(self) -> list[int]:
        return [t for t in range(self.n_nodes) if len(self._adj[t]) == 1]

    def edges(self) -> list[tuple[int, int]]:
        return sorted(
            {(min(x, y), max(x, y)) for (x, y) in self._alpha})

    def directed_edges(self) -> list[tuple[int, int]]:
        return sorted(self._alpha)

    def alpha(self, x: int, y: int) -> OrientedSep:
        try:
            return self._alpha[(x, y)]
        except KeyError:
            raise SeparationError("no edge (%r,%r)" % (x, y))

    def oriented_star_at(self, t: int) -> tuple[OrientedSep, ...]:
        """Labels entering t, duplicates collapsed, canonically sorted."""
        seen = {}
        for x in self._adj[t]:
            sep = self._alpha[(x, t)]
            seen[sep.index] = sep
        return tuple(sorted(seen.values(), key=lambda s: s.key()))

    def side_nodes(self, x: int, y: int) -> set[int]:
        """Nodes of the component of the tree minus edge xy that contains y."""
        if y not in self._adj[x]:
            raise SeparationError("no edge (%r,%r)" % (x, y))
        seen = {y}
        stack = [y]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w == x and v == y:
                    continue
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def natural_leq(self, e1: tuple[int, int], e2: tuple[int, int]) -> bool:
        """(x,y) <= (u,v): uv lies on the y-side of xy, xy on the u-side of uv."""
        for (a, b) in (e1, e2):
            if b not in self._adj[a]:
                raise SeparationError("no edge %r" % ((a, b),))
        if e1 == e2:
            return True
        x, y = e1
        u, v = e2
        if (x, y) == (v, u):
            return False
        y_side = self.side_nodes(x, y)
        if not (u in y_side and v in y_side):
            return False
        u_side = self.side_nodes(v, u)
        return x in u_side and y in u_side

    # -- validation ----------------------------------------------------------

    def is_irredundant(self) -> bool:
        for t in range(self.n_nodes):
            incoming = [self._alpha[(x, t)].index for x in self._adj[t]]
            if len(set(incoming)) != len(incoming):
                return False
        return True

    def validate_over(self, family, system=None) -> ValidationReport:
        """Check the tree is an S-tree over the family.

        Reports are complete rather than fail-fast: every node with an
        associated set outside the family is listed, and with ``system``
        given, every label outside the system.  On irredundant trees whose
        associated sets are all stars, two theorem-backed consequences are
        re-checked as corruption detectors (they cannot fail otherwise):
        order preservation along the tree, and nontriviality of labels that
        occur on edges pointing toward each other.
        """
        issues = []
        if system is not None:
            for (x, y) in self.directed_edges():
                if not system.contains(self._alpha[(x, y)]):
                    issues.append(ValidationIssue(
                        "label_outside_system", (x, y),
                        "label %r not in the separation system"
                        % (self._alpha[(x, y)],)))
        all_stars = True
        for t in range(self.n_nodes):
            star = self.oriented_star_at(t)
            if not is_star(star):
                all_stars = False
            if not family.contains(star):
                issues.append(ValidationIssue(
                    "star_not_in_family", t,
                    "associated set %r not in the family" % (star,)))
        if all_stars and self.is_irredundant():
            issues.extend(self._lemma_checks(system))
        return ValidationReport(issues)

    def _lemma_checks(self, system):
        issues = []
        dedges = self.directed_edges()
        reported = set()
        for e1 in dedges:
            a1 = self._alpha[e1]
            for e2 in dedges:
                if e1 == e2 or e1 == (e2[1], e2[0]):
                    continue
                if not self.natural_leq(e1, e2):
                    continue
                und1 = (min(e1), max(e1))
                und2 = (min(e2), max(e2))
                pair_key = tuple(sorted((und1, und2)))
                a2 = self._alpha[e2]
                if (not self.universe.leq(a1, a2)
                        and ("order", pair_key) not in reported):
                    reported.add(("order", pair_key))
                    issues.append(ValidationIssue(
                        "order_not_preserved", (e1, e2),
                        "%r <= %r as edges but %r !<= %r as labels"
                        % (e1, e2, a1, a2)))
                # Equal labels on edges pointing toward each other force a
                # trivial label.  A lone degenerate edge label is legitimate
                # but never forms such a pair (one-edge trees have none).
                if (system is not None and a1 == a2.inverse
                        and not self.universe.is_degenerate(a1)
                        and system.contains(a1)
                        and system.trivial_witness(a1) is None
                        and ("facing", pair_key) not in reported):
                    reported.add(("facing", pair_key))
                    issues.append(ValidationIssue(
                        "equal_labels_point_inward", (e1, e2),
                        "nontrivial label %r occurs on facing edges" % (a1,)))
        return issues

    # -- transformations ------------------------------------------------------

    def _rebuild(self, keep: set[int], extra: dict) -> "STree":
        """Subtree on ``keep`` plus ``extra`` directed labels, renumbered."""
        order = sorted(keep)
        remap = {old: new for new, old in enumerate(order)}
        labels = {}
        for (x, y), sep in self._alpha.items():
            if x in keep and y in keep:
                labels[(remap[x], remap[y])] = sep
        for (x, y), sep in extra.items():
            labels[(remap[x], remap[y])] = sep
            labels[(remap[y], remap[x])] = sep.inverse
        return STree(len(order), labels)

    def prune(self, x: int) -> "STree":
        """Remove duplicate branches until irredundant, keeping node x."""
        return self._prune_tracked(x)[0]

    def _prune_tracked(self, x: int) -> tuple["STree", int]:
        """prune(), also returning the new index of x.

        When a node t receives equal labels from neighbours t1 and t2, the
        branch through whichever of them does not lead to x is deleted; t's
        star keeps the shared label via the surviving branch, so all stars
        are preserved as sets.  x lies in at most one of the two branches,
        so it always survives.
        """
        tree = self
        while True:
            found = None
            for t in range(tree.n_nodes):
                nbrs = tree._adj[t]
                for i in range(len(nbrs)):
                    for j in range(i + 1, len(nbrs)):
                        if (tree._alpha[(nbrs[i], t)]
                                == tree._alpha[(nbrs[j], t)]):
                            found = (t, nbrs[i], nbrs[j])
                            break
                    if found:
                        break
                if found:
                    break
            if not found:
                return tree, x
            t, t1, t2 = found
            drop = t2
            if x in tree.side_nodes(t, t2):
                drop = t1
            keep = set(range(tree.n_nodes)) - tree.side_nodes(t, drop)
            old_order = sorted(keep)
            tree = tree._rebuild(keep, {})
            x = old_order.index(x)

    def contract_nonantisymmetric(self) -> "STree":
        """Cut out middles whose star contains a label and its inverse.

        After iterating, every associated star is antisymmetric.  Each step
        takes t with alpha(t1, t) == alpha(t, t2), removes the component of
        the tree minus both edges that contains t, and joins t1 to t2 with
        that label; the stars at t1 and t2 are unchanged as sets.
        """
        tree = self
        while True:
            found = None
            for t in range(tree.n_nodes):
                for t1 in tree._adj[t]:
                    for t2 in tree._adj[t]:
                        if t1 != t2 and (tree._alpha[(t1, t)]
                                         == tree._alpha[(t, t2)]):
                            found = (t, t1, t2)
                            break
                    if found:
                        break
                if found:
                    break
            if not found:
                return tree
            t, t1, t2 = found
            sep = tree._alpha[(t, t2)]
            keep = tree.side_nodes(t, t1) | tree.side_nodes(t, t2)
            tree = tree._rebuild(keep, {(t1, t2): sep})

    def reduce_to_unique_leaf_label(self, x: int, system) -> tuple["STree", int]:
        """Make the leaf edge at x the only directed edge with its label.

        Requires x to be a leaf whose outgoing label r is nondegenerate and
        nontrivial in ``system``.  Returns the transformed tree and the new
        index of x.  Every other occurrence of r must point away from x
        (otherwise r would be trivial), and all labels between are equal to
        r, so repeated contraction removes them.
        """
        if self.degree(x) != 1:
            raise SeparationError("node %r is not a leaf" % (x,))
        r = self._alpha[(x, self._adj[x][0])]
        if self.universe.is_degenerate(r):
            raise SeparationError("leaf label %r is degenerate" % (r,))
        if system.trivial_witness(r) is not None:
            raise SeparationError("leaf label %r is trivial" % (r,))
        tree, x = self._prune_tracked(x)
        while True:
            y = tree._adj[x][0]
            e = (x, y)
            target = None
            for (u, v) in tree.directed_edges():
                if (u, v) != e and tree._alpha[(u, v)] == r:
                    target = (u, v)
                    break
            if target is None:
                return tree, x
            u, v = target
            if not tree.natural_leq(e, target):
                # Would contradict the triviality dichotomy for facing
                # equal labels; cannot happen for a nontrivial r.
                raise SeparationError(
                    "equal label %r points toward the leaf edge" % (r,))
            path = tree._path(x, u)
            p = path[-2]  # neighbour of u toward x
            if tree._alpha[(p, u)] != r:
                raise SeparationError(
                    "order preservation violated at %r" % ((p, u),))
            keep = tree.side_nodes(u, p) | tree.side_nodes(u, v)
            old_order = sorted(keep)
            tree = tree._rebuild(keep, {(p, v): r})
            x = old_order.index(x)

    def _path(self, a: int, b: int) -> list[int]:
        prev = {a: None}
        stack = [a]
        while stack:
            v = stack.pop()
            if v == b:
                break
            for w in self._adj[v]:
                if w not in prev:
                    prev[w] = v
                    stack.append(w)
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        path.reverse()
        return path

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        edges = []
        for (x, y) in self.edges():
            a, b = self._alpha[(x, y)].payload
            edges.append({
                "x": x,
                "y": y,
                "alpha_xy": {"A": list(bits_of(a)), "B": list(bits_of(b))},
            })
        return {"kind": "stree", "nodes": list(range(self.n_nodes)),
                "edges": edges}

    def __repr__(self):
        return "STree(%d nodes, %d edges)" % (self.n_nodes, self.n_nodes - 1)


def stree_from_json_dict(data: dict, universe) -> STree:
    """Rebuild a tree witness; payload checks run in the universe."""
    if not isinstance(data, dict) or data.get("kind") != "stree":
        raise SeparationError("not a tree witness")
    try:
        nodes = list(data["nodes"])
        raw_edges = list(data["edges"])
    except (KeyError, TypeError):
        raise SeparationError("tree witness needs 'nodes' and 'edges'")
    if nodes != list(range(len(nodes))):
        raise SeparationError("'nodes' must be 0..n-1")
    labels = {}
    for e in raw_edges:
        try:
            x, y = int(e["x"]), int(e["y"])
            side_a = e["alpha_xy"]["A"]
            side_b = e["alpha_xy"]["B"]
        except (KeyError, TypeError, ValueError):
            raise SeparationError("malformed edge record %r" % (e,))
        labels[(x, y)] = universe.sep(side_a, side_b)
    return STree(len(nodes), labels)
