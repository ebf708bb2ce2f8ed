"""Problem modes: one solvable duality instance per width parameter.

A mode owns everything the solver and the verifier need for one width
parameter at one order bound: the separation system of all separations
below the bound, the forbidden-star family handed to the solver, the
richer family whose avoidance the tangle side certifies, and the
translation from tree witnesses to the classical decomposition the
parameter is defined by.

Graph modes build on vertex separations (branch, tree, path, adhesion)
or on vertex bipartitions (carving, rank); the matroid mode works on
ground-set bipartitions.  A custom mode takes an explicitly listed
star family over vertex separations.

The bipartition coverage modes (carving, rank) are degenerate by
design: orienting every bipartition away from one fixed vertex is
consistent and avoids every covering set, so those modes report a
tangle at every order and the tree side is unreachable.  The summary
marks their value column not-applicable rather than inventing a width
claim the family does not support.
"""

from .engine import ExplicitStarFamily, is_standard, strong_duality
from .families import (
    matroid_family,
    pathwidth_family,
    stree_to_branch_decomposition,
    stree_to_matroid_decomposition,
    stree_to_tree_decomposition,
    tangle_family,
    treewidth_family,
)
from .separations import SeparationError, is_consistent, low_order_subsystem
from .stree import ValidationIssue, ValidationReport
from .universes import (
    Graph,
    InputError,
    Matroid,
    build_bipartition_universe,
    build_vertex_universe,
    crossing_edge_order,
    cut_rank_order,
    matroid_order,
    separator_size_order,
)

GRAPH_MODES = ("branch", "tree", "path", "adhesion", "carving", "rank", "custom")
MATROID_MODES = ("matroid-tree",)
MODE_NAMES = GRAPH_MODES[:-1] + MATROID_MODES + ("custom",)

# Parameter names for reporting, per mode.
PARAM_NAMES = {
    "branch": "branch-width",
    "tree": "tree-width",
    "path": "path-width",
    "adhesion": "bounded-adhesion tree-width",
    "carving": "carving-width",
    "rank": "rank-width",
    "matroid-tree": "matroid tree-width",
    "custom": "custom family",
}


class ModeSetup:
    """One width-duality instance, ready to solve and verify."""

    def __init__(self, name, k, system, solve_family, check_family,
                 graph=None, matroid=None, w=None):
        self.name = name
        self.k = k
        self.system = system
        self.solve_family = solve_family
        self.check_family = check_family
        self.graph = graph
        self.matroid = matroid
        self.w = w

    def solve(self):
        return strong_duality(self.system, self.solve_family)

    def __repr__(self):
        extra = "" if self.w is None else ", w=%d" % self.w
        return "ModeSetup(%s, k=%d%s)" % (self.name, self.k, extra)


def _vertex_system(graph, k):
    universe = build_vertex_universe(graph, k)
    return low_order_subsystem(universe, separator_size_order(), k)


def _ground_system(n_ground, order_fn, k):
    universe = build_bipartition_universe(n_ground)
    return low_order_subsystem(universe, order_fn, k)


def _require_graph(instance, mode):
    if not isinstance(instance, Graph):
        raise InputError("mode %r expects a graph instance" % mode)


def make_setup(mode, instance, k, w=None, stars=None):
    """Build the duality instance for a mode name.

    The adhesion mode takes the bag bound w (at least k); the custom
    mode takes the member stars as lists of vertex-list pairs.  The
    matroid-tree mode expects a matroid instance, all others a graph.
    """
    if not isinstance(k, int) or k < 1:
        raise InputError("the order bound k must be a positive integer")
    if w is not None and mode != "adhesion":
        raise InputError("only the adhesion mode takes a bag bound w")
    if stars is not None and mode != "custom":
        raise InputError("only the custom mode takes explicit stars")

    if mode == "branch":
        _require_graph(instance, mode)
        system = _vertex_system(instance, k)
        full, star_part = tangle_family(system, "graph")
        return ModeSetup("branch", k, system, star_part, full, graph=instance)
    if mode == "tree":
        _require_graph(instance, mode)
        system = _vertex_system(instance, k)
        fam = treewidth_family(system)
        return ModeSetup("tree", k, system, fam, fam, graph=instance)
    if mode == "path":
        _require_graph(instance, mode)
        system = _vertex_system(instance, k)
        fam = pathwidth_family(system)
        return ModeSetup("path", k, system, fam, fam, graph=instance)
    if mode == "adhesion":
        _require_graph(instance, mode)
        if w is None:
            raise InputError("the adhesion mode needs a bag bound w")
        system = _vertex_system(instance, k)
        fam = treewidth_family(system, w)
        return ModeSetup("adhesion", k, system, fam, fam, graph=instance, w=w)
    if mode == "carving":
        _require_graph(instance, mode)
        system = _ground_system(instance.n, crossing_edge_order(instance), k)
        full, star_part = tangle_family(system, "submodular")
        return ModeSetup("carving", k, system, star_part, full, graph=instance)
    if mode == "rank":
        _require_graph(instance, mode)
        system = _ground_system(instance.n, cut_rank_order(instance), k)
        full, star_part = tangle_family(system, "submodular")
        return ModeSetup("rank", k, system, star_part, full, graph=instance)
    if mode == "matroid-tree":
        if not isinstance(instance, Matroid):
            raise InputError("mode 'matroid-tree' expects a matroid instance")
        system = _ground_system(instance.m, matroid_order(instance), k)
        fam = matroid_family(system, instance)
        return ModeSetup(
            "matroid-tree", k, system, fam, fam, matroid=instance)
    if mode == "custom":
        _require_graph(instance, mode)
        if stars is None:
            raise InputError("the custom mode needs explicit stars")
        system = _vertex_system(instance, k)
        fam = _explicit_family(system, stars)
        return ModeSetup("custom", k, system, fam, fam, graph=instance)
    raise InputError("unknown mode %r; choose one of %s"
                     % (mode, ", ".join(MODE_NAMES)))


def _explicit_family(system, stars):
    members = []
    for pos, star in enumerate(stars):
        member = []
        for pair in star:
            try:
                side_a, side_b = pair
            except (TypeError, ValueError):
                raise InputError(
                    "star %d: each separation is a pair of vertex lists"
                    % pos)
            sep = system.universe.sep(side_a, side_b)
            if not system.contains(sep):
                raise InputError(
                    "star %d uses a separation of order %d, not below the "
                    "bound %d" % (pos, system.order_fn(sep),
                                  system.order_bound))
            member.append(sep)
        members.append(member)
    try:
        fam = ExplicitStarFamily(system.universe, members)
    except SeparationError as exc:
        raise InputError("bad custom family: %s" % exc)
    if not is_standard(fam, system):
        raise InputError(
            "the custom family must force every trivial orientation of "
            "the system; add the missing singleton stars")
    return fam


# -- witness checking ----------------------------------------------------------

def tree_violations(setup, tree) -> ValidationReport:
    """Independent check of a tree witness against the mode's family."""
    return tree.validate_over(setup.solve_family, setup.system)


def tangle_violations(setup, chosen) -> ValidationReport:
    """Independent check of an orientation, given as raw separations.

    Accepts any iterable so that damaged candidates, which the
    orientation class itself would refuse to construct, still get a
    report with named issues instead of an exception.
    """
    chosen = list(chosen)
    issues = []
    sys_index = {s.index for s in setup.system.elements}
    universe = setup.system.universe
    for s in chosen:
        if s.universe is not universe or s.index not in sys_index:
            issues.append(ValidationIssue(
                "element_outside_system", s,
                "chosen element %r is not in the system" % (s,)))
    inside = [s for s in chosen
              if s.universe is universe and s.index in sys_index]
    picked = {s.index for s in inside}
    for s in setup.system.separations():
        inv = universe.inverse(s)
        has = s.index in picked
        has_inv = inv.index in picked
        if not has and not has_inv:
            issues.append(ValidationIssue(
                "separation_left_unoriented", s,
                "neither orientation of %r was chosen" % (s,)))
        elif has and has_inv and s.index != inv.index:
            issues.append(ValidationIssue(
                "separation_oriented_both_ways", s,
                "both orientations of %r were chosen" % (s,)))
    if not is_consistent(inside):
        issues.append(ValidationIssue(
            "inconsistent_orientation", None,
            "two chosen orientations point away from each other"))
    member = setup.check_family.find_member_within(inside)
    if member is not None:
        issues.append(ValidationIssue(
            "forbidden_member_inside", member,
            "the orientation contains the forbidden set %r" % (member,)))
    return ValidationReport(issues)


def witness_violations(setup, witness) -> ValidationReport:
    if witness.side == "stree":
        return tree_violations(setup, witness.stree)
    return tangle_violations(setup, witness.tangle.chosen)


# -- reporting -----------------------------------------------------------------

def star_forest_facts(graph):
    """Branch-width and tangle number when every component is a star.

    Returns (is_star_forest, branch_width, tangle_number); the numbers
    are None when the graph has a non-star component and exact values
    would need a real computation.
    """
    for (u, v) in graph.edges:
        du = bin(graph.adj[u]).count("1")
        dv = bin(graph.adj[v]).count("1")
        if du >= 2 and dv >= 2:
            return (False, None, None)
    per_comp_edges = []
    for comp in graph.components(graph.full_mask):
        count = 0
        for (u, v) in graph.edges:
            if (1 << u) & comp:
                count += 1
        per_comp_edges.append(count)
    bw = 1 if any(c >= 2 for c in per_comp_edges) else 0
    theta = 2 if graph.m >= 1 else 1
    return (True, bw, theta)


def branch_quirk_note(graph):
    """One-line explanation of branch mode below order bound 3."""
    is_sf, bw, theta = star_forest_facts(graph)
    if is_sf:
        return ("order bounds below 3 do not track branch-width: every "
                "component is a star, so branch-width is %d while the "
                "largest tangle order is %d" % (bw, theta))
    return ("order bounds below 3 do not track branch-width; this graph "
            "has a non-star component, so branch-width is at least 2 and "
            "from bound 3 upward the duality tracks it exactly")


def summarize(setup, witness) -> dict:
    """Report a solved instance: side, parameter value or bound, objects.

    Tree witnesses are translated to the mode's classical decomposition
    and measured; tangle witnesses yield the bound the tangle proves.
    The decomposition JSON rides along when a translation exists.
    """
    out = {
        "mode": setup.name,
        "k": setup.k,
        "param": PARAM_NAMES[setup.name],
        "side": "tree" if witness.side == "stree" else "tangle",
    }
    if setup.w is not None:
        out["w"] = setup.w
    if witness.side == "stree":
        _summarize_tree(setup, witness.stree, out)
    else:
        out["tangle_size"] = len(witness.tangle.chosen)
        _summarize_tangle(setup, out)
    return out


def _summarize_tree(setup, tree, out):
    name = setup.name
    if name == "branch":
        if setup.k <= 2:
            _quirk_fields(setup.graph, out)
            return
        bd = stree_to_branch_decomposition(tree)
        out["value"] = bd.width(setup.graph)
        out["decomposition"] = bd.to_json_dict()
        return
    if name in ("tree", "adhesion", "path"):
        td = stree_to_tree_decomposition(tree)
        out["value"] = td.width()
        out["decomposition"] = td.to_json_dict()
        if name == "adhesion":
            out["adhesion"] = td.adhesion()
        if name == "path":
            for t in range(td.n_nodes):
                deg = sum(1 for e in td.edges if t in e)
                if deg > 2:
                    raise SeparationError(
                        "internal: a two-member star family produced a "
                        "branching decomposition tree")
        return
    if name == "matroid-tree":
        mtd = stree_to_matroid_decomposition(tree, setup.matroid)
        out["value"] = mtd.width(setup.matroid)
        out["decomposition"] = mtd.to_json_dict()
        return
    if name in ("carving", "rank"):
        raise SeparationError(
            "internal: coverage families over bipartitions admit no "
            "decomposition tree, yet one was produced")
    out["value"] = None


def _quirk_fields(graph, out):
    # Below order bound 3 the duality does not track branch-width, so
    # the run reports the structural facts instead of a witness bound.
    is_sf, bw, theta = star_forest_facts(graph)
    out["branch_width"] = bw if is_sf else ">=2"
    out["tangle_number"] = theta if is_sf else ">=2"
    out["value"] = out["branch_width"]
    out["note"] = branch_quirk_note(graph)


def _summarize_tangle(setup, out):
    name = setup.name
    k = setup.k
    if name == "branch":
        if k <= 2:
            _quirk_fields(setup.graph, out)
        else:
            out["value"] = ">=%d" % k
        return
    if name in ("tree", "path"):
        out["value"] = ">=%d" % (k - 1)
        return
    if name == "adhesion":
        out["value"] = "none(width<%d;adhesion<%d)" % (setup.w - 1, k)
        return
    if name == "matroid-tree":
        out["value"] = ">=%d" % k
        return
    # carving, rank, custom: the family proves no width bound
    out["value"] = None


__all__ = [
    "GRAPH_MODES",
    "MATROID_MODES",
    "MODE_NAMES",
    "PARAM_NAMES",
    "ModeSetup",
    "branch_quirk_note",
    "make_setup",
    "star_forest_facts",
    "summarize",
    "tangle_violations",
    "tree_violations",
    "witness_violations",
]
