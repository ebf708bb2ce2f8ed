"""Mode wiring: each width parameter as one solvable duality instance.

Sides are cross-checked against the exact width programs from the
ground-truth module, summaries against frozen field inventories, and
the witness checkers against hand-damaged witnesses whose defects are
known by construction.
"""

import itertools

import pytest

from widthdual.modes import (
    MODE_NAMES,
    PARAM_NAMES,
    branch_quirk_note,
    make_setup,
    star_forest_facts,
    summarize,
    tangle_violations,
    tree_violations,
    witness_violations,
)
from widthdual.oracle import branchwidth_exact, pathwidth_exact, treewidth_exact
from widthdual.stree import STree
from widthdual.universes import Graph, InputError, graphic_matroid

P3 = Graph(3, [(0, 1), (1, 2)])
P4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
K3 = Graph(3, [(0, 1), (1, 2), (0, 2)])
K4 = Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
C4 = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
CLAW = Graph(4, [(0, 1), (0, 2), (0, 3)])


def solve(mode, instance, k, **kw):
    setup = make_setup(mode, instance, k, **kw)
    witness = setup.solve()
    return setup, witness, summarize(setup, witness)


# -- construction guards ---------------------------------------------------------


def test_mode_names_cover_every_parameter():
    assert MODE_NAMES == ("branch", "tree", "path", "adhesion", "carving",
                          "rank", "matroid-tree", "custom")
    assert set(PARAM_NAMES) == set(MODE_NAMES)


def test_make_setup_rejects_bad_arguments():
    with pytest.raises(InputError):
        make_setup("tree", P3, 0)
    with pytest.raises(InputError):
        make_setup("tree", P3, "3")
    with pytest.raises(InputError):
        make_setup("tree", P3, 2, w=3)
    with pytest.raises(InputError):
        make_setup("tree", P3, 2, stars=[])
    with pytest.raises(InputError):
        make_setup("adhesion", P3, 2)
    # a bag bound below the order bound can hold no decomposition node
    with pytest.raises(InputError):
        make_setup("adhesion", P3, 3, w=2)
    with pytest.raises(InputError):
        make_setup("custom", P3, 2)
    with pytest.raises(InputError):
        make_setup("matroid-tree", P3, 2)
    with pytest.raises(InputError):
        make_setup("tree", graphic_matroid(K3), 2)
    with pytest.raises(InputError):
        make_setup("hypertree", P3, 2)


# -- sides follow the exact width programs ---------------------------------------


def test_tree_and_path_sides_flip_at_the_width():
    for g in (P4, K3, C4, CLAW):
        tw = treewidth_exact(g)
        pw = pathwidth_exact(g)
        for k in range(1, g.n + 2):
            setup, witness, out = solve("tree", g, k)
            assert witness_violations(setup, witness).ok
            assert out["side"] == ("tangle" if tw >= k - 1 else "tree")
            if out["side"] == "tangle":
                assert out["value"] == ">=%d" % (k - 1)
            else:
                assert out["value"] == tw if k == tw + 2 else out["value"] >= tw
                bags = out["decomposition"]["bags"].values()
                assert max(len(b) for b in bags) - 1 == out["value"]
            setup, witness, out = solve("path", g, k)
            assert witness_violations(setup, witness).ok
            assert out["side"] == ("tangle" if pw >= k - 1 else "tree")


def test_branch_side_flips_at_the_width_above_the_quirk_zone():
    for g in (P4, K3, C4, K4, CLAW):
        bw = branchwidth_exact(g)
        for k in range(3, g.n + 2):
            setup, witness, out = solve("branch", g, k)
            assert witness_violations(setup, witness).ok
            assert out["param"] == "branch-width"
            assert out["side"] == ("tangle" if bw >= k else "tree")
            if out["side"] == "tangle":
                assert out["value"] == ">=%d" % k
            elif k == bw + 1:
                assert out["value"] == bw


def test_adhesion_side_follows_the_frozen_flip_table():
    expect = {
        (P4, 2, 2): "tangle", (P4, 2, 3): "tree",
        (P4, 1, 4): "tangle", (P4, 1, 5): "tree",
        (C4, 2, 4): "tangle", (C4, 3, 4): "tree", (C4, 2, 5): "tree",
    }
    for (g, k, w), side in expect.items():
        setup, witness, out = solve("adhesion", g, k, w=w)
        assert witness_violations(setup, witness).ok
        assert out["side"] == side, (g, k, w)
        assert out["w"] == w
        if side == "tree":
            assert out["value"] <= w - 2
            assert out["adhesion"] <= k - 1
            assert "bags" in out["decomposition"]
        else:
            assert out["value"] == "none(width<%d;adhesion<%d)" % (w - 1, k)


def test_adhesion_with_matching_bounds_behaves_like_tree_mode():
    for g in (P4, K3):
        for k in range(2, g.n + 2):
            _, _, tree_out = solve("tree", g, k)
            _, _, adh_out = solve("adhesion", g, k, w=k)
            assert adh_out["side"] == tree_out["side"]


def test_matroid_mode_flips_at_matroid_tree_width():
    m3 = graphic_matroid(K3)
    setup, witness, out = solve("matroid-tree", m3, 2)
    assert witness_violations(setup, witness).ok
    assert (out["side"], out["value"]) == ("tangle", ">=2")
    setup, witness, out = solve("matroid-tree", m3, 3)
    assert witness_violations(setup, witness).ok
    assert (out["side"], out["value"]) == ("tree", 2)
    assert out["param"] == "matroid tree-width"
    setup, witness, out = solve("matroid-tree", graphic_matroid(K4), 4)
    assert witness_violations(setup, witness).ok
    assert (out["side"], out["value"]) == ("tree", 3)


def test_coverage_modes_always_report_a_tangle():
    for mode in ("carving", "rank"):
        for g in (P3, K3, C4):
            for k in range(1, 4):
                setup, witness, out = solve(mode, g, k)
                assert out["side"] == "tangle", (mode, g, k)
                assert out["value"] is None
                assert "decomposition" not in out
                assert witness_violations(setup, witness).ok
                assert out["tangle_size"] == len(setup.system.separations())


# -- the low-order branch quirk ---------------------------------------------------


def test_star_forest_facts_frozen_values():
    assert star_forest_facts(P3) == (True, 1, 2)
    assert star_forest_facts(Graph(5, [(0, i) for i in range(1, 5)])) == (True, 1, 2)
    assert star_forest_facts(Graph(4, [(0, 1), (2, 3)])) == (True, 0, 2)
    assert star_forest_facts(Graph(3, [])) == (True, 0, 1)
    assert star_forest_facts(Graph(1, [])) == (True, 0, 1)
    assert star_forest_facts(P4) == (False, None, None)
    assert star_forest_facts(K3) == (False, None, None)


def test_branch_quirk_summary_on_the_tangle_side():
    _, witness, out = solve("branch", P3, 2)
    assert (out["side"], witness.side) == ("tangle", "tangle")
    assert out["branch_width"] == 1
    assert out["tangle_number"] == 2
    assert out["value"] == 1
    assert "star" in out["note"]
    _, _, out = solve("branch", K3, 2)
    assert out["side"] == "tangle"
    assert out["branch_width"] == ">=2"
    assert out["tangle_number"] == ">=2"
    _, _, out = solve("branch", Graph(1, []), 1)
    assert out["side"] == "tangle"
    assert (out["branch_width"], out["tangle_number"]) == (0, 1)


def test_branch_quirk_summary_on_the_tree_side():
    empty3 = Graph(3, [])
    setup, witness, out = solve("branch", empty3, 2)
    assert (out["side"], witness.side) == ("tree", "stree")
    assert (out["branch_width"], out["tangle_number"]) == (0, 1)
    assert out["value"] == 0
    assert "decomposition" not in out
    assert witness_violations(setup, witness).ok
    assert "star" in branch_quirk_note(empty3)
    assert "non-star" in branch_quirk_note(K4)


# -- custom families --------------------------------------------------------------


def test_custom_mode_rejects_malformed_star_input():
    with pytest.raises(InputError, match="pair of vertex lists"):
        make_setup("custom", P3, 2, stars=[[([0], [1], [2])]])
    with pytest.raises(InputError, match="not below the bound"):
        make_setup("custom", P3, 2, stars=[[([0, 1], [0, 1, 2])]])
    with pytest.raises(InputError, match="trivial"):
        make_setup("custom", P3, 2, stars=[[([0, 1], [1, 2])]])


def test_custom_all_singletons_forces_a_tree():
    one = Graph(1, [])
    stars = [[([0], [])], [([], [0])], [([0], [0])]]
    setup, witness, out = solve("custom", one, 2, stars=stars)
    assert out["side"] == "tree"
    assert out["param"] == "custom family"
    assert out["value"] is None
    assert witness_violations(setup, witness).ok


def test_custom_replication_of_a_built_in_family():
    base_setup, base_witness, base_out = solve("path", P3, 2)
    fam = base_setup.solve_family
    elems = base_setup.system.elements
    members = [(s,) for s in elems if fam.contains((s,))]
    members += [(s, t) for s, t in itertools.combinations(elems, 2)
                if fam.contains((s, t))]
    stars = [[(list(s.side_a), list(s.side_b)) for s in m] for m in members]
    setup, witness, out = solve("custom", P3, 2, stars=stars)
    assert out["side"] == base_out["side"] == "tangle"
    assert ({s.payload for s in witness.tangle.chosen}
            == {s.payload for s in base_witness.tangle.chosen})
    assert witness_violations(setup, witness).ok


# -- witness checkers against known damage ----------------------------------------


def tangle_bed():
    setup, witness, _ = solve("tree", K3, 3)
    assert witness.side == "tangle"
    return setup, list(witness.tangle.chosen)


def swap_one(chosen, s):
    return [x for x in chosen if x != s] + [s.inverse]


def test_tangle_checker_accepts_the_solver_output():
    setup, chosen = tangle_bed()
    assert tangle_violations(setup, chosen).ok


def test_tangle_checker_sees_missing_orientations():
    setup, chosen = tangle_bed()
    report = tangle_violations(setup, chosen[:-1])
    assert not report.ok
    assert "separation_left_unoriented" in report.kinds()


def test_tangle_checker_sees_double_orientations():
    setup, chosen = tangle_bed()
    report = tangle_violations(setup, chosen + [chosen[0].inverse])
    assert not report.ok
    assert "separation_oriented_both_ways" in report.kinds()


def test_tangle_checker_sees_foreign_elements():
    setup, chosen = tangle_bed()
    foreign = make_setup("tree", K3, 2).system.elements[0]
    report = tangle_violations(setup, chosen + [foreign])
    assert not report.ok
    assert "element_outside_system" in report.kinds()


def test_tangle_checker_sees_forbidden_members():
    setup, chosen = tangle_bed()
    empty_side = next(s for s in chosen if s.payload == (0, K3.full_mask))
    report = tangle_violations(setup, swap_one(chosen, empty_side))
    assert not report.ok
    assert "forbidden_member_inside" in report.kinds()


def test_tangle_checker_sees_inconsistency():
    setup, chosen = tangle_bed()
    flagged = set()
    for s in chosen:
        if s.index == s.inverse.index:
            continue
        flagged |= tangle_violations(setup, swap_one(chosen, s)).kinds()
    assert "inconsistent_orientation" in flagged


def test_tree_checker_accepts_and_rejects():
    setup, witness, _ = solve("tree", P3, 3)
    assert witness.side == "stree"
    assert tree_violations(setup, witness.stree).ok
    # the star at the sink has the whole vertex set as its core
    lopsided = setup.system.universe.sep([1, 2], [0, 1, 2])
    bad = STree(2, {(0, 1): lopsided})
    report = tree_violations(setup, bad)
    assert not report.ok
    assert "star_not_in_family" in report.kinds()
