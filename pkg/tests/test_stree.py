"""Labeled-tree structure, validation, and the normalization lemma mechanics.

The reduction traces asserted here (which nodes survive pruning and
contraction, and the final chain shapes) were first worked out by hand on
paper for these exact label patterns, then frozen.
"""

from __future__ import annotations

import json
import random

import pytest

from widthdual.separations import SeparationError, low_order_subsystem
from widthdual.stree import STree, stree_from_json_dict
from widthdual.universes import Graph, build_vertex_universe, separator_size_order


class AnyFamily:
    def contains(self, star):
        return True


class NoFamily:
    def contains(self, star):
        return False


class ExplicitSet:
    def __init__(self, stars):
        self._keys = {frozenset(s.index for s in st) for st in stars}

    def contains(self, star):
        return frozenset(s.index for s in star) in self._keys


def p4_setup():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    uni = build_vertex_universe(g, 2)
    sk = low_order_subsystem(uni, separator_size_order(), 2)
    return g, uni, sk


def test_two_node_tree_basics():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    t = STree(2, {(0, 1): r})
    assert t.alpha(1, 0) == r.inverse
    assert t.edges() == [(0, 1)]
    assert t.leaves() == [0, 1]
    assert t.oriented_star_at(0) == (r.inverse,)
    assert t.oriented_star_at(1) == (r,)
    assert t.is_irredundant()


def test_degenerate_edge_star():
    g, uni, sk = p4_setup()
    deg = uni.sep_from_masks(g.full_mask, g.full_mask)
    t = STree(2, {(0, 1): deg})
    assert t.oriented_star_at(0) == (deg,)
    assert t.oriented_star_at(1) == (deg,)


def test_constructor_rejections():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    with pytest.raises(SeparationError):
        STree(1, {})
    with pytest.raises(SeparationError):
        STree(3, {(0, 1): r})  # disconnected: missing an edge
    with pytest.raises(SeparationError):
        STree(2, {(0, 1): r, (1, 0): r})  # reverse must be the inverse
    with pytest.raises(SeparationError):
        STree(2, {(0, 0): r})
    with pytest.raises(SeparationError):
        STree(3, {(0, 1): r, (1, 2): r, (2, 0): r})  # cycle
    # Reverse direction supplied consistently is fine.
    STree(2, {(0, 1): r, (1, 0): r.inverse})


def test_three_leaf_star_at_center():
    g, uni, sk = p4_setup()
    a = uni.sep([0], [0, 1, 2, 3])
    b = uni.sep([3], [0, 1, 2, 3])
    c = uni.sep_from_masks(0, g.full_mask)
    t = STree(4, {(1, 0): a, (2, 0): b, (3, 0): c})
    star = t.oriented_star_at(0)
    assert len(star) == 3
    assert set(star) == {a, b, c}


def test_validate_over_family_membership():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    t = STree(2, {(0, 1): r})
    fam = ExplicitSet([(r,), (r.inverse,)])
    assert t.validate_over(fam, sk).ok
    bad = t.validate_over(NoFamily(), sk)
    assert not bad.ok
    assert len(bad.issues) == 2
    assert bad.kinds() == {"star_not_in_family"}
    assert sorted(i.where for i in bad.issues) == [0, 1]


def test_validate_flags_labels_outside_system():
    g, uni, sk = p4_setup()
    wide = uni.sep([0, 1, 2], [2, 3])  # separator {2} is fine
    outside = uni.sep([0, 1, 2], [1, 2, 3])  # separator {1,2}, order 2
    t = STree(2, {(0, 1): outside})
    rep = t.validate_over(AnyFamily(), sk)
    assert not rep.ok
    assert rep.kinds() == {"label_outside_system"}
    assert {i.where for i in rep.issues} == {(0, 1), (1, 0)}
    assert t.validate_over(AnyFamily()).ok  # no system, no label check
    assert STree(2, {(0, 1): wide}).validate_over(AnyFamily(), sk).ok


def test_natural_order_examples():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    s = uni.sep([0, 1, 2], [2, 3])
    t = STree(3, {(0, 1): r, (1, 2): s})
    assert t.natural_leq((0, 1), (1, 2))
    assert not t.natural_leq((1, 2), (0, 1))
    assert not t.natural_leq((0, 1), (2, 1))
    assert not t.natural_leq((2, 1), (0, 1))
    assert not t.natural_leq((0, 1), (1, 0))
    assert t.natural_leq((0, 1), (0, 1))
    with pytest.raises(SeparationError):
        t.natural_leq((0, 2), (0, 1))


def random_tree(rng, uni, n):
    deg = uni.sep_from_masks(uni.full_mask, uni.full_mask)
    labels = {}
    for i in range(1, n):
        labels[(rng.randrange(i), i)] = deg
    return STree(n, labels)


def test_natural_order_is_a_partial_order():
    rng = random.Random(31337)
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    uni = build_vertex_universe(g, 2)
    for _ in range(60):
        t = random_tree(rng, uni, rng.randrange(2, 9))
        de = t.directed_edges()
        for e1 in de:
            for e2 in de:
                le12 = t.natural_leq(e1, e2)
                le21 = t.natural_leq(e2, e1)
                if le12 and le21:
                    assert e1 == e2
                for e3 in de:
                    if le12 and t.natural_leq(e2, e3):
                        assert t.natural_leq(e1, e3)


def test_leaf_edge_lies_below_everything_pointing_away():
    rng = random.Random(777)
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    uni = build_vertex_universe(g, 2)
    for _ in range(40):
        t = random_tree(rng, uni, rng.randrange(2, 9))
        for leaf in t.leaves():
            e = (leaf, t.neighbors(leaf)[0])
            for (u, v) in t.directed_edges():
                # exactly one orientation of every edge is above the leaf edge
                above = t.natural_leq(e, (u, v))
                other = t.natural_leq(e, (v, u))
                if (u, v) in (e, (e[1], e[0])):
                    continue
                assert above != other


def test_order_preservation_on_valid_tree():
    # Bag sequence {0,1},{1,2},{2,3} of the path: labels must be monotone
    # along the tree; checked for every comparable pair.
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    s = uni.sep([0, 1, 2], [2, 3])
    t = STree(3, {(0, 1): r, (1, 2): s})
    for e1 in t.directed_edges():
        for e2 in t.directed_edges():
            if t.natural_leq(e1, e2):
                assert uni.leq(t.alpha(*e1), t.alpha(*e2))
    rep = t.validate_over(AnyFamily(), sk)
    assert rep.ok


def test_prune_removes_duplicate_branch():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    q = uni.sep([2, 3], [0, 1, 2])
    # Center 0 with leaves 1,2 both sending r and leaf 3 sending q.
    t = STree(4, {(1, 0): r, (2, 0): r, (3, 0): q})
    assert not t.is_irredundant()
    pruned = t.prune(3)
    assert pruned.is_irredundant()
    assert pruned.n_nodes == 3
    stars = [set(pruned.oriented_star_at(n)) for n in pruned.nodes()]
    assert {r, q} in stars  # center star unchanged as a set
    # Keeping a node inside one duplicate branch keeps that branch.
    kept = t.prune(2)
    assert kept.n_nodes == 3
    assert any(
        kept.alpha(x, y) == r for (x, y) in kept.directed_edges())
    # Idempotent on irredundant input.
    again = pruned.prune(0)
    assert again.n_nodes == pruned.n_nodes


def test_prune_preserves_family_validity():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    q = uni.sep([2, 3], [0, 1, 2])
    t = STree(4, {(1, 0): r, (2, 0): r, (3, 0): q})
    fam = ExplicitSet([
        (r.inverse,), (q.inverse,),
        tuple(sorted({r, q}, key=lambda s: s.key())),
    ])
    assert t.validate_over(fam).ok
    assert t.prune(0).validate_over(fam).ok


def test_contract_middle_edge():
    g, uni, sk = p4_setup()
    s = uni.sep([0, 1], [1, 2, 3])
    t = STree(3, {(0, 1): s, (1, 2): s})
    out = t.contract_nonantisymmetric()
    assert out.n_nodes == 2
    assert out.alpha(0, 1) == s
    # Non-antisymmetric star at the middle: it received s-inverse and sent s.
    assert set(t.oriented_star_at(1)) == {s, s.inverse}


def test_contract_removes_middle_branches():
    g, uni, sk = p4_setup()
    s = uni.sep([0, 1], [1, 2, 3])
    w = uni.sep([0], [0, 1, 2, 3])
    t = STree(4, {(0, 1): s, (1, 2): s, (3, 1): w})
    out = t.contract_nonantisymmetric()
    assert out.n_nodes == 2
    assert out.alpha(0, 1) == s


def test_contract_noop_when_antisymmetric():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    s = uni.sep([0, 1, 2], [2, 3])
    t = STree(3, {(0, 1): r, (1, 2): s})
    assert t.contract_nonantisymmetric() is t


def test_reduce_to_unique_leaf_label_chain():
    # Chain of three r-labeled edges pointing away from the leaf collapses
    # to a single edge; worked through by hand for this exact shape.
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    t = STree(4, {(0, 1): r, (1, 2): r, (2, 3): r})
    out, x = t.reduce_to_unique_leaf_label(0, sk)
    assert x == 0
    assert out.n_nodes == 2
    assert out.alpha(0, 1) == r
    occurrences = [e for e in out.directed_edges() if out.alpha(*e) == r]
    assert occurrences == [(0, 1)]


def test_reduce_is_noop_when_already_unique():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    s = uni.sep([0, 1, 2], [2, 3])
    t = STree(3, {(0, 1): r, (1, 2): s})
    out, x = t.reduce_to_unique_leaf_label(0, sk)
    assert x == 0
    assert out.n_nodes == 3


def test_reduce_rejects_bad_leaf_labels():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    bottom = uni.sep_from_masks(0, g.full_mask)  # trivial here
    t = STree(2, {(0, 1): bottom})
    with pytest.raises(SeparationError):
        t.reduce_to_unique_leaf_label(0, sk)
    deg = uni.sep_from_masks(g.full_mask, g.full_mask)
    t2 = STree(2, {(0, 1): deg})
    with pytest.raises(SeparationError):
        t2.reduce_to_unique_leaf_label(0, sk)
    t3 = STree(3, {(0, 1): r, (1, 2): r})
    with pytest.raises(SeparationError):
        t3.reduce_to_unique_leaf_label(1, sk)  # not a leaf


def test_json_round_trip_and_canonical_form():
    g, uni, sk = p4_setup()
    r = uni.sep([0, 1], [1, 2, 3])
    s = uni.sep([0, 1, 2], [2, 3])
    t = STree(3, {(0, 1): r, (1, 2): s})
    d = t.to_json_dict()
    assert d == {
        "kind": "stree",
        "nodes": [0, 1, 2],
        "edges": [
            {"x": 0, "y": 1, "alpha_xy": {"A": [0, 1], "B": [1, 2, 3]}},
            {"x": 1, "y": 2, "alpha_xy": {"A": [0, 1, 2], "B": [2, 3]}},
        ],
    }
    back = stree_from_json_dict(json.loads(json.dumps(d)), uni)
    assert back.to_json_dict() == d


def test_json_rejects_malformed_witnesses():
    g, uni, sk = p4_setup()
    with pytest.raises(SeparationError):
        stree_from_json_dict({"kind": "tangle"}, uni)
    with pytest.raises(SeparationError):
        stree_from_json_dict({"kind": "stree", "nodes": [0, 2],
                              "edges": []}, uni)
    with pytest.raises(SeparationError):
        stree_from_json_dict(
            {"kind": "stree", "nodes": [0, 1],
             "edges": [{"x": 0, "y": 1, "alpha_xy": {"A": [0]}}]}, uni)
    # Payload violating the ground structure is caught by the universe.
    with pytest.raises(SeparationError):
        stree_from_json_dict(
            {"kind": "stree", "nodes": [0, 1],
             "edges": [{"x": 0, "y": 1,
                        "alpha_xy": {"A": [0], "B": [1, 2, 3]}}]}, uni)
