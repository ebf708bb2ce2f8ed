"""Graph/bipartition universes, order functions, matroids, ingestion."""

from __future__ import annotations

import itertools
import random

import pytest

from widthdual.separations import SeparationError, bits_of, mask_of
from widthdual.universes import (
    CapExceeded,
    Graph,
    InputError,
    Matroid,
    build_bipartition_universe,
    build_vertex_universe,
    crossing_edge_order,
    cut_rank_order,
    gf2_rank,
    graph_from_dimacs,
    graph_from_json_dict,
    graphic_matroid,
    linear_gf2_matroid,
    matroid_from_json_dict,
    matroid_order,
    separator_size_order,
)


def path_graph(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


# ---------------------------------------------------------------- graphs


def test_graph_basic_invariants():
    g = Graph(4, [(0, 1), (1, 2), (0, 1)])  # duplicate edge collapses
    assert g.edges == ((0, 1), (1, 2))
    assert g.neighbors_mask(1 << 1) == mask_of([0, 2])
    assert g.isolated_mask() == mask_of([3])
    comps = g.components(g.full_mask)
    assert sorted(comps) == [mask_of([0, 1, 2]), mask_of([3])]
    with pytest.raises(InputError):
        Graph(2, [(0, 0)])  # loop
    with pytest.raises(InputError):
        Graph(2, [(0, 2)])  # out of range
    with pytest.raises(InputError):
        Graph(0, [])


def test_components_on_induced_submask():
    g = path_graph(5)
    comps = g.components(mask_of([0, 1, 3, 4]))
    assert sorted(comps) == [mask_of([0, 1]), mask_of([3, 4])]
    assert g.components(0) == []


def test_crossing_edges_counts():
    g = complete_graph(4)
    assert g.crossing_edges(mask_of([0, 1]), mask_of([2, 3])) == 4
    assert g.crossing_edges(mask_of([0]), mask_of([1, 2, 3])) == 3
    assert g.crossing_edges(0, g.full_mask) == 0


# ------------------------------------------------------- vertex universes


def test_vertex_universe_rejects_crossing_payload():
    g = path_graph(3)
    uni = build_vertex_universe(g, 2)
    with pytest.raises(SeparationError):
        uni.sep([0], [1, 2])  # edge 0-1 crosses
    with pytest.raises(SeparationError):
        uni.sep([0], [2])  # does not cover V


def test_k2_universe_contents_frozen():
    # Derived by hand and confirmed by the enumerator: with separator bound 3
    # on a single edge, every side pair works except splitting the edge.
    g = Graph(2, [(0, 1)])
    uni = build_vertex_universe(g, 3)
    got = {s.payload for s in uni.base_elements()}
    v = 0b11
    expected = set()
    for a, b in itertools.product(range(4), repeat=2):
        if a | b == v and not (a == 0b01 and b == 0b10) and not (
                a == 0b10 and b == 0b01):
            expected.add((a, b))
    assert got == expected
    assert (0b01, 0b10) not in got


def test_edgeless_pair_is_a_separation():
    g = Graph(2, [])
    uni = build_vertex_universe(g, 1)
    s = uni.sep([0], [1])
    assert s.payload == (0b01, 0b10)
    assert s.inverse.payload == (0b10, 0b01)


def test_universe_closed_under_join_meet():
    rng = random.Random(99)
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    uni = build_vertex_universe(g, 3)
    base = uni.base_elements()
    for _ in range(3_000):
        r, s = rng.choice(base), rng.choice(base)
        j = uni.join(r, s)
        m = uni.meet(r, s)
        ra, rb = r.payload
        sa, sb = s.payload
        assert j.payload == (ra | sa, rb & sb)
        assert m.payload == (ra & sa, rb | sb)


def test_bipartition_universe_contents():
    uni = build_bipartition_universe(3)
    got = {s.payload for s in uni.base_elements()}
    assert len(got) == 8
    for a, b in got:
        assert a & b == 0 and a | b == 0b111
    with pytest.raises(SeparationError):
        uni.sep_from_masks(0b011, 0b110)


# --------------------------------------------------------- order functions


def order_corpus():
    g1 = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
    g2 = complete_graph(4)
    out = []
    for g in (g1, g2):
        uni = build_vertex_universe(g, g.n)
        out.append((uni, separator_size_order()))
    for g in (g1, g2):
        uni = build_bipartition_universe(g.n)
        out.append((uni, crossing_edge_order(g)))
        out.append((uni, cut_rank_order(g)))
    mat = graphic_matroid(path_graph(4))
    out.append((build_bipartition_universe(mat.m), matroid_order(mat)))
    return out


def test_orders_are_symmetric():
    for uni, ordf in order_corpus():
        for s in uni.base_elements():
            assert ordf(s) == ordf(s.inverse)


def test_orders_are_submodular():
    rng = random.Random(4242)
    for uni, ordf in order_corpus():
        base = uni.base_elements()
        pairs = []
        if len(base) <= 70:
            pairs = list(itertools.product(base, repeat=2))
        else:
            pairs = [(rng.choice(base), rng.choice(base))
                     for _ in range(2_500)]
        for r, s in pairs:
            lhs = ordf(uni.join(r, s)) + ordf(uni.meet(r, s))
            assert lhs <= ordf(r) + ordf(s)


def test_separator_size_examples():
    g = path_graph(4)
    uni = build_vertex_universe(g, 4)
    ordf = separator_size_order()
    assert ordf(uni.sep([0, 1], [1, 2, 3])) == 1
    assert ordf(uni.sep_from_masks(0, g.full_mask)) == 0
    assert ordf.name == "separator_size"


def test_crossing_edge_examples():
    g = complete_graph(4)
    uni = build_bipartition_universe(4)
    ordf = crossing_edge_order(g)
    assert ordf(uni.sep_from_masks(mask_of([0, 1]), mask_of([2, 3]))) == 4
    assert ordf(uni.sep_from_masks(0, g.full_mask)) == 0


def brute_cut_rank(g: Graph, x_mask: int) -> int:
    """Row reduction written out locally, independent of gf2_rank."""
    y = g.full_mask & ~x_mask
    rows = []
    for v in bits_of(x_mask):
        row = [(g.adj[v] >> u) & 1 for u in bits_of(y)]
        rows.append(row)
    rank = 0
    cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                rows[i] = [(a + b) % 2 for a, b in zip(rows[i], rows[r])]
        r += 1
        rank += 1
    return rank


def test_cut_rank_p4_frozen():
    # Derived: on the path 0-1-2-3, the side {0,1} sees only vertex 2, so the
    # adjacency block has a single nonzero row.
    g = path_graph(4)
    uni = build_bipartition_universe(4)
    ordf = cut_rank_order(g)
    s = uni.sep_from_masks(mask_of([0, 1]), mask_of([2, 3]))
    assert ordf(s) == 1
    assert brute_cut_rank(g, mask_of([0, 1])) == 1


def test_cut_rank_matches_local_elimination():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3)])
    uni = build_bipartition_universe(5)
    ordf = cut_rank_order(g)
    for s in uni.base_elements():
        assert ordf(s) == brute_cut_rank(g, s.payload[0])


def test_gf2_rank_small_cases():
    assert gf2_rank([]) == 0
    assert gf2_rank([0b101, 0b101, 0b010]) == 2
    assert gf2_rank([0b1, 0b10, 0b100]) == 3


# ---------------------------------------------------------------- matroids


def brute_graphic_rank(g: Graph, edge_mask: int) -> int:
    """Largest acyclic edge subset, by exhaustive search with DFS cycle test."""
    chosen = [g.edges[i] for i in bits_of(edge_mask)]
    best = 0
    for size in range(len(chosen), -1, -1):
        for combo in itertools.combinations(chosen, size):
            adj = {v: [] for e in combo for v in e}
            for u, v in combo:
                adj[u].append(v)
                adj[v].append(u)
            seen = set()
            acyclic = True
            for start in adj:
                if start in seen:
                    continue
                stack = [(start, None)]
                seen.add(start)
                while stack and acyclic:
                    node, parent = stack.pop()
                    skipped_parent = False
                    for nxt in adj[node]:
                        if nxt == parent and not skipped_parent:
                            skipped_parent = True
                            continue
                        if nxt in seen:
                            acyclic = False
                            break
                        seen.add(nxt)
                        stack.append((nxt, node))
            if acyclic:
                return size
    return best


def test_graphic_matroid_rank_matches_bruteforce():
    for g in [complete_graph(4), path_graph(5),
              Graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)])]:
        mat = graphic_matroid(g)
        for edge_mask in range(1 << mat.m):
            assert mat.rank(edge_mask) == brute_graphic_rank(g, edge_mask)


def test_matroid_connectivity_triangle_edge():
    # Derived: for the cycle matroid of K_3 and a single edge e,
    # r({e}) + r(E - e) - r(E) = 1 + 2 - 2 = 1.
    m = graphic_matroid(complete_graph(3))
    assert m.total_rank == 2
    assert m.connectivity(0b001) == 1
    assert m.connectivity(0) == 0
    assert m.connectivity(0b111) == 0


def test_matroid_rank_axioms_random():
    rng = random.Random(11)
    mats = [
        graphic_matroid(complete_graph(4)),
        linear_gf2_matroid(["110", "101"]),
        linear_gf2_matroid(["1111", "0110", "1010"]),
    ]
    for m in mats:
        full = (1 << m.m) - 1
        assert m.rank(0) == 0
        for _ in range(400):
            x = rng.randrange(1 << m.m)
            y = rng.randrange(1 << m.m)
            rx, ry = m.rank(x), m.rank(y)
            assert 0 <= rx <= bin(x).count("1")
            if x & y == x:
                assert rx <= ry  # monotone
            assert m.rank(x | y) + m.rank(x & y) <= rx + ry  # submodular
        assert m.rank(full) == m.total_rank


def test_linear_gf2_matroid_columns():
    # Columns (1,1), (1,0), (0,1): uniform U_{2,3}.
    m = linear_gf2_matroid(["011", "101"])
    assert m.m == 3
    assert m.total_rank == 2
    for e in range(3):
        assert m.rank(1 << e) == 1
        assert m.connectivity(1 << e) == 1
    for pair in (0b011, 0b101, 0b110):
        assert m.rank(pair) == 2


def test_matroid_order_function():
    m = graphic_matroid(complete_graph(3))
    uni = build_bipartition_universe(3)
    ordf = matroid_order(m)
    assert ordf(uni.sep_from_masks(0b001, 0b110)) == 1
    assert ordf(uni.sep_from_masks(0, 0b111)) == 0
    assert ordf.name == "matroid_connectivity"


# --------------------------------------------------------------- ingestion


def test_graph_json_roundtrip():
    g = Graph(4, [(0, 1), (2, 3)])
    d = g.to_json_dict()
    assert d == {"vertices": 4, "edges": [[0, 1], [2, 3]]}
    assert graph_from_json_dict(d).edges == g.edges
    with pytest.raises(InputError):
        graph_from_json_dict({"edges": []})
    with pytest.raises(InputError):
        graph_from_json_dict({"vertices": 3, "edges": [[0]]})
    with pytest.raises(InputError):
        graph_from_json_dict({"vertices": "three", "edges": []})


def test_dimacs_parsing():
    text = "c a comment\np edge 4 3\ne 1 2\ne 2 3\ne 3 4\n"
    g = graph_from_dimacs(text)
    assert g.n == 4
    assert g.edges == ((0, 1), (1, 2), (2, 3))
    with pytest.raises(InputError):
        graph_from_dimacs("e 1 2\n")  # edge before header
    with pytest.raises(InputError):
        graph_from_dimacs("p edge 2 1\ne 1 5\n")
    with pytest.raises(InputError):
        graph_from_dimacs("p edge 0 0\n")


def test_matroid_json():
    m = matroid_from_json_dict(
        {"type": "graphic",
         "graph": {"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}})
    assert m.kind == "graphic"
    assert m.m == 3 and m.total_rank == 2
    m2 = matroid_from_json_dict({"type": "linear_gf2",
                                 "rows": ["011", "101"]})
    assert m2.m == 3 and m2.total_rank == 2
    with pytest.raises(InputError):
        matroid_from_json_dict({"type": "transversal"})
    with pytest.raises(InputError):
        matroid_from_json_dict({"type": "linear_gf2", "rows": ["01", "0a"]})


# -------------------------------------------------------------------- caps


def test_vertex_cap_enforced(monkeypatch):
    monkeypatch.delenv("WDK_CAP_VERTICES", raising=False)
    big = Graph(13, [])
    with pytest.raises(CapExceeded):
        build_vertex_universe(big, 2)
    monkeypatch.setenv("WDK_CAP_VERTICES", "13")
    uni = build_vertex_universe(big, 1)
    assert len(uni.base_elements()) > 0


def test_ground_cap_enforced(monkeypatch):
    monkeypatch.delenv("WDK_CAP_VERTICES", raising=False)
    with pytest.raises(CapExceeded):
        build_bipartition_universe(17)
