"""Concrete ground structures and their separation universes.

Two universe families cover every solver mode:

* vertex separations of a graph: payloads (A, B) with A u B = V and no edge
  between A\\B and B\\A.  Enumerated by choosing the separator X = A n B and
  sending each component of G - X wholly to one side, for all |X| below the
  requested cap.  Joins/meets of enumerated separations are again vertex
  separations and are interned on demand even when their order exceeds the
  cap (the universe is closed; order restriction happens at system level).

* bipartitions of a finite ground set: payloads (X, E\\X).  Used for
  carving-type and rank-type parameters (ground set = vertices) and for
  matroid decompositions (ground set = matroid elements).

Order functions live here too: separator size, crossing-edge count, GF(2)
cut rank, and matroid connectivity.  All are symmetric and submodular, which
the test suite checks both exhaustively (small) and on seeded random pairs.

Graphs are simple and undirected with vertices 0..n-1, stored as adjacency
bitmasks.  Matroids come as graphic (cycle matroid of a graph; elements are
edge indices in sorted order) or as binary column spaces over GF(2).
"""

from __future__ import annotations

import os

from .separations import (
    SeparationError,
    SepUniverse,
    bits_of,
    mask_of,
    popcount,
)

DEFAULT_VERTEX_CAP = 12
DEFAULT_GROUND_CAP = 16
CAP_ENV = "WDK_CAP_VERTICES"


class CapExceeded(SeparationError):
    """Instance larger than the configured enumeration cap."""


class InputError(Exception):
    """Malformed instance file or instance payload."""


def vertex_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_VERTEX_CAP
    try:
        return int(raw)
    except ValueError:
        raise InputError("%s must be an integer, got %r" % (CAP_ENV, raw))


def ground_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_GROUND_CAP
    try:
        return max(int(raw), DEFAULT_GROUND_CAP)
    except ValueError:
        raise InputError("%s must be an integer, got %r" % (CAP_ENV, raw))


class Graph:
    """Simple undirected graph on vertices 0..n-1, adjacency as bitmasks."""

    def __init__(self, n: int, edges):
        if n < 1:
            raise InputError("graphs must have at least one vertex")
        self.n = n
        seen = set()
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError("edge (%r,%r) out of range for n=%d" % (u, v, n))
            if u == v:
                raise InputError("loops are not supported: (%r,%r)" % (u, v))
            e = (min(u, v), max(u, v))
            if e in seen:
                continue
            seen.add(e)
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        self.adj: tuple[int, ...] = tuple(adj)
        self.full_mask = (1 << n) - 1

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors_mask(self, vertex_mask: int) -> int:
        out = 0
        rest = vertex_mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            out |= self.adj[v]
            rest &= rest - 1
        return out & ~vertex_mask

    def components(self, sub_mask: int) -> list[int]:
        """Connected components of the subgraph induced on sub_mask."""
        comps = []
        rest = sub_mask
        while rest:
            start = rest & -rest
            comp = start
            frontier = start
            while frontier:
                grow = 0
                f = frontier
                while f:
                    v = (f & -f).bit_length() - 1
                    grow |= self.adj[v]
                    f &= f - 1
                grow &= sub_mask & ~comp
                comp |= grow
                frontier = grow
            comps.append(comp)
            rest &= ~comp
        return comps

    def crossing_edges(self, a_mask: int, b_mask: int) -> int:
        count = 0
        rest = a_mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            count += popcount(self.adj[v] & b_mask)
            rest &= rest - 1
        return count

    def isolated_mask(self) -> int:
        m = 0
        for v in range(self.n):
            if self.adj[v] == 0:
                m |= 1 << v
        return m

    def to_json_dict(self) -> dict:
        return {"vertices": self.n, "edges": [list(e) for e in self.edges]}

    def __repr__(self):
        return "Graph(n=%d, m=%d)" % (self.n, self.m)


def graph_from_json_dict(data) -> Graph:
    if not isinstance(data, dict):
        raise InputError("graph JSON must be an object")
    try:
        n = data["vertices"]
        edges = data["edges"]
    except (KeyError, TypeError):
        raise InputError("graph JSON needs 'vertices' and 'edges'")
    if not isinstance(n, int):
        raise InputError("'vertices' must be an integer")
    try:
        pairs = [(int(u), int(v)) for u, v in edges]
    except (TypeError, ValueError):
        raise InputError("'edges' must be a list of [u, v] pairs")
    return Graph(n, pairs)


def graph_from_dimacs(text: str) -> Graph:
    """DIMACS-like: 'p edge n m' then 'e u v' lines, vertices 1-based."""
    n = None
    edges = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "edge":
                raise InputError("line %d: expected 'p edge n m'" % ln)
            n = int(parts[2])
        elif parts[0] == "e":
            if n is None:
                raise InputError("line %d: 'e' before 'p' header" % ln)
            if len(parts) != 3:
                raise InputError("line %d: expected 'e u v'" % ln)
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            edges.append((u, v))
        else:
            raise InputError("line %d: unknown record %r" % (ln, parts[0]))
    if n is None:
        raise InputError("missing 'p edge' header")
    return Graph(n, edges)


class VertexSepUniverse(SepUniverse):
    """Vertex separations (A, B) of a graph: A u B = V, no crossing edge."""

    def __init__(self, graph: Graph, order_cap: int):
        super().__init__(graph.n)
        self.graph = graph
        self.order_cap = order_cap

    def _check_payload(self, a_mask: int, b_mask: int) -> None:
        if (a_mask | b_mask) != self.full_mask:
            raise SeparationError("sides must cover the vertex set")
        if self.graph.crossing_edges(a_mask & ~b_mask, b_mask & ~a_mask):
            raise SeparationError("an edge crosses the separation")


def build_vertex_universe(graph: Graph, order_cap: int) -> VertexSepUniverse:
    """Materialize all vertex separations with separator size < order_cap."""
    cap = vertex_cap()
    if graph.n > cap:
        raise CapExceeded(
            "graph has %d vertices, cap is %d (override with %s)"
            % (graph.n, cap, CAP_ENV)
        )
    if order_cap < 1:
        raise SeparationError("order cap must be positive")
    uni = VertexSepUniverse(graph, order_cap)
    full = graph.full_mask
    for x_mask in range(full + 1):
        if popcount(x_mask) >= order_cap:
            continue
        comps = graph.components(full & ~x_mask)
        # Each component goes wholly to one side; 2^c assignments.
        for pick in range(1 << len(comps)):
            a, b = x_mask, x_mask
            for i, comp in enumerate(comps):
                if pick >> i & 1:
                    a |= comp
                else:
                    b |= comp
            uni._intern(a, b)
    uni.seal_base()
    return uni


class BipartitionUniverse(SepUniverse):
    """All bipartitions (X, E\\X) of a ground set of size n."""

    def __init__(self, n_ground: int, order_cap: int | None = None):
        super().__init__(n_ground)
        self.order_cap = order_cap  # None: every bipartition is materialized

    def _check_payload(self, a_mask: int, b_mask: int) -> None:
        if (a_mask | b_mask) != self.full_mask or (a_mask & b_mask) != 0:
            raise SeparationError("payload must bipartition the ground set")


def build_bipartition_universe(n_ground: int) -> BipartitionUniverse:
    cap = ground_cap()
    if n_ground > cap:
        raise CapExceeded(
            "ground set has %d elements, cap is %d" % (n_ground, cap))
    if n_ground < 1:
        raise InputError("ground set must be non-empty")
    uni = BipartitionUniverse(n_ground)
    full = uni.full_mask
    for x in range(full + 1):
        uni._intern(x, full & ~x)
    uni.seal_base()
    return uni


class OrderFunction:
    """Symmetric submodular cost of a separation, computed from payloads."""

    def __init__(self, name: str, fn):
        self.name = name
        self._fn = fn

    def __call__(self, sep) -> int:
        return self._fn(sep.payload)

    def of_masks(self, a_mask: int, b_mask: int) -> int:
        return self._fn((a_mask, b_mask))

    def __repr__(self):
        return "OrderFunction(%s)" % self.name


def separator_size_order() -> OrderFunction:
    """|A n B| for vertex separations."""
    return OrderFunction("separator_size", lambda p: popcount(p[0] & p[1]))


def crossing_edge_order(graph: Graph) -> OrderFunction:
    """Number of edges across a vertex bipartition."""

    def fn(payload):
        a, b = payload
        return graph.crossing_edges(a, b)

    return OrderFunction("crossing_edges", fn)


def cut_rank_order(graph: Graph) -> OrderFunction:
    """GF(2) rank of the X-vs-complement adjacency submatrix."""
    cache: dict[int, int] = {}

    def fn(payload):
        x, y = payload
        key = min(x, y)  # rank is symmetric under complementation
        got = cache.get(key)
        if got is not None:
            return got
        rows = []
        rest = key
        other = graph.full_mask & ~key
        while rest:
            v = (rest & -rest).bit_length() - 1
            row = graph.adj[v] & other
            if row:
                rows.append(row)
            rest &= rest - 1
        rank = gf2_rank(rows)
        cache[key] = rank
        return rank

    return OrderFunction("cut_rank", fn)


def gf2_rank(rows) -> int:
    """Rank over GF(2) of rows given as bitmask integers."""
    basis = []
    rank = 0
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
            rank += 1
    return rank


class Matroid:
    """Rank oracle over ground elements 0..m-1 with memoized subsets."""

    def __init__(self, kind: str, rank_fn, m: int, label: str = ""):
        self.kind = kind
        self.m = m
        self.label = label
        self.full_mask = (1 << m) - 1
        self._rank_fn = rank_fn
        self._cache: dict[int, int] = {}

    def rank(self, subset_mask: int) -> int:
        got = self._cache.get(subset_mask)
        if got is None:
            got = self._rank_fn(subset_mask)
            self._cache[subset_mask] = got
        return got

    @property
    def total_rank(self) -> int:
        return self.rank(self.full_mask)

    def connectivity(self, x_mask: int) -> int:
        """r(X) + r(E\\X) - r(E); symmetric and submodular."""
        return (
            self.rank(x_mask)
            + self.rank(self.full_mask & ~x_mask)
            - self.total_rank
        )


def graphic_matroid(graph: Graph) -> Matroid:
    """Cycle matroid: elements are edge indices; r(X) = |V(X)| - c(X)."""

    edges = graph.edges

    def rank(subset_mask: int) -> int:
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        r = 0
        rest = subset_mask
        while rest:
            i = (rest & -rest).bit_length() - 1
            u, v = edges[i]
            parent.setdefault(u, u)
            parent.setdefault(v, v)
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
            rest &= rest - 1
        return r

    return Matroid("graphic", rank, len(edges), label="cycle matroid")


def linear_gf2_matroid(rows: list[str]) -> Matroid:
    """Binary matroid from 0/1 row strings; columns are ground elements."""
    if not rows:
        raise InputError("linear matroid needs at least one row")
    width = len(rows[0])
    cols = [0] * width
    for r, row in enumerate(rows):
        if len(row) != width or any(ch not in "01" for ch in row):
            raise InputError("row %d is not a fixed-width 0/1 string" % r)
        for c, ch in enumerate(row):
            if ch == "1":
                cols[c] |= 1 << r

    def rank(subset_mask: int) -> int:
        picked = []
        rest = subset_mask
        while rest:
            c = (rest & -rest).bit_length() - 1
            picked.append(cols[c])
            rest &= rest - 1
        return gf2_rank(picked)

    return Matroid("linear_gf2", rank, width, label="binary matroid")


def matroid_from_json_dict(data) -> Matroid:
    if not isinstance(data, dict) or "type" not in data:
        raise InputError("matroid JSON must be an object with 'type'")
    kind = data["type"]
    if kind == "graphic":
        if "graph" not in data:
            raise InputError("graphic matroid needs 'graph'")
        return graphic_matroid(graph_from_json_dict(data["graph"]))
    if kind == "linear_gf2":
        rows = data.get("rows")
        if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
            raise InputError("linear_gf2 matroid needs 'rows' of 0/1 strings")
        return linear_gf2_matroid(rows)
    raise InputError("unknown matroid type %r" % (kind,))


def matroid_order(matroid: Matroid) -> OrderFunction:
    return OrderFunction(
        "matroid_connectivity", lambda p: matroid.connectivity(p[0]))


__all__ = [
    "CAP_ENV",
    "BipartitionUniverse",
    "CapExceeded",
    "Graph",
    "InputError",
    "Matroid",
    "OrderFunction",
    "VertexSepUniverse",
    "bits_of",
    "build_bipartition_universe",
    "build_vertex_universe",
    "crossing_edge_order",
    "cut_rank_order",
    "gf2_rank",
    "graph_from_dimacs",
    "graph_from_json_dict",
    "graphic_matroid",
    "linear_gf2_matroid",
    "mask_of",
    "matroid_from_json_dict",
    "matroid_order",
    "separator_size_order",
]
