"""Immutable undirected graphs and the gadget generators used by the package.

Vertices are always ``0..n-1``; edges are unordered pairs stored as sorted
tuples in lexicographic order, which makes every construction reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

Edge = tuple[int, int]


class Graph:
    """Simple undirected graph, immutable after construction.

    Rejects self-loops, duplicate edges and out-of-range endpoints. Edges are
    normalized to ``u < v`` and kept sorted.
    """

    __slots__ = ("n", "edges", "name", "_adj", "_hash")

    def __init__(self, n: int, edges: Iterable[Edge], name: str = ""):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = []
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            norm.append((u, v) if u < v else (v, u))
        norm.sort()
        for i in range(1, len(norm)):
            if norm[i] == norm[i - 1]:
                raise ValueError(f"duplicate edge {norm[i]}")
        self.n = n
        self.edges = tuple(norm)
        self.name = name
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(nb)) for nb in adj)
        self._hash = hash((self.n, self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(nb) for nb in self._adj]

    def max_degree(self) -> int:
        return max((len(nb) for nb in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def connected_components(self) -> list[list[int]]:
        """Components as sorted vertex lists, ordered by smallest vertex."""
        seen = [False] * self.n
        comps = []
        for start in range(self.n):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n == 0 or len(self.connected_components()) == 1

    def induced_subgraph(self, vertices: Sequence[int], name: str = "") -> tuple["Graph", list[int]]:
        """Induced subgraph plus the list mapping new indices to old ones."""
        keep = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(keep)}
        edges = [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        return Graph(len(keep), edges, name=name or self.name), keep

    def delete_vertex(self, v: int) -> "Graph":
        g, _ = self.induced_subgraph(
            [u for u in range(self.n) if u != v], name=f"{self.name}-v{v}"
        )
        return g

    def relabel(self, perm: Sequence[int], name: str = "") -> "Graph":
        """Apply ``old vertex i -> perm[i]``; perm must be a permutation."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm is not a permutation of the vertices")
        return Graph(self.n, [(perm[u], perm[v]) for u, v in self.edges],
                     name=name or self.name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Graph({label} n={self.n}, m={self.m})"


@dataclass(frozen=True)
class LineGraphAnnotation:
    """Provenance of line-graph nodes plus optional structural roles.

    ``base_edge_of_node[i]`` is the base-graph edge that node ``i`` stands
    for (a bijection). ``special_nodes`` and ``connecting_triangles`` are
    empty unless the line graph was produced by :func:`linehom.product.build_gnd`.
    """

    base_edge_of_node: tuple[Edge, ...]
    special_nodes: tuple[int, ...] = ()
    connecting_triangles: tuple[tuple[int, int, int], ...] = ()

    @cached_property
    def node_of_edge(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.base_edge_of_node)}

    @cached_property
    def triangle_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(t) for t in self.connecting_triangles)


def line_graph(g: Graph) -> tuple[Graph, LineGraphAnnotation]:
    """Line graph of ``g``: one node per edge, adjacent iff the edges meet.

    Node ``i`` corresponds to ``g.edges[i]``; the node count is ``g.m`` and
    the edge count is ``sum(C(deg(v), 2))`` since two distinct edges of a
    simple graph share at most one endpoint.
    """
    index = {e: i for i, e in enumerate(g.edges)}
    incident: list[list[int]] = [[] for _ in range(g.n)]
    for e in g.edges:
        u, v = e
        incident[u].append(index[e])
        incident[v].append(index[e])
    ledges = []
    for v in range(g.n):
        for i, j in combinations(incident[v], 2):
            ledges.append((i, j) if i < j else (j, i))
    lname = f"L({g.name})" if g.name else ""
    return Graph(g.m, ledges, name=lname), LineGraphAnnotation(base_edge_of_node=g.edges)


def validate_annotation(lg: Graph, ann: LineGraphAnnotation) -> None:
    """Raise ValueError when the annotation does not fit the line graph."""
    if len(ann.base_edge_of_node) != lg.n:
        raise ValueError("base-edge map is not a bijection with the nodes")
    if len(set(ann.base_edge_of_node)) != lg.n:
        raise ValueError("base-edge map repeats an edge")
    for node in ann.special_nodes:
        if not 0 <= node < lg.n:
            raise ValueError(f"special node {node} out of range")
    special = set(ann.special_nodes)
    for tri in ann.connecting_triangles:
        a, b, c = tri
        if not (lg.has_edge(a, b) and lg.has_edge(a, c) and lg.has_edge(b, c)):
            raise ValueError(f"{tri} is not a triangle in the line graph")
        if special & set(tri):
            raise ValueError(f"triangle {tri} touches a special node")


# ---------------------------------------------------------------------------
# generators


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs at least one vertex")
    return Graph(n, list(combinations(range(n), 2)), name=f"K{n}")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs at least one vertex")
    return Graph(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def star_graph(k: int) -> Graph:
    """Star with center 0 and k leaves."""
    if k < 1:
        raise ValueError("star needs at least one leaf")
    return Graph(k + 1, [(0, i) for i in range(1, k + 1)], name=f"K1_{k}")


def petersen_graph() -> Graph:
    edges = [(i, (i + 1) % 5) for i in range(5)]
    edges += [(i, i + 5) for i in range(5)]
    edges += [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, edges, name="Petersen")


def sunlet(n: int) -> Graph:
    """Cycle ``0..n-1`` with one pendant per cycle vertex; pendant of i is n+i."""
    if n < 3:
        raise ValueError("sunlet needs a cycle of length at least 3")
    edges = [(i, (i + 1) % n) for i in range(n)]
    edges += [(i, n + i) for i in range(n)]
    return Graph(2 * n, edges, name=f"S{n}")


def dragon(d: int) -> Graph:
    """Near-complete graph on d+2 vertices with one subdivided edge.

    Vertices ``0..d`` carry every edge of a (d+1)-clique except ``{0, d}``;
    vertex ``d+1`` is adjacent to exactly 0 and d. All vertices have degree d
    except ``d+1``, which has degree 2.
    """
    if d < 3:
        raise ValueError("dragon is only defined for d >= 3")
    edges = [e for e in combinations(range(d + 1), 2) if e != (0, d)]
    edges += [(0, d + 1), (d, d + 1)]
    return Graph(d + 2, edges, name=f"D{d}")


def indicator(d: int) -> tuple[Graph, int, int]:
    """Swap-symmetric gadget: dragon plus a path a-c-b hooked to its degree-2 vertex.

    Layout: dragon on ``0..d+1``, then ``a = d+2``, ``c = d+3``, ``b = d+4``;
    ``c`` is joined to the dragon's degree-2 vertex ``d+1``. Returns the graph
    and the distinguished pair ``(a, b)``; transposing a and b is an
    automorphism, as required for edge substitution.
    """
    if d < 3:
        raise ValueError("indicator is only defined for d >= 3")
    base = dragon(d)
    a, c, b = d + 2, d + 3, d + 4
    edges = list(base.edges) + [(a, c), (c, b), (d + 1, c)]
    return Graph(d + 5, edges, name=f"I{d}"), a, b


def disjoint_union(graphs: Sequence[Graph], name: str = "") -> Graph:
    """Concatenate vertex sets with index offsets; components stay recoverable
    through ``connected_components`` (inputs are placed in order)."""
    edges: list[Edge] = []
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges)
        offset += g.n
    if not name:
        name = "+".join(g.name for g in graphs if g.name)
    return Graph(offset, edges, name=name)


def random_graph(n: int, p: float, rng) -> Graph:
    """Erdos-Renyi style sample; deterministic given the rng state."""
    edges = [e for e in combinations(range(n), 2) if rng.random() < p]
    return Graph(n, edges, name=f"rand{n}")


# ---------------------------------------------------------------------------
# clique structure (used by the solver's domain filter and for pinning)


def _extend_clique(adj: list[set[int]], current: list[int], cands: set[int],
                   best: list[int]) -> None:
    if len(current) > len(best):
        best[:] = current
    while cands:
        if len(current) + len(cands) <= len(best):
            return
        v = min(cands)
        cands = cands - {v}
        current.append(v)
        _extend_clique(adj, current, cands & adj[v], best)
        current.pop()


def max_clique(g: Graph) -> tuple[int, ...]:
    """A maximum clique, deterministic (smallest-vertex-first branching)."""
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    best: list[int] = []
    _extend_clique(adj, [], set(range(g.n)), best)
    return tuple(sorted(best))


def vertex_clique_numbers(g: Graph) -> list[int]:
    """For each vertex, the size of the largest clique containing it."""
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    out = []
    for v in range(g.n):
        best: list[int] = []
        _extend_clique(adj, [v], adj[v], best)
        out.append(len(best))
    return out
