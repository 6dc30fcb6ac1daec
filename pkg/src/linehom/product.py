"""Edge-gadget substitution: replace every edge of a base graph by a copy of a
two-terminal gadget, and build the annotated cyclic family generated from
sunlets and indicators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .graphs import (
    Edge,
    Graph,
    LineGraphAnnotation,
    indicator,
    line_graph,
    sunlet,
    validate_annotation,
)


def _transposition_swaps(g: Graph, a: int, b: int) -> bool:
    perm = list(range(g.n))
    perm[a], perm[b] = b, a
    swapped = {(min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges}
    return swapped == set(g.edges)


def has_swap_automorphism(g: Graph, a: int, b: int) -> bool:
    """True iff some automorphism of ``g`` exchanges ``a`` and ``b``.

    The bare transposition settles the gadgets built here; a small
    backtracking search covers the general case.
    """
    if _transposition_swaps(g, a, b):
        return True
    deg = g.degrees()
    if deg[a] != deg[b]:
        return False
    image = [-1] * g.n
    used = [False] * g.n
    image[a], image[b] = b, a
    used[b] = used[a] = True
    rest = [v for v in range(g.n) if v not in (a, b)]

    def consistent(v: int, w: int) -> bool:
        if deg[v] != deg[w]:
            return False
        for u in g.neighbors(v):
            if image[u] != -1 and not g.has_edge(image[u], w):
                return False
        return True

    def place(i: int) -> bool:
        if i == len(rest):
            return True
        v = rest[i]
        for w in range(g.n):
            if not used[w] and consistent(v, w):
                image[v] = w
                used[w] = True
                if place(i + 1):
                    return True
                image[v] = -1
                used[w] = False
        return False

    return place(0)


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


@dataclass(frozen=True)
class IndicatorProduct:
    """Result of substituting a gadget for every base edge, plus provenance.

    Vertex indexing of ``graph``: base vertices keep their indices ``0..n-1``
    (isolated ones included); the interior gadget vertices of the k-th
    directed base edge follow in blocks of ``len(interior)``.
    ``edge_origin[i]`` records, for ``graph.edges[i]``, the pair
    ``(k, gadget edge)`` it came from.
    """

    graph: Graph
    base: Graph
    gadget: Graph
    a: int
    b: int
    arcs: tuple[Edge, ...]
    interior: tuple[int, ...]
    edge_origin: tuple[tuple[int, Edge], ...]

    @cached_property
    def _interior_rank(self) -> dict[int, int]:
        return {w: j for j, w in enumerate(self.interior)}

    def product_vertex(self, k: int, w: int) -> int:
        """Vertex of ``graph`` for gadget vertex ``w`` inside copy ``k``."""
        tail, head = self.arcs[k]
        if w == self.a:
            return tail
        if w == self.b:
            return head
        return self.base.n + k * len(self.interior) + self._interior_rank[w]

    @cached_property
    def arc_index(self) -> dict[Edge, int]:
        return {arc: k for k, arc in enumerate(self.arcs)}


def indicator_product_detail(base: Graph, gadget: Graph, a: int, b: int,
                             check_symmetry: bool = True) -> IndicatorProduct:
    """Quotient construction with full provenance.

    Each base edge is oriented tail -> head (lower -> higher index) and gets
    its own gadget copy; ``a`` copies are glued at tails, ``b`` copies at
    heads, and the b of one arc meets the a of the next at their shared base
    vertex. The gluing is carried out with a union-find over
    (arc, gadget-vertex) slots, one union per generating identification.
    """
    if a == b:
        raise ValueError("distinguished vertices must differ")
    for v in (a, b):
        if not 0 <= v < gadget.n:
            raise ValueError(f"distinguished vertex {v} out of range")
    if base.m == 0:
        raise ValueError("base graph needs at least one edge")
    if check_symmetry and not has_swap_automorphism(gadget, a, b):
        raise ValueError("gadget has no automorphism exchanging a and b")

    arcs = base.edges
    ni = gadget.n

    def slot(k: int, w: int) -> int:
        return k * ni + w

    uf = _UnionFind(len(arcs) * ni)
    first_at: list[int] = [-1] * base.n
    for k, (tail, head) in enumerate(arcs):
        for vertex, w in ((tail, a), (head, b)):
            if first_at[vertex] == -1:
                first_at[vertex] = slot(k, w)
            else:
                uf.union(first_at[vertex], slot(k, w))

    interior = tuple(w for w in range(ni) if w not in (a, b))
    rank = {w: j for j, w in enumerate(interior)}
    n_out = base.n + len(arcs) * len(interior)

    vertex_of: dict[int, int] = {}
    for k, (tail, head) in enumerate(arcs):
        for w in range(ni):
            root = uf.find(slot(k, w))
            canon = tail if w == a else head if w == b else base.n + k * len(interior) + rank[w]
            prev = vertex_of.setdefault(root, canon)
            if prev != canon:
                raise AssertionError("quotient classes collapsed inconsistently")

    edges: list[Edge] = []
    origins: dict[Edge, tuple[int, Edge]] = {}
    for k in range(len(arcs)):
        for p, q in gadget.edges:
            u = vertex_of[uf.find(slot(k, p))]
            v = vertex_of[uf.find(slot(k, q))]
            e = (u, v) if u < v else (v, u)
            edges.append(e)
            origins[e] = (k, (p, q))

    name = f"{base.name}*{gadget.name}" if base.name and gadget.name else ""
    graph = Graph(n_out, edges, name=name)
    origin_list = tuple(origins[e] for e in graph.edges)
    return IndicatorProduct(graph=graph, base=base, gadget=gadget, a=a, b=b,
                            arcs=arcs, interior=interior, edge_origin=origin_list)


def indicator_product(base: Graph, gadget: Graph, a: int, b: int,
                      check_symmetry: bool = True) -> Graph:
    """Graph with every base edge replaced by a copy of ``gadget``; the
    distinguished vertices a, b are identified with the edge endpoints."""
    return indicator_product_detail(base, gadget, a, b, check_symmetry).graph


@dataclass(frozen=True)
class GndBuild:
    """A sunlet-times-indicator graph with its annotated line graph."""

    n: int
    d: int
    graph: Graph
    line: Graph
    annotation: LineGraphAnnotation
    product: IndicatorProduct


def build_gnd(n: int, d: int) -> GndBuild:
    """Member (n, d) of the cyclic family: ``sunlet(n)`` with every edge
    replaced by ``indicator(d)``, plus the roles on its line graph.

    Special nodes correspond to the connector edge between each indicator
    copy's middle path vertex and its dragon (2n of them). Connecting
    triangles are the edge triples at the degree-3 sunlet vertices (n of
    them). Roles are derived from the product provenance, not by pattern
    matching the final graph.
    """
    base = sunlet(n)
    gadget, a, b = indicator(d)

    # structural landmarks inside the gadget: c is the common neighbor of the
    # distinguished pair; the dragon attaches to c's remaining neighbor
    common = set(gadget.neighbors(a)) & set(gadget.neighbors(b))
    if len(common) != 1:
        raise AssertionError("gadget middle vertex is not unique")
    c = common.pop()
    hook = [w for w in gadget.neighbors(c) if w not in (a, b)]
    if len(hook) != 1:
        raise AssertionError("gadget connector edge is not unique")
    deg2 = hook[0]

    prod = indicator_product_detail(base, gadget, a, b, check_symmetry=False)
    lg, raw = line_graph(prod.graph)
    lg = Graph(lg.n, lg.edges, name=f"L(G({n},{d}))")
    node_of = raw.node_of_edge

    special = []
    for k in range(len(prod.arcs)):
        u = prod.product_vertex(k, c)
        v = prod.product_vertex(k, deg2)
        special.append(node_of[(u, v) if u < v else (v, u)])
    special.sort()

    triangles = []
    for vtx in range(n):  # degree-3 sunlet vertices are the cycle vertices
        nodes = []
        for k, (tail, head) in enumerate(prod.arcs):
            if vtx in (tail, head):
                u = prod.product_vertex(k, c)
                nodes.append(node_of[(vtx, u) if vtx < u else (u, vtx)])
        if len(nodes) != 3:
            raise AssertionError("cycle vertex is not on exactly 3 base edges")
        triangles.append(tuple(sorted(nodes)))
    triangles.sort()

    ann = LineGraphAnnotation(
        base_edge_of_node=raw.base_edge_of_node,
        special_nodes=tuple(special),
        connecting_triangles=tuple(triangles),
    )
    validate_annotation(lg, ann)
    gname = f"G({n},{d})"
    graph = Graph(prod.graph.n, prod.graph.edges, name=gname)
    prod = IndicatorProduct(graph=graph, base=prod.base, gadget=prod.gadget,
                            a=prod.a, b=prod.b, arcs=prod.arcs,
                            interior=prod.interior, edge_origin=prod.edge_origin)
    return GndBuild(n=n, d=d, graph=graph, line=lg, annotation=ann, product=prod)
