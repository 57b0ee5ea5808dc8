"""Free and wired minimal spanning forests on finite graphs.

On a finite graph the free forest is the minimum spanning forest of the
graph itself; the wired one is the minimum spanning forest of the graph
with its boundary merged into one vertex, pulled back to the original
edges. Every comparison uses the ``(label, edge_id)`` key, so "the
maximum on a cycle" is always a single edge and all forests are unique.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .graphs import Graph, GraphError, contract_boundary
from .labels import Labeling
from .unionfind import UnionFind

BRUTE_FORCE_MAX_VERTICES = 12
BRUTE_FORCE_MAX_EDGES = 25


class MsfError(ValueError):
    pass


@dataclass(frozen=True)
class Forest:
    edge_set: frozenset[int]
    component_of: tuple[int, ...]
    tree_count: int

    @classmethod
    def from_edges(cls, g: Graph, edges: Iterable[int]) -> "Forest":
        edges = frozenset(int(e) for e in edges)
        uf = UnionFind(g.vertex_count)
        for e in edges:
            if not uf.union(*g.edges[e]):
                raise MsfError(f"edge set contains a cycle (closed by edge {e})")
        return cls(edges, tuple(uf.labels()), uf.sets)

    @cached_property
    def trees(self) -> dict[int, list[int]]:
        """Vertices of each tree, keyed by component id."""
        out: dict[int, list[int]] = {}
        for v, c in enumerate(self.component_of):
            out.setdefault(c, []).append(v)
        return out

    def tree_edges(self, g: Graph, tree_id: int) -> frozenset[int]:
        return self.edges_by_tree(g)[tree_id]

    def edges_by_tree(self, g: Graph) -> dict[int, frozenset[int]]:
        """Edge ids of each tree; cached for the most recent host graph."""
        cached = self.__dict__.get("_by_tree")
        if cached is not None and cached[0] is g:
            return cached[1]
        groups: dict[int, set[int]] = {c: set() for c in range(self.tree_count)}
        for e in self.edge_set:
            groups[self.component_of[g.edges[e][0]]].add(e)
        out = {c: frozenset(s) for c, s in groups.items()}
        self.__dict__["_by_tree"] = (g, out)
        return out


@dataclass
class UnionFindTrace:
    """Kruskal merge history: ``(label, edge_id, (root_a, root_b))`` per accepted edge."""

    merges: list[tuple[float, int, tuple[int, int]]] = field(default_factory=list)


def _check_labels(g: Graph, lab: Labeling):
    if len(lab) != g.edge_count:
        raise MsfError(f"labeling has {len(lab)} labels for a graph with {g.edge_count} edges")


def mst_kruskal(g: Graph, lab: Labeling, trace: UnionFindTrace | None = None) -> Forest:
    _check_labels(g, lab)
    n = g.vertex_count
    uf = UnionFind(n)
    edges = g.edges
    chosen = []
    need = n - 1
    for e in lab.order().tolist():
        a, b = edges[e]
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        uf.union(ra, rb)
        chosen.append(e)
        if trace is not None:
            trace.merges.append((lab[e], e, (ra, rb)))
        if len(chosen) == need:
            break
    return Forest(frozenset(chosen), tuple(uf.labels()), uf.sets)


def cycle_max_oracle(g: Graph, lab: Labeling, e: int) -> bool:
    """Whether ``e`` is never the maximum of a cycle through it.

    Equivalent test: the endpoints of ``e`` are not joined by a path of
    edges with strictly smaller key. Answered by a plain search that never
    looks at the global edge order.
    """
    _check_labels(g, lab)
    if not 0 <= e < g.edge_count:
        raise MsfError(f"unknown edge {e}")
    vals = lab.values
    ke = (vals[e], e)
    a, b = g.edges[e]
    seen = {a}
    stack = [a]
    while stack:
        v = stack.pop()
        for f in g.adjacency[v]:
            if (vals[f], f) >= ke:
                continue
            w = g.other_end(f, v)
            if w == b:
                return False
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return True


def wired_msf(g: Graph, lab: Labeling) -> Forest:
    _check_labels(g, lab)
    if not g.boundary:
        raise MsfError("wired forest needs a boundary; use mst_kruskal for the free forest")
    image, cmap = contract_boundary(g)
    back = cmap.image_to_original
    # image ids preserve original id order, so the original tie-break survives
    image_lab = Labeling(lab.values[back], lab.seed, f"contracted {lab.provenance}")
    image_forest = mst_kruskal(image, image_lab)
    return Forest.from_edges(g, (int(back[e]) for e in image_forest.edge_set))


def invasion_tree(g: Graph, lab: Labeling, source: int, stop_at_boundary: bool = False) -> Forest:
    """Prim-style growth from ``source`` along the cheapest frontier edge.

    With ``stop_at_boundary`` the growth halts right after the first
    boundary vertex is absorbed (immediately, if the source is one).
    """
    _check_labels(g, lab)
    if not 0 <= source < g.vertex_count:
        raise MsfError(f"unknown source vertex {source}")
    edges, adj = g.edges, g.adjacency
    vals = lab.values.tolist()
    boundary = g.boundary
    inside = [False] * g.vertex_count
    inside[source] = True
    chosen = []
    if not (stop_at_boundary and source in boundary):
        heap = [(vals[f], f) for f in adj[source]]
        heapq.heapify(heap)
        while heap:
            _, f = heapq.heappop(heap)
            a, b = edges[f]
            if inside[a] and inside[b]:
                continue
            w = b if inside[a] else a
            inside[w] = True
            chosen.append(f)
            if stop_at_boundary and w in boundary:
                break
            for h in adj[w]:
                if not inside[g.other_end(h, w)]:
                    heapq.heappush(heap, (vals[h], h))
    return Forest.from_edges(g, chosen)


def enumerate_spanning_forests(g: Graph) -> Iterator[tuple[int, ...]]:
    """Every maximal acyclic edge set of ``g``, by include/exclude backtracking."""
    m = g.edge_count
    target = g.vertex_count - component_count(g)
    edges = g.edges

    def rec(i: int, chosen: list[int], comp: list[int]):
        if len(chosen) == target:
            yield tuple(chosen)
            return
        if len(chosen) + (m - i) < target:
            return
        a, b = edges[i]
        ca, cb = comp[a], comp[b]
        if ca != cb:
            merged = [ca if c == cb else c for c in comp]
            chosen.append(i)
            yield from rec(i + 1, chosen, merged)
            chosen.pop()
        yield from rec(i + 1, chosen, comp)

    yield from rec(0, [], list(range(g.vertex_count)))


def component_count(g: Graph) -> int:
    uf = UnionFind(g.vertex_count)
    for a, b in g.edges:
        uf.union(a, b)
    return uf.sets


def brute_force_msf(g: Graph, lab: Labeling) -> Forest:
    """Spanning forest of least total label, by exhaustive enumeration.

    Sums are exact rationals. Ties in the total are resolved by the least
    sum of edge ids, which is what an infinitesimal ``eps * edge_id``
    perturbation does, i.e. the same total order as ``(label, edge_id)``.
    """
    _check_labels(g, lab)
    if g.vertex_count > BRUTE_FORCE_MAX_VERTICES or g.edge_count > BRUTE_FORCE_MAX_EDGES:
        raise MsfError(
            f"brute force limited to {BRUTE_FORCE_MAX_VERTICES} vertices and "
            f"{BRUTE_FORCE_MAX_EDGES} edges; got {g.vertex_count} and {g.edge_count}"
        )
    exact = [Fraction(x) for x in lab.values.tolist()]
    best_key = None
    best = None
    for forest in enumerate_spanning_forests(g):
        key = (sum((exact[e] for e in forest), Fraction(0)), sum(forest))
        if best_key is None or key < best_key:
            best_key, best = key, forest
    return Forest.from_edges(g, best if best is not None else ())


def perturbation_delta(g: Graph, lab: Labeling, lab2: Labeling) -> int:
    """Size of the symmetric difference of the two free forests."""
    if len(lab) != g.edge_count or len(lab2) != g.edge_count:
        raise MsfError("both labelings must belong to the graph")
    return len(mst_kruskal(g, lab).edge_set ^ mst_kruskal(g, lab2).edge_set)


def format_forest(f: Forest) -> str:
    lines = [f"tree_count {f.tree_count}"] + [str(e) for e in sorted(f.edge_set)]
    return "\n".join(lines) + "\n"


def parse_forest(g: Graph, text: str) -> Forest:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("tree_count "):
        raise GraphError("forest file must start with 'tree_count T'")
    forest = Forest.from_edges(g, (int(ln) for ln in lines[1:]))
    if forest.tree_count != int(lines[0].split()[1]):
        raise GraphError("tree_count header disagrees with the edge list")
    return forest
