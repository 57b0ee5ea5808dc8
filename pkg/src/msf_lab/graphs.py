"""Finite approximations of transitive graphs with a marked boundary.

Every generator returns an immutable :class:`Graph` whose vertex and edge
ids are dense integers assigned in generation order, so two calls with the
same parameters give identical graphs. The boundary set stands in for
"infinity": a cluster or tree is treated as infinite iff it contains a
boundary vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

# Generators refuse to build graphs larger than this many edges.
MAX_EDGES = 5_000_000


class GraphError(ValueError):
    """Invalid generator parameters or malformed graph input."""


@dataclass(frozen=True, eq=False)
class Graph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    center: int
    boundary: frozenset[int]
    family_tag: str = "custom"
    is_vertex_transitive_host: bool = False

    def __post_init__(self):
        n = self.vertex_count
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge endpoint out of range: {(a, b)}")
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
        if n and not 0 <= self.center < n:
            raise GraphError(f"center {self.center} out of range")
        if any(not 0 <= v < n for v in self.boundary):
            raise GraphError("boundary vertex out of range")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self.edges == other.edges
            and self.center == other.center
            and self.boundary == other.boundary
        )

    def __hash__(self):
        return hash((self.vertex_count, self.edges, self.center, self.boundary))

    def __repr__(self):
        return (
            f"Graph({self.family_tag!r}, vertices={self.vertex_count}, "
            f"edges={self.edge_count}, boundary={len(self.boundary)})"
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Incident edge ids per vertex, in increasing edge id order."""
        inc: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for eid, (a, b) in enumerate(self.edges):
            inc[a].append(eid)
            inc[b].append(eid)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def endpoints(self) -> np.ndarray:
        """``(m, 2)`` int64 array of edge endpoints, read-only."""
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.vertex_count, dtype=bool)
        mask[list(self.boundary)] = True
        mask.setflags(write=False)
        return mask

    def other_end(self, eid: int, v: int) -> int:
        a, b = self.edges[eid]
        return b if a == v else a

    def distances_from(self, source: int | None = None) -> list[int]:
        """Graph-metric BFS distances; unreachable vertices get -1."""
        source = self.center if source is None else source
        dist = [-1] * self.vertex_count
        dist[source] = 0
        queue = deque([source])
        edges, adj = self.edges, self.adjacency
        while queue:
            v = queue.popleft()
            for eid in adj[v]:
                a, b = edges[eid]
                w = b if a == v else a
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    @cached_property
    def center_distances(self) -> tuple[int, ...]:
        return tuple(self.distances_from(self.center))

    @cached_property
    def ball_radius(self) -> int | None:
        """Distance from the center to the nearest boundary vertex.

        ``None`` when no boundary vertex is reachable (e.g. tori).
        """
        dist = self.center_distances
        reach = [dist[b] for b in self.boundary if dist[b] >= 0]
        return min(reach) if reach else None


@dataclass(frozen=True)
class ContractionMap:
    contracted_vertex: int
    vertex_map: tuple[int, ...]
    surviving_edges: dict[int, int] = field(hash=False)

    @cached_property
    def image_to_original(self) -> np.ndarray:
        out = np.empty(len(self.surviving_edges), dtype=np.int64)
        for orig, img in self.surviving_edges.items():
            out[img] = orig
        return out


def _check_size(m: int):
    if m > MAX_EDGES:
        raise GraphError(f"graph would have {m} edges, above the limit {MAX_EDGES}")


def tree_ball_size(degree: int, radius: int) -> int:
    return 1 + degree * ((degree - 1) ** radius - 1) // (degree - 2)


def gen_tree_ball(degree: int, radius: int) -> Graph:
    """Ball of the given radius around the root of the degree-regular tree.

    Vertices are numbered breadth first from the root; the edge joining
    vertex ``v`` to its parent has id ``v - 1``.
    """
    if degree < 3:
        raise GraphError(f"tree degree must be >= 3, got {degree}")
    if radius < 1:
        raise GraphError(f"tree radius must be >= 1, got {radius}")
    n = tree_ball_size(degree, radius)
    _check_size(n - 1)
    edges = []
    frontier = [0]
    nxt_id = 1
    for depth in range(radius):
        new_frontier = []
        for v in frontier:
            kids = degree if depth == 0 else degree - 1
            for _ in range(kids):
                edges.append((v, nxt_id))
                new_frontier.append(nxt_id)
                nxt_id += 1
        frontier = new_frontier
    return Graph(
        vertex_count=n,
        edges=tuple(edges),
        center=0,
        boundary=frozenset(frontier),
        family_tag=f"tree:{degree}:{radius}",
        is_vertex_transitive_host=True,
    )


def grid_vertex(x: int, y: int, width: int) -> int:
    return y * width + x


def gen_grid(width: int, height: int, wrap: bool = False) -> Graph:
    """Square-lattice box (``wrap=False``) or torus (``wrap=True``).

    Vertex ``(x, y)`` has id ``y * width + x``. Edges are emitted per vertex
    in id order, right neighbour first, then the one below. A torus of side
    2 therefore carries parallel edges.
    """
    if width < 2 or height < 2:
        raise GraphError(f"grid sides must be >= 2, got {width}x{height}")
    _check_size(2 * width * height)
    edges = []
    for y in range(height):
        for x in range(width):
            v = grid_vertex(x, y, width)
            if wrap or x + 1 < width:
                edges.append((v, grid_vertex((x + 1) % width, y, width)))
            if wrap or y + 1 < height:
                edges.append((v, grid_vertex(x, (y + 1) % height, width)))
    if wrap:
        boundary: frozenset[int] = frozenset()
    else:
        boundary = frozenset(
            grid_vertex(x, y, width)
            for y in range(height)
            for x in range(width)
            if x in (0, width - 1) or y in (0, height - 1)
        )
    kind = "torus" if wrap else "box"
    return Graph(
        vertex_count=width * height,
        edges=tuple(edges),
        center=grid_vertex((width - 1) // 2, (height - 1) // 2, width),
        boundary=boundary,
        family_tag=f"grid:{width}:{height}:{kind}",
        is_vertex_transitive_host=True,
    )


def gen_cycle(length: int) -> Graph:
    """Cycle C_n; edge ``i`` joins ``i`` and ``(i + 1) % n``."""
    if length < 3:
        raise GraphError(f"cycle length must be >= 3, got {length}")
    edges = tuple((i, (i + 1) % length) for i in range(length))
    return Graph(length, edges, 0, frozenset(), f"cycle:{length}", True)


def gen_tree_cycle_product(degree: int, radius: int, cycle_len: int) -> Graph:
    """Cartesian product of a tree ball with the cycle C_cycle_len.

    Vertex ``(t, c)`` has id ``t * cycle_len + c``. Edge ids list the tree
    layer copies first (tree edge major, cycle position minor), then the
    cycle edges (tree vertex major).
    """
    if cycle_len < 3:
        raise GraphError(f"cycle length must be >= 3, got {cycle_len}")
    tree = gen_tree_ball(degree, radius)
    L = cycle_len
    _check_size(tree.edge_count * L + tree.vertex_count * L)
    edges = [(a * L + c, b * L + c) for a, b in tree.edges for c in range(L)]
    edges += [(t * L + c, t * L + (c + 1) % L) for t in range(tree.vertex_count) for c in range(L)]
    boundary = frozenset(t * L + c for t in tree.boundary for c in range(L))
    return Graph(
        vertex_count=tree.vertex_count * L,
        edges=tuple(edges),
        center=0,
        boundary=boundary,
        family_tag=f"treecycle:{degree}:{radius}:{cycle_len}",
        is_vertex_transitive_host=True,
    )


def from_edges(
    vertex_count: int,
    edges: Iterable[tuple[int, int]],
    center: int = 0,
    boundary: Iterable[int] = (),
    family_tag: str = "custom",
) -> Graph:
    return Graph(vertex_count, tuple((int(a), int(b)) for a, b in edges), center,
                 frozenset(boundary), family_tag)


def contract_boundary(g: Graph) -> tuple[Graph, ContractionMap]:
    """Merge all boundary vertices of ``g`` into a single vertex.

    Interior vertices keep their relative order and are renumbered densely;
    the contracted vertex takes the last id. Boundary-boundary edges would
    become self-loops and are dropped; the rest keep their relative order.
    """
    if not g.boundary:
        raise GraphError("cannot contract an empty boundary; use the free forest instead")
    vertex_map = [0] * g.vertex_count
    nxt = 0
    for v in range(g.vertex_count):
        if v not in g.boundary:
            vertex_map[v] = nxt
            nxt += 1
    hub = nxt
    for b in g.boundary:
        vertex_map[b] = hub
    new_edges = []
    surviving = {}
    for eid, (a, b) in enumerate(g.edges):
        ia, ib = vertex_map[a], vertex_map[b]
        if ia == hub and ib == hub:
            continue
        surviving[eid] = len(new_edges)
        new_edges.append((ia, ib))
    center = vertex_map[g.center]
    image = Graph(
        vertex_count=hub + 1,
        edges=tuple(new_edges),
        center=center,
        boundary=frozenset([hub]),
        family_tag=f"contracted({g.family_tag})",
    )
    return image, ContractionMap(hub, tuple(vertex_map), surviving)


# -- family specs -------------------------------------------------------------

def parse_family(family: str) -> Graph:
    """Build a graph from a family string.

    Accepted forms: ``tree:D:R``, ``grid:W:H`` / ``grid:W:H:box``,
    ``grid:W:H:torus``, ``treecycle:D:R:L``, ``cycle:N``.
    """
    parts = family.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "tree" and len(args) == 2:
            return gen_tree_ball(int(args[0]), int(args[1]))
        if kind in ("grid", "box", "torus") and len(args) in (2, 3):
            wrap = kind == "torus"
            if len(args) == 3:
                if args[2] not in ("torus", "box"):
                    raise GraphError(f"unknown grid kind {args[2]!r}")
                wrap = args[2] == "torus"
            return gen_grid(int(args[0]), int(args[1]), wrap)
        if kind == "treecycle" and len(args) == 3:
            return gen_tree_cycle_product(int(args[0]), int(args[1]), int(args[2]))
        if kind == "cycle" and len(args) == 1:
            return gen_cycle(int(args[0]))
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"bad family string {family!r}: {exc}") from None
    raise GraphError(f"bad family string {family!r}")


def family_edge_estimate(family: str) -> int:
    """Edge count of a family without building it; rejects the same parameters the generators do."""
    parts = family.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "tree" and len(args) == 2:
            d, r = int(args[0]), int(args[1])
            if d < 3 or r < 1:
                raise GraphError(f"tree needs degree >= 3 and radius >= 1, got {d}, {r}")
            return tree_ball_size(d, r) - 1
        if kind in ("grid", "box", "torus") and len(args) in (2, 3):
            if len(args) == 3 and args[2] not in ("torus", "box"):
                raise GraphError(f"unknown grid kind {args[2]!r}")
            w, h = int(args[0]), int(args[1])
            if w < 2 or h < 2:
                raise GraphError(f"grid sides must be >= 2, got {w}x{h}")
            return 2 * w * h
        if kind == "treecycle" and len(args) == 3:
            d, r, L = (int(a) for a in args)
            if d < 3 or r < 1 or L < 3:
                raise GraphError(f"treecycle needs degree >= 3, radius >= 1, cycle >= 3; got {d}, {r}, {L}")
            return (2 * tree_ball_size(d, r) - 1) * L
        if kind == "cycle" and len(args) == 1:
            n = int(args[0])
            if n < 3:
                raise GraphError(f"cycle length must be >= 3, got {n}")
            return n
    except GraphError:
        raise
    except (ValueError, OverflowError):
        pass
    raise GraphError(f"bad family string {family!r}")


# -- text format --------------------------------------------------------------

def format_graph(g: Graph) -> str:
    bnd = sorted(g.boundary)
    lines = [f"vertices {g.vertex_count} center {g.center} boundary {len(bnd)}: "
             + " ".join(map(str, bnd))]
    lines += [f"{eid} {a} {b}" for eid, (a, b) in enumerate(g.edges)]
    return "\n".join(lines) + "\n"


def parse_graph(text: str, family_tag: str = "imported") -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphError("empty graph file")
    head, _, tail = lines[0].partition(":")
    tok = head.split()
    if len(tok) != 6 or tok[0] != "vertices" or tok[2] != "center" or tok[4] != "boundary":
        raise GraphError(f"bad graph header: {lines[0]!r}")
    n, center, k = int(tok[1]), int(tok[3]), int(tok[5])
    bnd = [int(x) for x in tail.split()]
    if len(bnd) != k:
        raise GraphError(f"header announces {k} boundary vertices, found {len(bnd)}")
    edges = []
    for i, ln in enumerate(lines[1:]):
        eid, a, b = (int(x) for x in ln.split())
        if eid != i:
            raise GraphError(f"edge ids must be dense and ordered; got {eid} at position {i}")
        edges.append((a, b))
    return Graph(n, tuple(edges), center, frozenset(bnd), family_tag)
