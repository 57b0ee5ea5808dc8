"""Finite proxies for the end structure of spanning-forest trees.

Ends are counted by cutting a tree at a graph-metric ball around the host
center: every piece left over that still reaches the boundary is a branch.
Cut radius ``r`` removes the vertices at distance ``< r``, so cutting the
full 3-regular tree ball at ``r`` leaves ``3 * 2**(r - 1)`` branches.
"""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graphs import Graph
from .msf import Forest


class EndsError(ValueError):
    pass


@dataclass(frozen=True)
class EndStats:
    tree_id: int
    branch_counts: dict[int, int]
    isolated_branch_flags: dict[int, tuple[bool, ...]]

    def csv_rows(self) -> list[list]:
        return [
            [self.tree_id, r, self.branch_counts[r],
             "".join("1" if f else "0" for f in self.isolated_branch_flags[r])]
            for r in sorted(self.branch_counts)
        ]


ENDSTATS_HEADER = ["tree_id", "cut_radius", "branch_count", "isolated_flags_packed"]


def endstats_csv(stats: Iterable[EndStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ENDSTATS_HEADER)
    for s in stats:
        w.writerows(s.csv_rows())
    return buf.getvalue()


def _tree_adjacency(g: Graph, edges: Iterable[int]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for e in edges:
        a, b = g.edges[e]
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    return adj


def _pieces(adj: dict[int, list[int]], vertices: Iterable[int]) -> list[list[int]]:
    """Connected components of the subgraph induced on ``vertices``."""
    keep = set(vertices)
    seen: set[int] = set()
    out = []
    for s in sorted(keep):
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj.get(v, ()):
                if w in keep and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        out.append(comp)
    return out


def _is_bare_path(adj, branch: list[int], boundary, dist) -> bool:
    """Whether the branch's boundary-reaching core is a single path out of the cut.

    The core is what remains after repeatedly stripping leaves that are
    neither boundary vertices nor the branch's attachment point.
    """
    members = set(branch)
    anchors = {v for v in branch if any(w not in members for w in adj.get(v, ()))}
    if not anchors:
        anchors = {min(branch, key=lambda v: (dist[v] if dist[v] >= 0 else float("inf"), v))}
    if len(anchors) > 1:
        return False
    deg = {v: sum(1 for w in adj.get(v, ()) if w in members) for v in branch}
    alive = set(branch)
    queue = deque(v for v in branch if deg[v] <= 1 and v not in boundary and v not in anchors)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for w in adj.get(v, ()):
            if w in alive:
                deg[w] -= 1
                if deg[w] <= 1 and w not in boundary and w not in anchors:
                    queue.append(w)
    (anchor,) = anchors
    return all(deg[v] <= 2 for v in alive) and deg[anchor] <= 1


def end_count_proxy(f: Forest, g: Graph, tree_id: int, cut_radii: Sequence[int]) -> EndStats:
    if not 0 <= tree_id < f.tree_count:
        raise EndsError(f"tree id {tree_id} not in forest with {f.tree_count} trees")
    radius = g.ball_radius
    for r in cut_radii:
        if r < 0:
            raise EndsError(f"cut radius must be >= 0, got {r}")
        if radius is not None and r >= radius:
            raise EndsError(f"cut radius {r} must be below the ball radius {radius}")
    vertices = f.trees[tree_id]
    adj = _tree_adjacency(g, f.tree_edges(g, tree_id))
    dist = g.center_distances
    boundary = g.boundary
    counts, flags = {}, {}
    for r in cut_radii:
        outside = [v for v in vertices if dist[v] < 0 or dist[v] >= r]
        branches = [b for b in _pieces(adj, outside) if any(v in boundary for v in b)]
        counts[r] = len(branches)
        flags[r] = tuple(_is_bare_path(adj, b, boundary, dist) for b in branches)
    return EndStats(tree_id, counts, flags)


def count_pieces(g: Graph, edges: Iterable[int], vertices: Iterable[int]) -> int:
    """Number of components of ``(vertices, edges)`` by traversal."""
    return len(_pieces(_tree_adjacency(g, edges), vertices))


def wired_subtree_count(g: Graph, free_tree: Iterable[int], wired_forest: Forest) -> int:
    """Number of wired pieces inside a free tree: one more than the free edges the wired forest drops."""
    tree = set(free_tree)
    vertices = {v for e in tree for v in g.edges[e]}
    if not tree:
        return 1
    if count_pieces(g, tree, vertices) != 1 or len(tree) != len(vertices) - 1:
        raise EndsError("free_tree is not a tree")
    dropped = tree - wired_forest.edge_set
    formula = 1 + len(dropped)
    traversal = count_pieces(g, tree - dropped, vertices)
    if formula != traversal:
        raise AssertionError(f"subtree count mismatch: formula {formula}, traversal {traversal}")
    return formula


def detect_lonely(g: Graph, free_forest: Forest, wired_forest: Forest, window_radius: int) -> list[int]:
    """Free trees that agree, inside the window, with a wired tree they share a vertex with."""
    radius = g.ball_radius
    if radius is not None and window_radius >= radius:
        raise EndsError(f"window radius {window_radius} must be below the ball radius {radius}")
    dist = g.center_distances
    in_window = [0 <= d <= window_radius for d in dist]

    def restricted(forest: Forest) -> dict[int, frozenset[int]]:
        out: dict[int, set[int]] = {c: set() for c in range(forest.tree_count)}
        for e in forest.edge_set:
            a, b = g.edges[e]
            if in_window[a] and in_window[b]:
                out[forest.component_of[a]].add(e)
        return {c: frozenset(s) for c, s in out.items()}

    free_r = restricted(free_forest)
    wired_r = restricted(wired_forest)
    lonely = []
    for t, verts in sorted(free_forest.trees.items()):
        partners = {wired_forest.component_of[v] for v in verts}
        if any(wired_r[w] == free_r[t] for w in partners):
            lonely.append(t)
    return lonely
