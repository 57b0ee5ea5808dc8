"""Replay of the label-coupling step that inserts a path into the free forest.

Given a threshold ``p`` and a short path ``P`` joining two distinct
boundary-touching clusters ``K1`` and ``K2`` of G_p, the labels of the
non-path edges at the inner vertices of ``P`` are pushed above ``p``
(giving ``kappa2``) and then the path labels are pulled below ``p``
(giving ``kappa1``). After that the whole path lies in the free forest,
joining the tracked tree on the ``K1`` side to the wired tree on the
``K2`` side.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .ends import EndStats, end_count_proxy
from .graphs import Graph, from_edges
from .labels import Labeling, transform_scale_down, transform_shift_up
from .msf import (BRUTE_FORCE_MAX_EDGES, BRUTE_FORCE_MAX_VERTICES, Forest,
                  brute_force_msf, mst_kruskal, wired_msf)
from .percolation import threshold_view


class CouplingError(ValueError):
    """A scenario precondition fails; the message names the condition."""


@dataclass(frozen=True)
class CouplingScenario:
    path_vertices: tuple[int, ...]
    path_edges: tuple[int, ...]
    k1: frozenset[int]
    k2: frozenset[int]
    tracked_tree: int
    d_edges: frozenset[int]
    p: float
    kappa2: Labeling = field(repr=False, compare=False)
    kappa1: Labeling = field(repr=False, compare=False)

    @property
    def inner_vertices(self) -> tuple[int, ...]:
        return self.path_vertices[1:-1]

    @property
    def shifted_edges(self) -> frozenset[int]:
        """D minus P: the edges transformation (1) acts on."""
        return self.d_edges - set(self.path_edges)


@dataclass
class CouplingReport:
    checks: dict[str, bool]
    details: dict[str, object]
    ends_before: EndStats | None = None
    ends_after: EndStats | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def format(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in self.checks.items()]
        for k, v in self.details.items():
            lines.append(f"      {k}: {v}")
        if self.ends_before is not None and self.ends_after is not None:
            lines.append(f"      branches before: {self.ends_before.branch_counts}")
            lines.append(f"      branches after:  {self.ends_after.branch_counts}")
        return "\n".join(lines)


def _walk(g: Graph, start: int, path_edges: Sequence[int]) -> tuple[int, ...]:
    verts = [start]
    for e in path_edges:
        a, b = g.edges[e]
        if verts[-1] == a:
            verts.append(b)
        elif verts[-1] == b:
            verts.append(a)
        else:
            raise CouplingError(f"path edges do not chain at edge {e}")
    if len(set(verts)) != len(verts):
        raise CouplingError("path is not simple")
    return tuple(verts)


def build_scenario(g: Graph, lab: Labeling, start: int, path_edges: Sequence[int], p: float) -> CouplingScenario:
    """Assemble a scenario and verify its preconditions.

    ``start`` is the endpoint of the path lying in ``K1``. The tracked
    tree is the free tree of ``lab`` through ``start``.
    """
    if not path_edges:
        raise CouplingError("path must have at least one edge")
    verts = _walk(g, start, path_edges)
    view = threshold_view(g, lab, p)
    infinite = set(view.infinite_clusters)
    c1, c2 = int(view.component_of[verts[0]]), int(view.component_of[verts[-1]])
    if c1 not in infinite or c2 not in infinite:
        raise CouplingError("condition (i): path endpoints must lie in boundary-touching clusters of G_p")
    if c1 == c2:
        raise CouplingError("condition (i): path endpoints lie in the same cluster")
    k1 = frozenset(view.component_vertices(c1))
    k2 = frozenset(view.component_vertices(c2))
    free = mst_kruskal(g, lab)
    tracked = free.component_of[start]
    t_k1 = _tree_part_in_cluster(g, lab, free, tracked, k1, p)
    if not t_k1:
        raise CouplingError("condition (ii), relaxed: tracked tree has no edge inside K1")
    inner = set(verts[1:-1])
    if any(g.edges[e][0] in inner or g.edges[e][1] in inner for e in t_k1):
        raise CouplingError("condition (iii): an edge of T within K1 touches an inner vertex of P")
    d_edges = frozenset(e for v in inner for e in g.adjacency[v])
    kappa2 = transform_shift_up(lab, d_edges - set(path_edges), p)
    kappa1 = transform_scale_down(kappa2, path_edges, p)
    return CouplingScenario(verts, tuple(path_edges), k1, k2, tracked, d_edges, p, kappa2, kappa1)


def _tree_part_in_cluster(g, lab, forest: Forest, tree: int, cluster, p) -> set[int]:
    return {e for e in forest.tree_edges(g, tree)
            if lab[e] < p and g.edges[e][0] in cluster and g.edges[e][1] in cluster}


def _component_through(g: Graph, edges: set[int], v: int) -> set[int]:
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        a, b = g.edges[e]
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    seen, out = {v}, set()
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for y, e in adj.get(x, ()):
            out.add(e)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return out


def replay_coupling(g: Graph, lab: Labeling, scenario: CouplingScenario,
                    cut_radii: Sequence[int] | None = None) -> CouplingReport:
    # rebuilding re-verifies (i), relaxed (ii) and (iii) against this labeling
    sc = build_scenario(g, lab, scenario.path_vertices[0], scenario.path_edges, scenario.p)
    if sc != scenario:
        raise CouplingError("scenario does not match the labeling it is replayed on")
    p = sc.p
    path = set(sc.path_edges)
    inner = set(sc.inner_vertices)
    a, b = sc.path_vertices[0], sc.path_vertices[-1]
    k2_lab, k1_lab = sc.kappa2, sc.kappa1

    free0 = mst_kruskal(g, lab)
    free2 = mst_kruskal(g, k2_lab)
    free1 = mst_kruskal(g, k1_lab)
    shifted = sc.shifted_edges

    checks: dict[str, bool] = {}
    checks["shift_range"] = all(p <= k2_lab[e] < 1.0 for e in shifted)
    checks["scale_range"] = all(0.0 <= k1_lab[e] < p for e in path)
    checks["path_open"] = all(k1_lab[e] < p for e in path)
    open_at_inner = {e for v in inner for e in g.adjacency[v] if k1_lab[e] < p}
    checks["inner_open_edges_on_path"] = open_at_inner <= path
    checks["path_in_free_forest"] = path <= free1.edge_set
    delta = len(free0.edge_set ^ free2.edge_set)
    checks["perturbation_bound"] = delta <= 2 * len(shifted)
    checks["shift_keeps_other_edges"] = (free0.edge_set - shifted) <= free2.edge_set
    open2 = {e for e in free2.edge_set if k2_lab[e] < p}
    checks["open_free_edges_persist"] = open2 <= free1.edge_set

    t_part = _component_through(g, _tree_part_in_cluster(g, lab, free0, sc.tracked_tree, sc.k1, p), a)
    wired2 = wired_msf(g, k2_lab)
    s_edges = {e for e in wired2.edge_set
               if k2_lab[e] < p and g.edges[e][0] in sc.k2 and g.edges[e][1] in sc.k2}
    s_part = _component_through(g, s_edges, b)
    merged = t_part | path | s_part
    checks["merged_tree_in_free_forest"] = merged <= free1.edge_set
    merged_tree = free1.component_of[a]
    checks["merged_tree_connected"] = all(
        free1.component_of[v] == merged_tree for e in merged for v in g.edges[e])

    details: dict[str, object] = {
        "path_length": len(path),
        "shifted_edges": len(shifted),
        "free_forest_delta": delta,
        "tracked_edges": len(t_part),
        "wired_side_edges": len(s_part),
    }
    if g.vertex_count <= BRUTE_FORCE_MAX_VERTICES and g.edge_count <= BRUTE_FORCE_MAX_EDGES:
        checks["brute_force_agrees"] = brute_force_msf(g, k1_lab).edge_set == free1.edge_set

    if cut_radii is None:
        radius = g.ball_radius or 0
        cut_radii = [radius // 2] if radius >= 2 else []
    before = after = None
    if cut_radii:
        before = end_count_proxy(free0, g, free0.component_of[a], cut_radii)
        after = end_count_proxy(free1, g, merged_tree, cut_radii)
    return CouplingReport(checks, details, before, after)


def find_scenario(g: Graph, lab: Labeling, p: float) -> CouplingScenario | None:
    """Shortest path from the first boundary-touching cluster to any other one.

    Clusters are ordered by smallest vertex; the search is a multi-source
    BFS from ``K1`` in vertex/edge id order. ``None`` when G_p has fewer
    than two boundary-touching clusters.
    """
    view = threshold_view(g, lab, p)
    clusters = sorted(view.infinite_clusters, key=lambda c: view.component_vertices(c)[0])
    if len(clusters) < 2:
        return None
    infinite = set(clusters)
    comp = view.component_of
    k1 = clusters[0]
    parent: dict[int, tuple[int, int] | None] = {}
    queue: deque[int] = deque()
    for v in view.component_vertices(k1):
        parent[v] = None
        queue.append(v)
    target = None
    while queue and target is None:
        v = queue.popleft()
        for e in g.adjacency[v]:
            w = g.other_end(e, v)
            if w in parent:
                continue
            parent[w] = (v, e)
            c = int(comp[w])
            if c in infinite and c != k1:
                target = w
                break
            queue.append(w)
    if target is None:
        return None
    edges = []
    v = target
    while parent[v] is not None:
        u, e = parent[v]
        edges.append(e)
        v = u
    edges.reverse()
    return build_scenario(g, lab, v, edges, p)


def demo_scenario() -> tuple[Graph, Labeling, CouplingScenario]:
    """Eight-vertex instance: two triangles at p = 1/2 joined by a 2-edge path.

    Vertex 3 is the inner vertex of the path 2-3-5; its other edges
    (to 1 and to 4) get pushed above p, after which both path edges
    enter the free forest.
    """
    edges = [
        (0, 1), (1, 2), (0, 2),     # K1 triangle
        (5, 6), (6, 7), (5, 7),     # K2 triangle
        (2, 3), (3, 5),             # path P
        (3, 4), (4, 6), (1, 3),     # extra cycles through the inner vertex
    ]
    labels = [0.10, 0.20, 0.30, 0.15, 0.25, 0.35, 0.70, 0.80, 0.40, 0.90, 0.60]
    g = from_edges(8, edges, center=3, boundary=[0, 7], family_tag="coupling-demo")
    lab = Labeling(labels, seed=0, provenance="demo")
    return g, lab, build_scenario(g, lab, 2, [6, 7], 0.5)
