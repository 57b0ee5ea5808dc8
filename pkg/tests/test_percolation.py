import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from msf_lab.graphs import from_edges, gen_grid, gen_tree_ball
from msf_lab.labels import derive_seed, sample_labels
from msf_lab.percolation import (SweepError, estimate_pc, interpolate_crossing, make_grid,
                                 run_sweep, sweep_labeling, threshold_view, uniqueness_onset,
                                 uniqueness_proxy)

from conftest import labeling, random_connected_graph


def exact_tree_crossing(degree, radius, p):
    """Branching recursion: chance an open path runs from the root to depth ``radius``."""
    f = 1.0
    for _ in range(radius - 1):
        f = 1.0 - (1.0 - p * f) ** (degree - 1)
    return 1.0 - (1.0 - p * f) ** degree


def bfs_clusters(g, lab, p):
    """Oracle: boundary-touching clusters with at least one open edge, by plain BFS."""
    adj = {v: [] for v in range(g.vertex_count)}
    for e, (a, b) in enumerate(g.edges):
        if lab[e] < p:
            adj[a].append(b)
            adj[b].append(a)
    seen, count, crosses = set(), 0, False
    for s in range(g.vertex_count):
        if s in seen or not adj[s]:
            continue
        comp, stack = {s}, [s]
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        if comp & g.boundary:
            count += 1
            crosses |= g.center in comp
    return crosses or g.center in g.boundary, count


def test_extreme_thresholds():
    g = gen_grid(5, 5)
    lab = sample_labels(g, 1)
    closed = threshold_view(g, lab, 0.0)
    assert not closed.open_edges and closed.boundary_cluster_count == 0
    assert closed.component_count == g.vertex_count
    full = threshold_view(g, lab, 1.0)
    assert len(full.open_edges) == g.edge_count and full.boundary_cluster_count == 1


def test_triangle_threshold(triangle):
    g, lab = triangle
    v = threshold_view(g, lab, 0.5)
    assert v.open_edges == {0}
    assert v.component_count == 2
    assert v.in_gp(v.component_of[0]) and not v.in_gp(v.component_of[2])
    assert sorted(v.component_vertices(v.component_of[0])) == [0, 1]


def test_threshold_out_of_range(triangle):
    g, lab = triangle
    with pytest.raises(SweepError):
        threshold_view(g, lab, 1.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_open_sets_nest_and_clusters_are_pure(seed, p, q):
    p, q = min(p, q), max(p, q)
    g = random_connected_graph(random.Random(seed), 12, 20)
    lab = sample_labels(g, seed)
    small, big = threshold_view(g, lab, p), threshold_view(g, lab, q)
    assert small.open_edges <= big.open_edges
    for e in small.open_edges:
        assert lab[e] < p
        a, b = g.edges[e]
        assert small.component_of[a] == small.component_of[b]
    # each small cluster sits inside one big cluster
    for c in range(small.component_count):
        assert len({big.component_of[v] for v in small.component_vertices(c)}) == 1


@pytest.mark.parametrize("family", ["grid:7:6:box", "tree:3:4", "treecycle:3:2:3"])
def test_sweep_matches_direct_views(family):
    from msf_lab.graphs import parse_family
    g = parse_family(family)
    grid = make_grid(0.05)
    for r in range(10):
        lab = sample_labels(g, derive_seed(3, r))
        crossing, counts = sweep_labeling(g, lab, grid)
        for p, c, k in zip(grid, crossing, counts):
            assert (c, k) == bfs_clusters(g, lab, p)
            v = threshold_view(g, lab, p)
            assert k == v.boundary_cluster_count
            assert c == (v.component_of[g.center] in v.infinite_clusters)


def test_dense_box_crosses():
    res = estimate_pc("grid:16:16:box", [0.999], 50, 1)
    assert res.crossing_probability == [1.0]


def test_zero_threshold_has_no_clusters():
    res = uniqueness_proxy("grid:8:8:box", [0.0, 0.5], 20, 2)
    assert res.mean_boundary_clusters[0] == 0.0
    assert res.crossing_probability[0] == 0.0


@pytest.mark.parametrize("grid", [[], [0.3, 0.3], [0.5, 0.2], [-0.1], [1.2]])
def test_bad_grids(grid):
    with pytest.raises(SweepError):
        run_sweep("tree:3:3", grid, 5, 0)


def test_sweep_needs_boundary_and_replicates():
    with pytest.raises(SweepError):
        run_sweep("grid:6:6:torus", [0.5], 5, 0)
    with pytest.raises(SweepError):
        run_sweep("tree:3:3", [0.5], 0, 0)


def test_small_tree_matches_branching_exactly():
    assert exact_tree_crossing(3, 1, 0.5) == pytest.approx(1 - 0.5**3)
    res = estimate_pc(gen_tree_ball(3, 4), [0.3, 0.5, 0.7], 2000, 17)
    for p, q, se in zip(res.p_grid, res.crossing_probability, res.crossing_se):
        exact = exact_tree_crossing(3, 4, p)
        assert abs(q - exact) <= 4 * max(se, math.sqrt(exact * (1 - exact) / 2000))


def test_crossing_curve_is_monotone():
    res = estimate_pc("grid:12:12:box", make_grid(0.05), 60, 5)
    cp, se = res.crossing_probability, res.crossing_se
    assert all(b >= a for a, b in zip(cp, cp[1:]))
    assert all(b >= a - 3 * max(sa, sb) for a, b, sa, sb in zip(cp, cp[1:], se, se[1:]))


def test_make_grid():
    grid = make_grid(0.02)
    assert len(grid) == 49 and grid[0] == 0.02 and grid[-1] == 0.98
    assert make_grid(0.25) == [0.25, 0.5, 0.75]
    with pytest.raises(SweepError):
        make_grid(0.0)


def test_interpolate_crossing():
    assert interpolate_crossing([0.1, 0.2, 0.3], [0.0, 0.4, 0.8]) == pytest.approx(0.225)
    assert interpolate_crossing([0.1, 0.2], [0.6, 0.9]) == 0.1
    assert interpolate_crossing([0.1, 0.2], [0.1, 0.2]) is None


def test_uniqueness_onset():
    grid = [0.2, 0.4, 0.6, 0.8]
    assert uniqueness_onset(grid, [0.95, 3.0, 1.05, 1.0]) == 0.6
    assert uniqueness_onset(grid, [0.0, 0.0, 2.0, 1.5]) is None


def test_csv_layout():
    res = run_sweep("tree:3:3", [0.25, 0.75], 4, 0)
    lines = res.to_csv().splitlines()
    assert lines[0] == "p,crossing_prob,crossing_se,mean_boundary_clusters,clusters_se,replicates"
    assert len(lines) == 3 and lines[1].startswith("0.25,") and lines[1].endswith(",4")


def test_isolated_boundary_vertex_is_not_a_cluster():
    g = from_edges(3, [(0, 1)], center=0, boundary=[2])
    v = threshold_view(g, labeling([0.1]), 0.5)
    assert v.boundary_cluster_count == 0
    assert sweep_labeling(g, labeling([0.1]), [0.5]) == ([False], [0])
