import pytest

from msf_lab.ends import (EndsError, count_pieces, detect_lonely, end_count_proxy, endstats_csv,
                          wired_subtree_count)
from msf_lab.graphs import from_edges, gen_grid, gen_tree_ball
from msf_lab.labels import derive_seed, sample_labels
from msf_lab.msf import mst_kruskal, wired_msf

from conftest import labeling


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_full_tree_branch_counts(r):
    g = gen_tree_ball(3, 5)
    f = mst_kruskal(g, sample_labels(g, 0))
    stats = end_count_proxy(f, g, 0, [r])
    assert stats.branch_counts[r] == 3 * 2 ** (r - 1)
    assert not any(stats.isolated_branch_flags[r])


def test_cut_zero_is_whole_tree():
    g = gen_tree_ball(3, 3)
    f = mst_kruskal(g, sample_labels(g, 0))
    assert end_count_proxy(f, g, 0, [0]).branch_counts[0] == 1


def test_path_branch_is_isolated():
    # path 0-1-2-3 with the far end on the boundary
    g = from_edges(4, [(0, 1), (1, 2), (2, 3)], center=0, boundary=[3])
    f = mst_kruskal(g, labeling([0.1, 0.2, 0.3]))
    stats = end_count_proxy(f, g, 0, [1, 2])
    assert stats.branch_counts == {1: 1, 2: 1}
    assert stats.isolated_branch_flags == {1: (True,), 2: (True,)}


def test_branch_with_fork_is_not_isolated():
    # 0-1, then 1 forks to boundary vertices 2 and 3
    g = from_edges(4, [(0, 1), (1, 2), (1, 3)], center=0, boundary=[2, 3])
    f = mst_kruskal(g, labeling([0.1, 0.2, 0.3]))
    stats = end_count_proxy(f, g, 0, [1])
    assert stats.branch_counts[1] == 1
    assert stats.isolated_branch_flags[1] == (False,)


def test_end_count_errors():
    g = gen_tree_ball(3, 3)
    f = mst_kruskal(g, sample_labels(g, 0))
    with pytest.raises(EndsError):
        end_count_proxy(f, g, 0, [3])
    with pytest.raises(EndsError):
        end_count_proxy(f, g, 1, [1])
    with pytest.raises(EndsError):
        end_count_proxy(f, g, 0, [-1])


def test_endstats_csv():
    g = gen_tree_ball(3, 3)
    f = mst_kruskal(g, sample_labels(g, 0))
    text = endstats_csv([end_count_proxy(f, g, 0, [1, 2])])
    assert text.splitlines() == ["tree_id,cut_radius,branch_count,isolated_flags_packed",
                                 "0,1,3,000", "0,2,6,000000"]


def test_wired_subtree_count_examples():
    g = from_edges(3, [(0, 1), (1, 2)], center=1, boundary=[0, 2])
    lab = labeling([0.8, 0.4])
    free, wired = mst_kruskal(g, lab), wired_msf(g, lab)
    assert wired_subtree_count(g, free.edge_set, wired) == 2
    assert wired_subtree_count(g, [], wired) == 1
    assert wired_subtree_count(g, [1], wired) == 1


def test_wired_subtree_count_rejects_non_tree():
    g = from_edges(4, [(0, 1), (2, 3)], center=0, boundary=[3])
    wired = wired_msf(g, labeling([0.1, 0.2]))
    with pytest.raises(EndsError):
        wired_subtree_count(g, [0, 1], wired)


def test_wired_subtree_count_on_tree_balls():
    g = gen_tree_ball(3, 8)
    for r in range(100):
        lab = sample_labels(g, derive_seed(8, r))
        free, wired = mst_kruskal(g, lab), wired_msf(g, lab)
        count = wired_subtree_count(g, free.edge_set, wired)
        assert count == len(g.boundary) == wired.tree_count
        assert count == count_pieces(g, wired.edge_set, range(g.vertex_count))


def test_lonely_when_forests_agree():
    g = from_edges(3, [(0, 1), (1, 2)], center=0, boundary=[2])
    lab = labeling([0.3, 0.6])
    free, wired = mst_kruskal(g, lab), wired_msf(g, lab)
    assert free.edge_set == wired.edge_set
    assert detect_lonely(g, free, wired, 1) == [0]


def test_not_lonely_when_window_sees_a_cut():
    g = from_edges(3, [(0, 1), (1, 2)], center=1, boundary=[0, 2])
    lab = labeling([0.8, 0.4])
    free, wired = mst_kruskal(g, lab), wired_msf(g, lab)
    # window radius 0 holds no edges, so every free tree matches
    assert detect_lonely(g, free, wired, 0) == [0]


def test_lonely_on_box():
    g = gen_grid(9, 9)
    for r in range(20):
        lab = sample_labels(g, derive_seed(9, r))
        free, wired = mst_kruskal(g, lab), wired_msf(g, lab)
        lonely = detect_lonely(g, free, wired, 2)
        inner = {e for e, (a, b) in enumerate(g.edges)
                 if g.center_distances[a] <= 2 and g.center_distances[b] <= 2}
        window = free.edge_set & inner
        owners = {wired.component_of[g.edges[e][0]] for e in window}
        expected = window <= wired.edge_set and len(owners) <= 1
        assert (lonely == [0]) == expected


def test_lonely_window_too_big():
    g = gen_tree_ball(3, 3)
    lab = sample_labels(g, 0)
    with pytest.raises(EndsError):
        detect_lonely(g, mst_kruskal(g, lab), wired_msf(g, lab), 3)
