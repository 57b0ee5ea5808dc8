"""Thresholded subgraphs G_p and Monte Carlo estimators for p_c and p_u.

G_p is the set of edges with label < p together with their endpoints, so
a vertex with no open edge is not part of any cluster. Boundary-touching
clusters of G_p play the role of the infinite clusters.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graphs import Graph, parse_family
from .labels import Labeling, derive_seed, sample_labels
from .parallel import map_replicates
from .unionfind import UnionFind

UNIQUENESS_TOLERANCE = 0.1


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdView:
    p: float
    open_edges: frozenset[int]
    component_of: np.ndarray
    boundary_touching: tuple[bool, ...]
    open_edge_count: tuple[int, ...]

    @property
    def component_count(self) -> int:
        return len(self.boundary_touching)

    def in_gp(self, comp: int) -> bool:
        """Whether the component has at least one open edge, i.e. belongs to G_p."""
        return self.open_edge_count[comp] > 0

    @property
    def infinite_clusters(self) -> list[int]:
        """Component ids of boundary-touching clusters of G_p (the G_p^* proxy)."""
        return [c for c, t in enumerate(self.boundary_touching) if t and self.open_edge_count[c] > 0]

    @property
    def boundary_cluster_count(self) -> int:
        return len(self.infinite_clusters)

    def component_vertices(self, comp: int) -> list[int]:
        return np.flatnonzero(self.component_of == comp).tolist()


def threshold_view(g: Graph, lab: Labeling, p: float) -> ThresholdView:
    if not 0.0 <= p <= 1.0:
        raise SweepError(f"threshold must lie in [0, 1], got {p}")
    n = g.vertex_count
    is_open = lab.values < p
    ends = g.endpoints[is_open]
    adj = coo_matrix(
        (np.ones(len(ends), dtype=np.int8), (ends[:, 0], ends[:, 1])), shape=(n, n)
    )
    k, comp = connected_components(adj, directed=False)
    touching = np.zeros(k, dtype=bool)
    touching[comp[g.boundary_mask]] = True
    counts = np.bincount(comp[ends[:, 0]], minlength=k) if len(ends) else np.zeros(k, dtype=np.int64)
    comp.setflags(write=False)
    return ThresholdView(
        p=float(p),
        open_edges=frozenset(np.flatnonzero(is_open).tolist()),
        component_of=comp,
        boundary_touching=tuple(touching.tolist()),
        open_edge_count=tuple(int(c) for c in counts),
    )


def sweep_labeling(g: Graph, lab: Labeling, p_grid: Sequence[float]) -> tuple[list[bool], list[int]]:
    """Crossing indicator and boundary-cluster count at every grid threshold.

    One Kruskal-order pass: open edges are added in label order and the
    state is read off each time the label passes the next grid value. The
    cluster count tracks components holding a boundary vertex and at least
    one edge.
    """
    vals = lab.values
    order = lab.order().tolist()
    sorted_vals = vals[order].tolist()
    edges = g.edges
    n = g.vertex_count
    uf = UnionFind(n)
    has_b = g.boundary_mask.tolist()
    size = [1] * n
    center = g.center
    clusters = 0
    crossing, counts = [], []
    i, m = 0, len(order)
    for p in p_grid:
        while i < m and sorted_vals[i] < p:
            a, b = edges[order[i]]
            ra, rb = uf.find(a), uf.find(b)
            if ra != rb:
                before = (has_b[ra] and size[ra] > 1) + (has_b[rb] and size[rb] > 1)
                uf.union(ra, rb)
                r = uf.find(ra)
                hb = has_b[ra] or has_b[rb]
                has_b[r] = hb
                size[r] = size[ra] + size[rb]
                clusters += hb - before
            i += 1
        crossing.append(bool(has_b[uf.find(center)]))
        counts.append(clusters)
    return crossing, counts


@dataclass
class SweepResult:
    p_grid: list[float]
    crossing_probability: list[float]
    crossing_se: list[float]
    mean_boundary_clusters: list[float]
    clusters_se: list[float]
    replicates: int
    pc_estimate: float | None
    pu_proxy: float | None
    family: str = ""
    per_replicate: list[tuple[list[bool], list[int]]] = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "crossing_prob", "crossing_se", "mean_boundary_clusters", "clusters_se", "replicates"])
        for row in zip(self.p_grid, self.crossing_probability, self.crossing_se,
                       self.mean_boundary_clusters, self.clusters_se):
            w.writerow([repr(float(x)) for x in row] + [self.replicates])
        return buf.getvalue()


def make_grid(step: float, lo: float | None = None, hi: float | None = None) -> list[float]:
    """Evenly spaced thresholds ``lo, lo + step, ...`` strictly inside (0, 1)."""
    if not 0.0 < step < 1.0:
        raise SweepError(f"grid step must lie in (0, 1), got {step}")
    lo = step if lo is None else lo
    hi = 1.0 - step / 2 if hi is None else hi
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def _check_grid(p_grid: Sequence[float]) -> list[float]:
    grid = [float(p) for p in p_grid]
    if not grid:
        raise SweepError("empty threshold grid")
    if any(not 0.0 <= p <= 1.0 for p in grid):
        raise SweepError("grid thresholds must lie in [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise SweepError("threshold grid must be strictly increasing")
    return grid


def interpolate_crossing(p_grid: Sequence[float], probs: Sequence[float], level: float = 0.5) -> float | None:
    for k, (p, q) in enumerate(zip(p_grid, probs)):
        if q >= level:
            if k == 0:
                return float(p)
            p0, q0 = p_grid[k - 1], probs[k - 1]
            return float(p0 + (level - q0) * (p - p0) / (q - q0))
    return None


def uniqueness_onset(p_grid: Sequence[float], means: Sequence[float],
                     tolerance: float = UNIQUENESS_TOLERANCE) -> float | None:
    """Smallest grid p from which the mean cluster count stays within ``1 +- tolerance``."""
    onset = None
    for p, mu in zip(reversed(p_grid), reversed(means)):
        if abs(mu - 1.0) > tolerance:
            break
        onset = float(p)
    return onset


def _replicate(args: tuple[Graph, int, tuple[float, ...]]):
    g, seed, grid = args
    return sweep_labeling(g, sample_labels(g, seed), grid)


def _resolve(family: Graph | str) -> Graph:
    return parse_family(family) if isinstance(family, str) else family


def run_sweep(family: Graph | str, p_grid: Sequence[float], replicates: int, seed: int,
              workers: int | None = None) -> SweepResult:
    g = _resolve(family)
    grid = _check_grid(p_grid)
    if replicates < 1:
        raise SweepError("need at least one replicate")
    if not g.boundary:
        raise SweepError(f"{g.family_tag} has no boundary; crossing and cluster counts are undefined")
    jobs = [(g, derive_seed(seed, r), tuple(grid)) for r in range(replicates)]
    results = map_replicates(_replicate, jobs, workers)
    cross = np.array([r[0] for r in results], dtype=np.float64)
    clus = np.array([r[1] for r in results], dtype=np.float64)
    n = float(replicates)
    cp = cross.sum(axis=0) / n
    cse = np.sqrt(cp * (1 - cp) / n)
    mean_c = clus.sum(axis=0) / n
    c_se = clus.std(axis=0, ddof=1) / math.sqrt(n) if replicates > 1 else np.zeros(len(grid))
    return SweepResult(
        p_grid=grid,
        crossing_probability=cp.tolist(),
        crossing_se=cse.tolist(),
        mean_boundary_clusters=mean_c.tolist(),
        clusters_se=c_se.tolist(),
        replicates=replicates,
        pc_estimate=interpolate_crossing(grid, cp.tolist()),
        pu_proxy=uniqueness_onset(grid, mean_c.tolist()),
        family=g.family_tag,
        per_replicate=results,
    )


def estimate_pc(family: Graph | str, p_grid: Sequence[float], replicates: int, seed: int,
                workers: int | None = None) -> SweepResult:
    """Centre-to-boundary crossing curve and its level-1/2 point.

    Each replicate draws one labeling and reads every grid threshold off
    it, so the curve is exactly nondecreasing replicate by replicate.
    """
    return run_sweep(family, p_grid, replicates, seed, workers)


def uniqueness_proxy(family: Graph | str, p_grid: Sequence[float], replicates: int, seed: int,
                     workers: int | None = None) -> SweepResult:
    """Mean number of distinct boundary-touching clusters per threshold."""
    return run_sweep(family, p_grid, replicates, seed, workers)

