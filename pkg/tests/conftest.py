import random

import numpy as np
import pytest

from msf_lab.graphs import from_edges
from msf_lab.labels import Labeling


def random_connected_graph(rng: random.Random, n: int, m: int, parallel: bool = False):
    """Random spanning tree on ``n`` vertices plus extra edges up to ``m``."""
    edges = [(rng.randrange(v), v) for v in range(1, n)]
    seen = {tuple(sorted(e)) for e in edges}
    tries = 0
    while len(edges) < m and tries < 50 * m:
        tries += 1
        a, b = rng.sample(range(n), 2)
        key = (min(a, b), max(a, b))
        if key in seen and not parallel:
            continue
        seen.add(key)
        edges.append((a, b))
    rng.shuffle(edges)
    return from_edges(n, edges, center=0)


def labeling(values, seed=0):
    return Labeling(np.asarray(values, dtype=float), seed, "test")


@pytest.fixture
def triangle():
    g = from_edges(3, [(0, 1), (1, 2), (0, 2)])
    return g, labeling([0.1, 0.5, 0.9])


@pytest.fixture
def k4():
    # e12 e13 e14 e23 e24 e34 on vertices 1..4 -> 0..3
    g = from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    return g, labeling([0.05, 0.10, 0.15, 0.20, 0.25, 0.30])
