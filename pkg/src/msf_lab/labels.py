"""I.i.d. uniform edge labels and the two label-coupling transformations.

Labels come from numpy's counter-based Philox generator keyed by the seed:
the label of edge ``e`` is the ``e``-th 64-bit word of the stream, cut to
53 bits. That makes it a function of ``(seed, e)`` alone, so graphs that
share edge ids share labels and iteration order never matters.

All comparisons between edges use the key ``(label, edge_id)``; this is a
strict total order even when two float labels collide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .graphs import Graph

SEED_LIMIT = 2**64
_INV_2_53 = 1.0 / (1 << 53)


class LabelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Labeling:
    values: np.ndarray
    seed: int
    provenance: str = "sampled"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise LabelError("labels must be a flat array indexed by edge id")
        if vals.size and (vals.min() < 0.0 or vals.max() >= 1.0):
            raise LabelError("labels must lie in [0, 1)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __getitem__(self, eid: int) -> float:
        return float(self.values[eid])

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None

    def key(self, eid: int) -> tuple[float, int]:
        return (float(self.values[eid]), eid)

    def order(self) -> np.ndarray:
        """Edge ids sorted by the ``(label, edge_id)`` key."""
        # stable sort on label == lexicographic (label, id) since ids are positions
        return np.argsort(self.values, kind="stable")

    def replace(self, updates: dict[int, float], provenance: str) -> "Labeling":
        vals = self.values.copy()
        for eid, x in updates.items():
            vals[eid] = x
        return Labeling(vals, self.seed, provenance)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise LabelError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """First ``count`` labels of the stream keyed by ``seed``."""
    bits = np.random.Philox(key=_check_seed(seed)).random_raw(count)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53


def sample_labels(g: Graph | int, seed: int) -> Labeling:
    """Label every edge of ``g`` (or ``g`` edges, if an int) from ``seed``."""
    m = g if isinstance(g, int) else g.edge_count
    return Labeling(uniform_stream(seed, m), _check_seed(seed), "sampled")


def derive_seed(master: int, *index: int) -> int:
    """Child seed for replicate ``index`` of a run seeded with ``master``."""
    ss = np.random.SeedSequence(_check_seed(master), spawn_key=tuple(int(i) for i in index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise LabelError(f"threshold p must lie in (0, 1), got {p}")


def _edge_array(lab: Labeling, edges: Iterable[int]) -> np.ndarray:
    idx = np.fromiter((int(e) for e in edges), dtype=np.int64)
    idx = np.unique(idx)
    if idx.size and (idx[0] < 0 or idx[-1] >= len(lab)):
        raise LabelError("edge id outside the labeling")
    return idx


def transform_shift_up(lab: Labeling, edges: Iterable[int], p: float) -> Labeling:
    """Send each listed label ``u`` to ``p + (1 - p) * u``, landing in ``[p, 1)``."""
    _check_p(p)
    idx = _edge_array(lab, edges)
    vals = lab.values.copy()
    shifted = p + (1.0 - p) * vals[idx]
    # rounding may reach 1.0 for u within one ulp of 1
    vals[idx] = np.minimum(shifted, np.nextafter(1.0, 0.0))
    return Labeling(vals, lab.seed, f"shift_up(p={p!r}, n={idx.size}) of {lab.provenance}")


def transform_scale_down(lab: Labeling, edges: Iterable[int], p: float) -> Labeling:
    """Send each listed label ``u`` to ``p * u``, landing in ``[0, p)``."""
    _check_p(p)
    idx = _edge_array(lab, edges)
    vals = lab.values.copy()
    vals[idx] = p * vals[idx]
    return Labeling(vals, lab.seed, f"scale_down(p={p!r}, n={idx.size}) of {lab.provenance}")


def relabel_monotone(
    lab: Labeling,
    fn: Callable[[np.ndarray], np.ndarray],
    name: str = "monotone",
    check_pairs: int = 1000,
    rng_seed: int = 0,
) -> Labeling:
    """Apply a strictly increasing map to every label.

    ``fn`` receives the whole label array. A sample of edge pairs is
    compared before and after; an observed order inversion raises.
    """
    new = np.asarray(fn(lab.values.copy()), dtype=np.float64)
    if new.shape != lab.values.shape:
        raise LabelError("monotone map changed the number of labels")
    m = new.size
    if m >= 2 and check_pairs:
        rng = np.random.default_rng(rng_seed)
        i = rng.integers(0, m, size=check_pairs)
        j = rng.integers(0, m, size=check_pairs)
        before = np.sign(lab.values[i] - lab.values[j])
        after = np.sign(new[i] - new[j])
        if np.any(before != after):
            raise LabelError(f"map {name!r} is not strictly increasing on the sampled pairs")
    return Labeling(new, lab.seed, f"{name} of {lab.provenance}")


def format_labeling(lab: Labeling) -> str:
    lines = [f"seed {lab.seed}"]
    lines += [f"{eid} {float(x):.17g}" for eid, x in enumerate(lab.values)]
    return "\n".join(lines) + "\n"


def parse_labeling(text: str) -> Labeling:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("seed "):
        raise LabelError("labeling file must start with 'seed S'")
    seed = int(lines[0].split()[1])
    vals = []
    for i, ln in enumerate(lines[1:]):
        eid, x = ln.split()
        if int(eid) != i:
            raise LabelError(f"edge ids must be dense and ordered; got {eid} at position {i}")
        vals.append(float(x))
    return Labeling(np.array(vals, dtype=np.float64), seed, "imported")
