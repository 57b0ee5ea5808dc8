"""Mass transport on finite vertex-transitive hosts (cycles and tori).

Every unit of mass sent is received somewhere, so for each labeling the
total sent equals the total received and the per-vertex averages agree.
The checker runs rules over sampled labelings and reports the gap, which
should be zero up to floating-point summation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .graphs import Graph
from .labels import Labeling, derive_seed, sample_labels

Sender = Callable[[Graph, Labeling, int], Iterable[tuple[int, float]]]


class MtpError(ValueError):
    pass


@dataclass(frozen=True)
class TransportRule:
    """Rule giving, for a source vertex, the ``(target, mass)`` pairs it sends.

    The mass from ``u`` to ``v`` is the sum over pairs naming ``v``. A rule
    may only look at the labeled ball of ``locality_radius`` around ``u``.
    """

    name: str
    sends: Sender
    locality_radius: int = 1

    def scaled(self, c: float) -> "TransportRule":
        if c < 0:
            raise MtpError("scale factor must be >= 0")
        base = self.sends
        return TransportRule(f"{c}*{self.name}",
                             lambda g, lab, u: [(v, c * m) for v, m in base(g, lab, u)],
                             self.locality_radius)

    def mass_table(self, g: Graph, lab: Labeling, u: int) -> dict[int, float]:
        out: dict[int, float] = {}
        for v, m in self.sends(g, lab, u):
            if m < 0:
                raise MtpError(f"rule {self.name!r} sent negative mass {m} from {u}")
            out[v] = out.get(v, 0.0) + m
        return out


def _zero(g, lab, u):
    return ()


def _forward(g, lab, u):
    # the first edge u emitted points "forward" (clockwise / to the right)
    for e in g.adjacency[u]:
        if g.edges[e][0] == u:
            return [(g.edges[e][1], 1.0)]
    return ()


def _min_label_neighbor(g, lab, u):
    e = min(g.adjacency[u], key=lab.key)
    return [(g.other_end(e, u), 1.0)]


def _label_weighted(g, lab, u):
    return [(g.other_end(e, u), lab[e]) for e in g.adjacency[u]]


def _open_split(g, lab, u):
    opened = [e for e in g.adjacency[u] if lab[e] < 0.5]
    if not opened:
        return ()
    share = 1.0 / len(opened)
    return [(g.other_end(e, u), share) for e in opened]


BUILTIN_RULES: dict[str, TransportRule] = {
    r.name: r for r in (
        TransportRule("zero", _zero, 0),
        TransportRule("forward", _forward, 1),
        TransportRule("min_label_neighbor", _min_label_neighbor, 1),
        TransportRule("label_weighted", _label_weighted, 1),
        TransportRule("open_split", _open_split, 1),
    )
}


def get_rule(name: str) -> TransportRule:
    try:
        return BUILTIN_RULES[name]
    except KeyError:
        raise MtpError(f"unknown transport rule {name!r}; choose from {sorted(BUILTIN_RULES)}") from None


@dataclass
class MtpReport:
    rule_name: str
    replicates: int
    mean_out: float
    mean_in: float
    se_out: float
    se_in: float
    max_abs_gap: float
    tolerance: float
    gaps: list[float] = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> bool:
        return self.max_abs_gap <= self.tolerance and abs(self.mean_out - self.mean_in) <= self.tolerance

    def csv_row(self) -> list:
        return [self.rule_name, self.replicates, repr(self.mean_out), repr(self.mean_in), repr(self.max_abs_gap)]


MTP_HEADER = ["rule_name", "replicates", "mean_out", "mean_in", "max_abs_gap"]


def mtp_csv(reports: Iterable[MtpReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MTP_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def transport_totals(g: Graph, rule: TransportRule, lab: Labeling) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex mass sent and received for one labeling."""
    out = np.zeros(g.vertex_count)
    inn = np.zeros(g.vertex_count)
    for u in range(g.vertex_count):
        for v, m in rule.mass_table(g, lab, u).items():
            out[u] += m
            inn[v] += m
    return out, inn


def mtp_check(g: Graph, rule: TransportRule, replicates: int, seed: int,
              tolerance: float = 1e-12) -> MtpReport:
    if g.boundary:
        raise MtpError(f"{g.family_tag} has a boundary; mass transport is only exact on tori and cycles")
    if replicates < 1:
        raise MtpError("need at least one replicate")
    n = g.vertex_count
    outs, ins, gaps = [], [], []
    for r in range(replicates):
        lab = sample_labels(g, derive_seed(seed, r))
        out, inn = transport_totals(g, rule, lab)
        total_out, total_in = math.fsum(out), math.fsum(inn)
        gaps.append(abs(total_out - total_in))
        outs.append(total_out / n)
        ins.append(total_in / n)
    outs_a, ins_a = np.array(outs), np.array(ins)
    se = (lambda x: float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0)
    return MtpReport(
        rule_name=rule.name,
        replicates=replicates,
        mean_out=math.fsum(outs) / replicates,
        mean_in=math.fsum(ins) / replicates,
        se_out=se(outs_a),
        se_in=se(ins_a),
        max_abs_gap=max(gaps),
        tolerance=tolerance,
        gaps=gaps,
    )


# -- automorphisms for equivariance spot checks -------------------------------

def cycle_rotation(g: Graph, shift: int) -> tuple[list[int], list[int]]:
    """Vertex and edge maps of ``i -> i + shift`` on a cycle family graph."""
    if not g.family_tag.startswith("cycle:"):
        raise MtpError("rotation needs a cycle family graph")
    n = g.vertex_count
    perm = [(i + shift) % n for i in range(n)]
    return perm, perm


def torus_translation(g: Graph, dx: int, dy: int) -> tuple[list[int], list[int]]:
    """Vertex and edge maps of the translation by ``(dx, dy)`` on a torus family graph."""
    tag = g.family_tag.split(":")
    if tag[0] != "grid" or tag[-1] != "torus":
        raise MtpError("translation needs a torus family graph")
    w, h = int(tag[1]), int(tag[2])
    vmap = [((v % w + dx) % w) + ((v // w + dy) % h) * w for v in range(g.vertex_count)]
    # a torus vertex v emits edges 2v (right) and 2v + 1 (down)
    emap = [2 * vmap[e // 2] + e % 2 for e in range(g.edge_count)]
    return vmap, emap


def check_equivariance(g: Graph, rule: TransportRule, lab: Labeling,
                       vmap: list[int], emap: list[int], atol: float = 0.0) -> bool:
    """Whether moving the labels by an automorphism moves the transport with them."""
    moved = np.empty(len(lab))
    moved[emap] = lab.values
    lab2 = Labeling(moved, lab.seed, "automorphism image")
    for u in range(g.vertex_count):
        before = {vmap[v]: m for v, m in rule.mass_table(g, lab, u).items()}
        after = rule.mass_table(g, lab2, vmap[u])
        if before.keys() != after.keys():
            return False
        if any(abs(before[v] - after[v]) > atol for v in before):
            return False
    return True
