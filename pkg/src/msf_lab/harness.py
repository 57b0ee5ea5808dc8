"""Experiment configuration, replicate driving and result files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .coupling import find_scenario, replay_coupling
from .ends import end_count_proxy
from .graphs import MAX_EDGES, Graph, GraphError, family_edge_estimate, parse_family
from .labels import Labeling, derive_seed, sample_labels
from .msf import mst_kruskal, wired_msf
from .mtp import get_rule, mtp_check, mtp_csv
from .parallel import map_replicates
from .percolation import SweepResult, make_grid, run_sweep

KINDS = ("msf-compare", "pc-sweep", "pu-sweep", "ends-stats", "coupling-replay", "mtp-check")
DEFAULT_RULES = ("forward", "min_label_neighbor", "open_split")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    kind: str
    family: str
    seed: int = 0
    replicates: int = 1
    p_grid: list[float] = field(default_factory=lambda: make_grid(0.02))
    cut_radii: list[int] = field(default_factory=list)
    output: str | None = None
    p: float = 0.5
    forest: str = "wired"
    rules: list[str] = field(default_factory=lambda: list(DEFAULT_RULES))
    threads: int | None = None
    max_edges: int = MAX_EDGES

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}; got {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.replicates < 1:
            raise ConfigError("replicates", "must be >= 1")
        try:
            m = family_edge_estimate(self.family)
        except GraphError as exc:
            raise ConfigError("family", str(exc)) from None
        if m > self.max_edges:
            raise ConfigError("family", f"about {m} edges exceeds the limit of {self.max_edges}")
        if not self.p_grid or any(not 0 <= x <= 1 for x in self.p_grid):
            raise ConfigError("p_grid", "thresholds must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.p_grid, self.p_grid[1:])):
            raise ConfigError("p_grid", "thresholds must be strictly increasing")
        if any(r < 0 for r in self.cut_radii):
            raise ConfigError("cut_radii", "radii must be >= 0")
        if not 0 < self.p < 1:
            raise ConfigError("p", "must lie in (0, 1)")
        if self.forest not in ("wired", "free"):
            raise ConfigError("forest", "must be 'wired' or 'free'")
        for name in self.rules:
            try:
                get_rule(name)
            except ValueError as exc:
                raise ConfigError("rules", str(exc)) from None
        if self.threads is not None and self.threads < 0:
            raise ConfigError("threads", "must be >= 0")

    def fingerprint(self) -> str:
        echo = self.echo()
        echo.pop("output", None)
        echo.pop("threads", None)
        blob = json.dumps(echo, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def echo(self) -> dict[str, Any]:
        return asdict(self)


_LIST_FLOAT = {"p_grid"}
_LIST_INT = {"cut_radii"}
_LIST_STR = {"rules"}
_INT = {"seed", "replicates", "threads", "max_edges"}
_FLOAT = {"p"}


def parse_config_text(text: str) -> dict[str, Any]:
    """``key = value`` lines into typed config fields; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return coerce_fields(raw)


def coerce_fields(raw: dict[str, str]) -> dict[str, Any]:
    known = set(ExperimentConfig.__dataclass_fields__) | {"p_step"}
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown config key")
        try:
            if key == "p_step":
                out["p_grid"] = make_grid(float(value))
            elif key in _LIST_FLOAT:
                out[key] = [float(x) for x in value.split(",") if x.strip()]
            elif key in _LIST_INT:
                out[key] = [int(x) for x in value.split(",") if x.strip()]
            elif key in _LIST_STR:
                out[key] = [x.strip() for x in value.split(",") if x.strip()]
            elif key in _INT:
                out[key] = int(value)
            elif key in _FLOAT:
                out[key] = float(value)
            else:
                out[key] = value
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}") from None
    return out


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    fields = parse_config_text(Path(path).read_text())
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(**fields)


def make_config(**fields) -> ExperimentConfig:
    for required in ("kind", "family"):
        if required not in fields:
            raise ConfigError(required, "missing")
    cfg = ExperimentConfig(**fields)
    cfg.validate()
    return cfg


@dataclass
class RunRecord:
    config: dict[str, Any]
    per_replicate: list[dict[str, Any]]
    aggregate: dict[str, Any]
    wall_clock_s: float
    version: str
    fingerprint: str
    csv_text: str = field(repr=False, default="")

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("csv_text")
        return json.dumps(d, indent=2, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not JSON serialisable: {type(x)}")


# -- free vs wired comparison -------------------------------------------------

@dataclass(frozen=True)
class CompareRecord:
    disagreement: int
    interior_edges: int
    density: float
    free_edges: int
    wired_edges: int


def inner_edges(g: Graph) -> list[int]:
    """Edges with both endpoints in the inner half-ball around the center."""
    dist = g.center_distances
    radius = g.ball_radius
    half = radius // 2 if radius is not None else max(dist)
    return [e for e, (a, b) in enumerate(g.edges) if 0 <= dist[a] <= half and 0 <= dist[b] <= half]


def msf_compare(g: Graph, lab: Labeling, interior: list[int] | None = None) -> CompareRecord:
    free = mst_kruskal(g, lab).edge_set
    wired = wired_msf(g, lab).edge_set
    interior = inner_edges(g) if interior is None else interior
    gap = sum(1 for e in interior if e in free and e not in wired)
    density = gap / len(interior) if interior else 0.0
    return CompareRecord(gap, len(interior), density, len(free), len(wired))


# -- per-kind replicate workers (module level so they pickle) -----------------

def _compare_job(args):
    g, interior, r, seed = args
    rec = msf_compare(g, sample_labels(g, seed), interior)
    return {"replicate": r, "seed": seed, **asdict(rec)}


def _ends_job(args):
    g, r, seed, cut_radii, which = args
    lab = sample_labels(g, seed)
    forest = wired_msf(g, lab) if which == "wired" else mst_kruskal(g, lab)
    rows = []
    touched = {forest.component_of[b] for b in g.boundary}
    tree_edges = forest.edges_by_tree(g)
    for t in sorted(touched):
        if not tree_edges[t]:
            continue
        stats = end_count_proxy(forest, g, t, cut_radii)
        for row in stats.csv_rows():
            rows.append({"replicate": r, "tree_id": row[0], "cut_radius": row[1],
                         "branch_count": row[2], "isolated_flags_packed": row[3]})
    return rows


def _coupling_job(args):
    g, r, seed, p, cut_radii = args
    lab = sample_labels(g, seed)
    sc = find_scenario(g, lab, p)
    if sc is None:
        return {"replicate": r, "seed": seed, "found": 0, "path_length": 0, "shifted_edges": 0,
                "free_forest_delta": 0, "passed": 1, "failed_checks": ""}
    rep = replay_coupling(g, lab, sc, cut_radii or None)
    failed = [k for k, ok in rep.checks.items() if not ok]
    return {"replicate": r, "seed": seed, "found": 1, "path_length": rep.details["path_length"],
            "shifted_edges": rep.details["shifted_edges"],
            "free_forest_delta": rep.details["free_forest_delta"],
            "passed": int(not failed), "failed_checks": ";".join(failed)}


def _rows_csv(header: list[str], rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(row[h]) if isinstance(row[h], float) else row[h] for h in header])
    return buf.getvalue()


def _mean_se(xs: list[float]) -> tuple[float, float]:
    a = np.asarray(xs, dtype=np.float64)
    if a.size == 0:
        return 0.0, 0.0
    mean = float(a.sum() / a.size)
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return mean, se


COMPARE_HEADER = ["replicate", "seed", "disagreement", "interior_edges", "density", "free_edges", "wired_edges"]
ENDS_HEADER = ["replicate", "tree_id", "cut_radius", "branch_count", "isolated_flags_packed"]
COUPLING_HEADER = ["replicate", "seed", "found", "path_length", "shifted_edges", "free_forest_delta",
                   "passed", "failed_checks"]


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> RunRecord:
    cfg.validate()
    start = time.perf_counter()
    g = parse_family(cfg.family)
    seeds = [derive_seed(cfg.seed, r) for r in range(cfg.replicates)]
    kind = cfg.kind
    aggregate: dict[str, Any] = {}

    if kind == "msf-compare":
        if not g.boundary:
            raise ConfigError("family", "msf-compare needs a family with a boundary")
        interior = inner_edges(g)
        rows = map_replicates(_compare_job, [(g, interior, r, s) for r, s in enumerate(seeds)], cfg.threads)
        mean, se = _mean_se([row["density"] for row in rows])
        aggregate = {"mean_density": mean, "density_se": se, "interior_edges": len(interior)}
        text = _rows_csv(COMPARE_HEADER, rows)

    elif kind in ("pc-sweep", "pu-sweep"):
        if not g.boundary:
            raise ConfigError("family", f"{kind} needs a family with a boundary")
        res: SweepResult = run_sweep(g, cfg.p_grid, cfg.replicates, cfg.seed, cfg.threads)
        rows = []
        for r, (cross, counts) in enumerate(res.per_replicate):
            first = next((p for p, c in zip(res.p_grid, cross) if c), None)
            rows.append({"replicate": r, "seed": seeds[r], "first_crossing_p": first,
                         "boundary_clusters": counts})
        aggregate = {"pc_estimate": res.pc_estimate, "pu_proxy": res.pu_proxy}
        text = res.to_csv()

    elif kind == "ends-stats":
        if not g.boundary:
            raise ConfigError("family", "ends-stats needs a family with a boundary")
        cuts = cfg.cut_radii or [g.ball_radius // 2]
        if any(c >= g.ball_radius for c in cuts):
            raise ConfigError("cut_radii", f"must be below the ball radius {g.ball_radius}")
        per = map_replicates(_ends_job, [(g, r, s, cuts, cfg.forest) for r, s in enumerate(seeds)],
                             cfg.threads)
        rows = [row for block in per for row in block]
        for c in cuts:
            counts = [row["branch_count"] for row in rows if row["cut_radius"] == c]
            joint = [row["branch_count"] >= 3 and "1" in row["isolated_flags_packed"]
                     for row in rows if row["cut_radius"] == c]
            mean, se = _mean_se(counts)
            aggregate[f"cut_{c}"] = {
                "trees": len(counts),
                "mean_branch_count": mean,
                "branch_count_se": se,
                "fraction_at_most_one": (sum(1 for x in counts if x <= 1) / len(counts)) if counts else 0.0,
                "fraction_many_with_isolated": (sum(joint) / len(joint)) if joint else 0.0,
                "histogram": {str(k): counts.count(k) for k in sorted(set(counts))},
            }
        text = _rows_csv(ENDS_HEADER, rows)

    elif kind == "coupling-replay":
        rows = map_replicates(_coupling_job, [(g, r, s, cfg.p, cfg.cut_radii) for r, s in enumerate(seeds)],
                              cfg.threads)
        found = [row for row in rows if row["found"]]
        aggregate = {"scenarios_found": len(found),
                     "all_passed": all(row["passed"] for row in rows)}
        text = _rows_csv(COUPLING_HEADER, rows)

    elif kind == "mtp-check":
        reports = [mtp_check(g, get_rule(name), cfg.replicates, cfg.seed) for name in cfg.rules]
        rows = [{"rule_name": rep.rule_name, "mean_out": rep.mean_out, "mean_in": rep.mean_in,
                 "max_abs_gap": rep.max_abs_gap, "verdict": rep.verdict} for rep in reports]
        aggregate = {"all_exact": all(rep.verdict for rep in reports)}
        text = mtp_csv(reports)

    else:  # pragma: no cover - validate() rejects this
        raise ConfigError("kind", kind)

    record = RunRecord(
        config=cfg.echo(),
        per_replicate=rows,
        aggregate=aggregate,
        wall_clock_s=time.perf_counter() - start,
        version=__version__,
        fingerprint=cfg.fingerprint(),
        csv_text=text,
    )
    if write and cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        out.with_suffix(".json").write_text(record.to_json())
    return record


def verification_failed(record: RunRecord) -> bool:
    """Whether a verification-style run (coupling, mtp) found a violated assertion."""
    kind = record.config["kind"]
    if kind == "coupling-replay":
        return not record.aggregate["all_passed"]
    if kind == "mtp-check":
        return not record.aggregate["all_exact"]
    return False
