"""``msf-lab`` command line.

Exit codes: 0 success, 1 configuration or input error, 2 a verification
run (``couple``, ``mtp``) found a failed assertion.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coupling import CouplingError, demo_scenario, replay_coupling
from .graphs import GraphError, format_graph, parse_family, parse_graph
from .harness import ConfigError, load_config, make_config, run_experiment, verification_failed
from .labels import LabelError, format_labeling, parse_labeling, sample_labels
from .mtp import MtpError
from .msf import MsfError, format_forest, invasion_tree, mst_kruskal, wired_msf
from .percolation import SweepError, make_grid

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 1, 2


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _graph_from(args):
    if getattr(args, "graph", None):
        return parse_graph(Path(args.graph).read_text())
    if not args.family:
        raise ConfigError("family", "give --family or --graph")
    return parse_family(args.family)


def cmd_generate(args) -> int:
    g = _graph_from(args)
    _emit(format_graph(g), args.out)
    print(f"{g.family_tag}: {g.vertex_count} vertices, {g.edge_count} edges, "
          f"{len(g.boundary)} boundary", file=sys.stderr)
    return EXIT_OK


def cmd_labels(args) -> int:
    g = _graph_from(args)
    _emit(format_labeling(sample_labels(g, args.seed)), args.out)
    return EXIT_OK


def cmd_msf(args) -> int:
    g = _graph_from(args)
    lab = parse_labeling(Path(args.labels).read_text()) if args.labels else sample_labels(g, args.seed)
    if args.mode == "free":
        f = mst_kruskal(g, lab)
    elif args.mode == "wired":
        f = wired_msf(g, lab)
    else:
        f = invasion_tree(g, lab, g.center if args.source is None else args.source, args.stop_at_boundary)
    _emit(format_forest(f), args.out)
    print(f"{args.mode} forest: {len(f.edge_set)} edges, {f.tree_count} trees", file=sys.stderr)
    return EXIT_OK


_EXPERIMENT_FLAGS = ("family", "seed", "replicates", "p_grid", "cut_radii", "output", "p",
                     "forest", "rules", "threads")


def _experiment(kind: str):
    def run(args) -> int:
        fields = {k: getattr(args, k, None) for k in _EXPERIMENT_FLAGS}
        if getattr(args, "p_step", None) is not None:
            fields["p_grid"] = make_grid(args.p_step)
        fields = {k: v for k, v in fields.items() if v is not None}
        cfg = load_config(args.config, kind=kind, **fields) if args.config else make_config(kind=kind, **fields)
        record = run_experiment(cfg)
        if not cfg.output:
            sys.stdout.write(record.csv_text)
        print(f"{kind} on {cfg.family}: {cfg.replicates} replicates, "
              f"{record.wall_clock_s:.2f}s", file=sys.stderr)
        print(json.dumps(record.aggregate, indent=2, sort_keys=True, default=str), file=sys.stderr)
        if verification_failed(record):
            print("verification FAILED", file=sys.stderr)
            return EXIT_ASSERT
        return EXIT_OK
    return run


def cmd_couple(args) -> int:
    if args.demo:
        g, lab, sc = demo_scenario()
        report = replay_coupling(g, lab, sc)
        print(report.format())
        return EXIT_OK if report.passed else EXIT_ASSERT
    return _experiment("coupling-replay")(args)


def _csv_floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _csv_ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _csv_strs(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msf-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(p):
        p.add_argument("--family", help="tree:D:R, grid:W:H[:torus|:box], treecycle:D:R:L, cycle:N")
        p.add_argument("--graph", help="graph file in edge-list format")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("generate", help="write a generated graph as an edge list")
    graph_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("labels", help="write a sampled labeling")
    graph_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("msf", help="compute a free, wired or invasion forest")
    graph_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", help="labeling file (overrides --seed)")
    p.add_argument("--mode", choices=("free", "wired", "invasion"), default="free")
    p.add_argument("--source", type=int, help="invasion source (default: center)")
    p.add_argument("--stop-at-boundary", action="store_true")
    p.set_defaults(func=cmd_msf)

    def exp_args(p, *extra):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--family")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicates", type=int)
        p.add_argument("--out", dest="output")
        p.add_argument("--threads", type=int)
        if "grid" in extra:
            p.add_argument("--p-grid", type=_csv_floats)
            p.add_argument("--p-step", type=float)
        if "cuts" in extra:
            p.add_argument("--cut-radii", type=_csv_ints)
        if "p" in extra:
            p.add_argument("--p", type=float)

    for name, kind, help_ in (("sweep-pc", "pc-sweep", "crossing-probability sweep and p_c estimate"),
                              ("sweep-pu", "pu-sweep", "boundary-cluster sweep and p_u proxy")):
        p = sub.add_parser(name, help=help_)
        exp_args(p, "grid")
        p.set_defaults(func=_experiment(kind))

    p = sub.add_parser("compare", help="free vs wired disagreement density")
    exp_args(p)
    p.set_defaults(func=_experiment("msf-compare"))

    p = sub.add_parser("ends", help="branch counts of forest trees")
    exp_args(p, "cuts")
    p.add_argument("--forest", choices=("wired", "free"))
    p.set_defaults(func=_experiment("ends-stats"))

    p = sub.add_parser("couple", help="replay the label coupling")
    exp_args(p, "cuts", "p")
    p.add_argument("--demo", action="store_true", help="run the built-in 8-vertex scenario")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("mtp", help="mass transport exactness check")
    exp_args(p)
    p.add_argument("--rules", type=_csv_strs)
    p.set_defaults(func=_experiment("mtp-check"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for failed verification here
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, GraphError, LabelError, MsfError, SweepError, CouplingError, MtpError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
