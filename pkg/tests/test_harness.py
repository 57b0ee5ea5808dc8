import json

import pytest

from msf_lab.graphs import from_edges, gen_tree_ball
from msf_lab.harness import (ConfigError, ExperimentConfig, inner_edges, load_config, make_config,
                             msf_compare, parse_config_text, run_experiment, verification_failed)
from msf_lab.labels import derive_seed, sample_labels

from conftest import labeling


SMALL_RUNS = [
    dict(kind="msf-compare", family="grid:8:8:box", replicates=6),
    dict(kind="pc-sweep", family="tree:3:5", replicates=6, p_grid=[0.3, 0.5, 0.7]),
    dict(kind="pu-sweep", family="grid:8:8:box", replicates=6, p_grid=[0.3, 0.6, 0.9]),
    dict(kind="ends-stats", family="tree:3:5", replicates=4, cut_radii=[1, 2]),
    dict(kind="coupling-replay", family="treecycle:3:2:3", replicates=6),
    dict(kind="mtp-check", family="cycle:10", replicates=4),
]


def test_compare_writes_one_row_per_replicate(tmp_path):
    out = tmp_path / "cmp.csv"
    rec = run_experiment(make_config(kind="msf-compare", family="grid:16:16:box", seed=3,
                                     replicates=50, output=str(out)))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("replicate,seed,disagreement")
    assert len(lines) == 51
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["fingerprint"] == rec.fingerprint
    assert meta["config"]["replicates"] == 50
    assert {"version", "wall_clock_s", "per_replicate", "aggregate"} <= set(meta)


@pytest.mark.parametrize("fields", SMALL_RUNS, ids=[f["kind"] for f in SMALL_RUNS])
def test_runs_are_deterministic(fields):
    a = run_experiment(make_config(seed=9, **fields), write=False)
    b = run_experiment(make_config(seed=9, **fields), write=False)
    assert a.csv_text == b.csv_text
    assert a.aggregate == b.aggregate
    assert a.fingerprint == b.fingerprint
    assert not verification_failed(a)


@pytest.mark.parametrize("kind", ["msf-compare", "ends-stats"])
def test_thread_count_does_not_change_output(kind):
    base = dict(kind=kind, family="tree:3:6", seed=1, replicates=6)
    one = run_experiment(make_config(threads=1, **base), write=False)
    two = run_experiment(make_config(threads=2, **base), write=False)
    assert one.csv_text == two.csv_text
    assert one.aggregate == two.aggregate
    assert one.fingerprint == two.fingerprint


def test_fingerprint_tracks_inputs():
    a = make_config(kind="msf-compare", family="tree:3:4", seed=1)
    b = make_config(kind="msf-compare", family="tree:3:4", seed=2)
    c = make_config(kind="msf-compare", family="tree:3:4", seed=1, output="x.csv", threads=4)
    assert a.fingerprint() != b.fingerprint()
    assert a.fingerprint() == c.fingerprint()


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\nkind = pc-sweep\nfamily = tree:3:4\nreplicates = 7\np_step = 0.25\n")
    cfg = load_config(path, seed=5)
    assert (cfg.kind, cfg.replicates, cfg.seed) == ("pc-sweep", 7, 5)
    assert cfg.p_grid == [0.25, 0.5, 0.75]
    assert parse_config_text("cut_radii = 1, 2\nrules = zero,forward") == {
        "cut_radii": [1, 2], "rules": ["zero", "forward"]}


@pytest.mark.parametrize("fields,bad", [
    (dict(kind="nope", family="tree:3:3"), "kind"),
    (dict(kind="msf-compare", family="tree:2:3"), "family"),
    (dict(kind="msf-compare", family="tree:3:3", replicates=0), "replicates"),
    (dict(kind="msf-compare", family="tree:3:3", seed=-1), "seed"),
    (dict(kind="pc-sweep", family="tree:3:3", p_grid=[0.5, 0.4]), "p_grid"),
    (dict(kind="pc-sweep", family="tree:3:3", p_grid=[1.5]), "p_grid"),
    (dict(kind="coupling-replay", family="tree:3:3", p=1.0), "p"),
    (dict(kind="mtp-check", family="cycle:10", rules=["teleport"]), "rules"),
    (dict(kind="ends-stats", family="tree:3:3", forest="both"), "forest"),
    (dict(family="tree:3:3"), "kind"),
])
def test_config_errors_name_the_field(fields, bad):
    with pytest.raises(ConfigError) as info:
        make_config(**fields)
    assert info.value.field == bad


def test_config_text_errors():
    with pytest.raises(ConfigError) as info:
        parse_config_text("kind = pc-sweep\ncolour = red\n")
    assert info.value.field == "colour"
    with pytest.raises(ConfigError):
        parse_config_text("replicates = many\n")
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


def test_size_limit():
    with pytest.raises(ConfigError) as info:
        make_config(kind="msf-compare", family="grid:3000:3000:box")
    assert info.value.field == "family"
    assert make_config(kind="msf-compare", family="grid:3000:3000:box", max_edges=20_000_000)


def test_run_time_family_errors():
    with pytest.raises(ConfigError):
        run_experiment(make_config(kind="msf-compare", family="grid:6:6:torus"), write=False)
    with pytest.raises(ConfigError):
        run_experiment(make_config(kind="ends-stats", family="tree:3:3", cut_radii=[3]), write=False)


def test_pc_sweep_on_large_tree():
    rec = run_experiment(make_config(kind="pc-sweep", family="tree:3:12", seed=0, replicates=100),
                         write=False)
    pc = rec.aggregate["pc_estimate"]
    assert pc is not None
    assert abs(pc - 0.5422) <= 0.05


def test_ends_stats_aggregate():
    rec = run_experiment(make_config(kind="ends-stats", family="tree:3:6", seed=2, replicates=5,
                                     cut_radii=[2]), write=False)
    agg = rec.aggregate["cut_2"]
    # every wired tree on a tree ball meets the boundary once; singletons are skipped
    assert 0 < agg["trees"] <= 5 * 3 * 2 ** 5
    assert agg["fraction_at_most_one"] == 1.0
    assert agg["histogram"] == {"1": agg["trees"]}


def test_mtp_kind():
    rec = run_experiment(make_config(kind="mtp-check", family="grid:8:8:torus", replicates=3), write=False)
    assert rec.aggregate["all_exact"]
    assert len(rec.per_replicate) == 3


def test_msf_compare_on_tree_ball():
    g = gen_tree_ball(3, 8)
    for r in range(10):
        lab = sample_labels(g, derive_seed(12, r))
        rec = msf_compare(g, lab)
        assert rec.density > 0
        assert rec.free_edges - rec.wired_edges == len(g.boundary) - 1


def test_msf_compare_single_edge():
    g = from_edges(3, [(0, 1)], center=0, boundary=[2])
    rec = msf_compare(g, labeling([0.5]))
    assert rec.density == 0.0 and rec.disagreement == 0


def test_inner_edges_half_ball():
    g = gen_tree_ball(3, 4)
    assert len(inner_edges(g)) == 3 + 6


def test_config_echo_round_trip():
    cfg = make_config(kind="pu-sweep", family="grid:8:8:box", p_grid=[0.5])
    assert ExperimentConfig(**cfg.echo()) == cfg
