"""End-to-end command-line behavior: records, determinism, exit codes."""

import json

import numpy as np
import pytest

from linklabel import generate_planted, write_edge_list
from linklabel.cli import main


G1_TEXT = (
    "i x +\n"
    "w1 x +\n"
    "w1 j +\n"
    "w2 x +\n"
    "w2 j -\n"
    "w3 x +\n"
    "w3 j +\n"
)


@pytest.fixture
def g1_file(tmp_path):
    p = tmp_path / "g1.txt"
    p.write_text(G1_TEXT)
    return p


@pytest.fixture(scope="module")
def planted_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "planted.txt"
    g, _ = generate_planted(50, 3, 0.2, 0.1, seed=3)
    write_edge_list(g, p)
    return p


def run_lines(capsys, argv):
    """main() + parsed stdout JSONL."""
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, [json.loads(line) for line in out.splitlines() if line]


# -- stats and convert -----------------------------------------------------------

def test_stats_jsonl(capsys, g1_file):
    rc, recs = run_lines(capsys, ["stats", "--input", str(g1_file)])
    assert rc == 0
    meta, stats = recs
    assert meta["record"] == "meta" and meta["command"] == "stats"
    assert len(meta["inputs"]["input"]) == 64       # sha256 hex digest
    assert stats["nodes"] == 6 and stats["edges"] == 7
    assert stats["label_counts"] == [6, 1]


def test_stats_output_file_plus_human(capsys, g1_file, tmp_path):
    out = tmp_path / "stats.jsonl"
    rc = main(["stats", "--input", str(g1_file), "--output", str(out)])
    assert rc == 0
    human = capsys.readouterr().out
    assert "nodes 6" in human
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert lines[0]["record"] == "meta" and lines[1]["record"] == "stats"


def test_stats_deterministic_bytes(g1_file, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["stats", "--input", str(g1_file), "--output", str(a)]) == 0
    assert main(["stats", "--input", str(g1_file), "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_convert_normalizes(capsys, tmp_path):
    src = tmp_path / "raw.txt"
    src.write_text("b a +1\nb a -1\nc c +\na b 1\n")
    out = tmp_path / "norm.txt"
    assert main(["convert", "--input", str(src), "--output", str(out)]) == 0
    text = out.read_text()
    assert "b a -" in text and "a b +" in text and "c c" not in text
    assert "# node c" in text                      # loop endpoint survives
    msg = capsys.readouterr().out
    assert "dropped 1 self-loops" in msg and "collapsed 1 duplicates" in msg


def test_convert_requires_output(capsys, g1_file):
    assert main(["convert", "--input", str(g1_file)]) == 1
    assert "error:" in capsys.readouterr().err


# -- cluster ------------------------------------------------------------------------

def test_cluster_records_and_partition(capsys, planted_file, tmp_path):
    part_out = tmp_path / "part.txt"
    rc, recs = run_lines(capsys, [
        "cluster", "--input", str(planted_file), "--clusters", "3",
        "--restarts", "2", "--partition-out", str(part_out)])
    assert rc == 0
    sweeps = [r for r in recs if r["record"] == "sweep"]
    phis = [r["phi"] for r in sweeps]
    assert sweeps[0]["sweep"] == 0
    assert all(b <= a + 1e-9 for a, b in zip(phis, phis[1:]))
    result = recs[-1]
    assert result["record"] == "result"
    assert result["phi"] == pytest.approx(phis[-1])
    assert sum(result["cluster_sizes"]) == 50
    lines = part_out.read_text().splitlines()
    assert lines[0] == "# clusters 3" and len(lines) == 51


def test_cluster_deterministic(planted_file, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    argv = ["cluster", "--input", str(planted_file), "--clusters", "3", "--seed", "5"]
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cluster_k_above_node_count_fails(capsys, g1_file):
    assert main(["cluster", "--input", str(g1_file), "--clusters", "30"]) == 1
    assert "exceeds node count" in capsys.readouterr().err


# -- predict -------------------------------------------------------------------------

def test_predict_worked_example(capsys, g1_file, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("i j\nj i\n")
    rc, recs = run_lines(capsys, [
        "predict", "--input", str(g1_file), "--queries", str(q),
        "--model", "ltlgm"])
    assert rc == 0
    meta, first, second = recs
    assert meta["config"]["model"] == "ltlgm"
    assert first["src"] == "i" and first["dst"] == "j"
    assert first["label"] == "+" and first["fallback"] is False
    assert first["probs"]["+"] == pytest.approx(2 / 3)
    # j has no out-edges: undefined, prior fallback, prior = 6/7 positive.
    assert second["fallback"] is True and second["label"] == "+"
    assert second["probs"]["+"] == pytest.approx(6 / 7)


def test_predict_verbose_support(capsys, g1_file, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("i j\n")
    rc, recs = run_lines(capsys, [
        "predict", "--input", str(g1_file), "--queries", str(q),
        "--model", "stlgm", "--clusters", "2", "--verbose"])
    assert rc == 0
    support = recs[1]["support"]
    assert support and support[0]["head"] == "x" and support[0]["label"] == "+"
    assert support[0]["n_local"] == 3


def test_predict_precomputed_matches_on_demand(capsys, g1_file, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("i j\nw1 w2\n")
    base = ["predict", "--input", str(g1_file), "--queries", str(q),
            "--model", "lcgm"]
    _, on_demand = run_lines(capsys, base)
    _, pre = run_lines(capsys, base + ["--nam-strategy", "precomputed"])
    assert on_demand[1:] == pre[1:]


def test_predict_rejects_unknown_query_node(capsys, g1_file, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("i nobody\n")
    assert main(["predict", "--input", str(g1_file), "--queries", str(q),
                 "--model", "ltlgm"]) == 1
    assert "not in training graph" in capsys.readouterr().err


def test_predict_rejects_unknown_model(capsys, g1_file, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("i j\n")
    assert main(["predict", "--input", str(g1_file), "--queries", str(q),
                 "--model", "oracle"]) == 1


def test_predict_partition_file_reused(capsys, planted_file, tmp_path):
    part = tmp_path / "part.txt"
    assert main(["cluster", "--input", str(planted_file), "--clusters", "3",
                 "--partition-out", str(part), "--output", str(tmp_path / "c.jsonl")]) == 0
    capsys.readouterr()                      # drop the cluster run's summary
    q = tmp_path / "q.txt"
    q.write_text("00 01\n")
    rc, recs = run_lines(capsys, [
        "predict", "--input", str(planted_file), "--queries", str(q),
        "--model", "gtlgm", "--partition-file", str(part)])
    assert rc == 0
    assert "partition" in recs[0]["inputs"]
    assert "clustering" not in recs[0]["config"]


# -- evaluate --------------------------------------------------------------------------

def test_evaluate_records(capsys, planted_file):
    rc, recs = run_lines(capsys, [
        "evaluate", "--input", str(planted_file), "--model", "ltlgm",
        "--folds", "5"])
    assert rc == 0
    assert recs[0]["record"] == "meta"
    assert recs[0]["config"]["folds"] == 5
    assert recs[0]["config"]["stratified"] is False
    folds = [r for r in recs if r["record"] == "fold"]
    total = recs[-1]
    assert len(folds) == 5 and total["record"] == "total"
    assert sum(r["test_edges"] for r in folds) == total["test_edges"]
    assert 0.0 <= total["balanced_accuracy"] <= 1.0


def test_evaluate_thread_count_never_changes_bytes(planted_file, tmp_path):
    outs = []
    for name, threads in (("t1.jsonl", "1"), ("t4.jsonl", "4")):
        out = tmp_path / name
        assert main(["evaluate", "--input", str(planted_file), "--model", "stlgm",
                     "--clusters", "3", "--restarts", "2", "--folds", "5",
                     "--threads", threads, "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_evaluate_stratified_flag(capsys, planted_file):
    rc, recs = run_lines(capsys, [
        "evaluate", "--input", str(planted_file), "--model", "prior",
        "--folds", "4", "--stratified"])
    assert rc == 0
    assert recs[0]["config"]["stratified"] is True


# -- sweep and samples-cdf ----------------------------------------------------------------

def test_sweep_grid(capsys, planted_file):
    rc, recs = run_lines(capsys, [
        "sweep", "--input", str(planted_file), "--model", "prior,ltlgm",
        "--densities", "0.5,1.0", "--folds", "4"])
    assert rc == 0
    rows = [r for r in recs if r["record"] == "sweep"]
    assert [(r["density"], r["model"]) for r in rows] == [
        (0.5, "prior"), (0.5, "ltlgm"), (1.0, "prior"), (1.0, "ltlgm")]
    assert recs[0]["config"]["models"] == ["prior", "ltlgm"]


def test_samples_cdf_records(capsys, planted_file):
    rc, recs = run_lines(capsys, [
        "samples-cdf", "--input", str(planted_file), "--model", "ltlgm",
        "--thresholds", "1,4,16", "--folds", "5"])
    assert rc == 0
    cdf = [r for r in recs if r["record"] == "cdf"]
    assert [r["threshold"] for r in cdf] == [1, 4, 16]
    fracs = [r["fraction_below"] for r in cdf]
    assert all(b >= a for a, b in zip(fracs, fracs[1:]))
    summary = [r for r in recs if r["record"] == "summary"][0]
    assert summary["total_parameters"] > 0


# -- update ----------------------------------------------------------------------------

def test_update_merges_like_concatenation(capsys, g1_file, tmp_path):
    batch = tmp_path / "batch.txt"
    batch.write_text("i j +\nw1 j -\nn1 x +\nn1 n2 -\n")
    merged = tmp_path / "merged.txt"
    rc, recs = run_lines(capsys, [
        "update", "--input", str(g1_file), "--batch", str(batch),
        "--clusters", "2", "--out-edges", str(merged)])
    assert rc == 0
    b = [r for r in recs if r["record"] == "batch"][0]
    assert b["added"] == 3 and b["relabeled"] == 1 and b["new_nodes"] == 2
    assert b["nodes"] == 8 and b["edges"] == 10

    # The merged list must equal plain concatenate-then-normalize.
    combined = tmp_path / "combined.txt"
    combined.write_text(G1_TEXT + batch.read_text())
    q = tmp_path / "q.txt"
    q.write_text("i j\nn1 x\n")
    preds = []
    for source in (merged, combined):
        _, recs = run_lines(capsys, [
            "predict", "--input", str(source), "--queries", str(q),
            "--model", "ltlgm"])
        preds.append(recs[1:])
    assert preds[0] == preds[1]


def test_update_snapshots_written(capsys, g1_file, tmp_path):
    batch = tmp_path / "batch.txt"
    batch.write_text("i j -\n")
    nam_p, cam_p = tmp_path / "t.nam", tmp_path / "t.cam"
    part_p = tmp_path / "part.txt"
    rc, _ = run_lines(capsys, [
        "update", "--input", str(g1_file), "--batch", str(batch),
        "--clusters", "2", "--out-nam", str(nam_p), "--out-cam", str(cam_p),
        "--out-partition", str(part_p)])
    assert rc == 0
    assert nam_p.read_text().startswith("nam-snapshot v1\nnodes 6 labels 2\n")
    assert cam_p.read_text().startswith("cam-snapshot v1\nclusters 2 labels 2\n")
    assert len(part_p.read_text().splitlines()) == 7


def test_update_no_intern_rejects_new_nodes(capsys, g1_file, tmp_path):
    batch = tmp_path / "batch.txt"
    batch.write_text("stranger x +\n")
    assert main(["update", "--input", str(g1_file), "--batch", str(batch),
                 "--clusters", "2", "--no-intern"]) == 1
    assert "stranger" in capsys.readouterr().err


def test_update_rejects_bad_batch_line(capsys, g1_file, tmp_path):
    batch = tmp_path / "batch.txt"
    batch.write_text("i x ?\n")
    assert main(["update", "--input", str(g1_file), "--batch", str(batch),
                 "--clusters", "2"]) == 1


# -- config file, exit codes, help ----------------------------------------------------

def test_config_file_supplies_defaults(capsys, planted_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("folds=4\nmu=0.25\nlambda-mode=paper\n")
    rc, recs = run_lines(capsys, [
        "evaluate", "--input", str(planted_file), "--model", "ltlgm",
        "--config", str(cfg)])
    assert rc == 0
    assert recs[0]["config"]["folds"] == 4
    assert recs[0]["config"]["mu"] == 0.25
    assert recs[0]["config"]["lambda_mode"] == "paper"


def test_explicit_flag_beats_config_file(capsys, planted_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("folds=4\nmu=0.25\n")
    rc, recs = run_lines(capsys, [
        "evaluate", "--input", str(planted_file), "--model", "ltlgm",
        "--config", str(cfg), "--mu", "2.0"])
    assert rc == 0
    assert recs[0]["config"]["mu"] == 2.0 and recs[0]["config"]["folds"] == 4


def test_config_file_rejects_bad_line(capsys, planted_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("this is not a pair\n")
    assert main(["stats", "--input", str(planted_file), "--config", str(cfg)]) == 1


def test_missing_input_exits_one(capsys):
    assert main(["stats", "--input", "/nonexistent/file.txt"]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--mu" in out and "default: 4.0" in out
    assert "--folds" in out and "default: 10" in out
