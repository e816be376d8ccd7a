import json

import pytest

from motiongraph.cli import main
from motiongraph.io import canonical_dumps, load_graph

def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out.strip().splitlines()
    return code, (out[-1] if out else "")


def parse_summary(line):
    import shlex

    parts = shlex.split(line)
    return parts[0], dict(p.split("=", 1) for p in parts[1:])


@pytest.fixture
def loop_corpus(tmp_path, capsys):
    poses = tmp_path / "poses.json"
    ann = tmp_path / "ann.json"
    code, _ = run(capsys, ["corpus", "--kind", "loop", "--frames", "96",
                           "--out", str(poses), "--annotations", str(ann)])
    assert code == 0
    return poses, ann


def test_build_loop_corpus(tmp_path, capsys, loop_corpus):
    poses, ann = loop_corpus
    graph = tmp_path / "graph.bin"
    stats = tmp_path / "stats.json"
    code, line = run(capsys, ["build", "--poses", str(poses), "--out", str(graph),
                              "--stats", str(stats)])
    assert code == 0
    cmd, kv = parse_summary(line)
    assert cmd == "build" and kv["status"] == "ok"
    report = json.loads(stats.read_text())
    assert report["synthetic_edges"] >= 1
    annotations = json.loads(ann.read_text())
    loop_nodes = set(range(annotations["loop_start"], annotations["n_frames"]))
    g = load_graph(graph)
    assert loop_nodes <= set(g.alive_nodes().tolist())  # zero pruned in the loop
    assert report["scc_size_histogram"]


def test_build_chain_corpus_degenerate(tmp_path, capsys):
    poses = tmp_path / "line.json"
    code, _ = run(capsys, ["corpus", "--kind", "linear", "--frames", "60", "--out", str(poses)])
    assert code == 0
    code, line = run(capsys, ["build", "--poses", str(poses), "--out", str(tmp_path / "g.bin")])
    assert code == 2
    cmd, kv = parse_summary(line)
    assert kv["status"] == "error" and kv["code"] == "2"


def test_build_rebuild_byte_identical(tmp_path, capsys, loop_corpus):
    poses, _ = loop_corpus
    g1, g2 = tmp_path / "g1.bin", tmp_path / "g2.bin"
    assert run(capsys, ["build", "--poses", str(poses), "--out", str(g1)])[0] == 0
    assert run(capsys, ["build", "--poses", str(poses), "--out", str(g2)])[0] == 0
    assert g1.read_bytes() == g2.read_bytes()


@pytest.fixture
def built(tmp_path, capsys, loop_corpus):
    poses, ann = loop_corpus
    graph = tmp_path / "graph.bin"
    assert run(capsys, ["build", "--poses", str(poses), "--out", str(graph)])[0] == 0
    return poses, ann, graph


def test_search_dp_beam_parity(tmp_path, capsys, built):
    poses, _, graph = built
    out_dp = tmp_path / "dp.json"
    out_beam = tmp_path / "beam.json"
    code, line = run(capsys, ["search", "--graph", str(graph), "--poses", str(poses),
                              "--searcher", "dp", "--frames", "40", "--out", str(out_dp),
                              "--timeline", str(tmp_path / "tl.json")])
    assert code == 0
    assert parse_summary(line)[1]["searcher"] == "dp"
    code, _ = run(capsys, ["search", "--graph", str(graph), "--poses", str(poses),
                           "--searcher", "beam", "--beam-width", "1000", "--frames", "40",
                           "--out", str(out_beam)])
    assert code == 0
    dp_doc = json.loads(out_dp.read_text())
    beam_doc = json.loads(out_beam.read_text())
    assert dp_doc["path"] == beam_doc["path"]
    assert dp_doc["cost_total"] == beam_doc["cost_total"]
    timeline = json.loads((tmp_path / "tl.json").read_text())
    assert len(timeline["frames"]) == 40


def test_keyframe_search_loop_pins(tmp_path, capsys, built):
    poses, ann, graph = built
    annotations = json.loads(ann.read_text())
    i, j = annotations["loop_pairs"][0]
    fps = annotations["fps"]
    cond = tmp_path / "cond.json"
    cond.write_text(canonical_dumps({
        "version": 1,
        "duration_s": 4.0,
        "keyframes": [{"time_s": 0.0, "frame": i}, {"time_s": (j - i) / fps, "frame": j}],
    }))
    out = tmp_path / "kf.json"
    code, line = run(capsys, ["keyframe-search", "--graph", str(graph), "--poses", str(poses),
                              "--condition", str(cond), "--d", "0.2", "--out", str(out),
                              "--timeline", str(tmp_path / "ktl.json")])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["path"][0] == i and doc["path"][-1] == j
    timeline = json.loads((tmp_path / "ktl.json").read_text())
    assert len(timeline["frames"]) == (j - i) + 1


def test_keyframe_search_infeasible_exit_3(tmp_path, capsys, built):
    poses, ann, graph = built
    annotations = json.loads(ann.read_text())
    start = annotations["loop_start"]
    cond = tmp_path / "cond.json"
    # 2 target frames apart but the pins are half a period apart: infeasible at D=0
    cond.write_text(canonical_dumps({
        "version": 1,
        "duration_s": 4.0,
        "keyframes": [{"time_s": 0.0, "frame": start},
                      {"time_s": 2.0 / annotations["fps"], "frame": start + 12}],
    }))
    code, line = run(capsys, ["keyframe-search", "--graph", str(graph), "--poses", str(poses),
                              "--condition", str(cond), "--d", "0.0",
                              "--out", str(tmp_path / "kf.json")])
    assert code == 3
    assert parse_summary(line)[1]["code"] == "3"


def test_missing_graph_file_exit_4(tmp_path, capsys, built):
    poses, _, _ = built
    code, line = run(capsys, ["search", "--graph", str(tmp_path / "nope.bin"),
                              "--poses", str(poses), "--out", str(tmp_path / "r.json")])
    assert code == 4
    cmd, kv = parse_summary(line)
    assert kv["code"] == "4"
    assert "nope.bin" in line


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["search"])  # missing required flags
    assert exc.value.code == 1
    out = capsys.readouterr()
    assert "status=error code=1" in out.out


def test_analyze_reports(tmp_path, capsys):
    poses = tmp_path / "sin.json"
    assert run(capsys, ["corpus", "--kind", "sinusoid", "--frames", "96", "--out", str(poses)])[0] == 0
    report_path = tmp_path / "report.json"
    code, line = run(capsys, ["analyze", "--poses", str(poses), "--out", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["feasibility"]["fraction"] <= 1.0
    assert report["beats"]["count"] >= 3
    assert report["velocity"]["max"] > 0


def test_corpus_deterministic_cli(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, ["corpus", "--kind", "figure_eight", "--out", str(a), "--seed", "3"])[0] == 0
    assert run(capsys, ["corpus", "--kind", "figure_eight", "--out", str(b), "--seed", "3"])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_overrides(tmp_path, capsys, loop_corpus):
    poses, _ = loop_corpus
    cfg = tmp_path / "cfg.json"
    cfg.write_text(canonical_dumps({"alpha": 1.4, "beam_width": 8}))
    graph = tmp_path / "g.bin"
    code, line = run(capsys, ["build", "--poses", str(poses), "--out", str(graph),
                              "--config", str(cfg)])
    assert code == 0
    g = load_graph(graph)
    assert g.provenance["alpha"] == 1.4
    assert g.provenance["config"]["beam_width"] == 8
    bad = tmp_path / "bad.json"
    bad.write_text(canonical_dumps({"alphaa": 1.0}))
    code, line = run(capsys, ["build", "--poses", str(poses), "--out", str(graph),
                              "--config", str(bad)])
    assert code == 4
