import csv
import json

import pytest

from supported import lcl_paths
from supported.cli import main
from supported.graph import load_graph
from supported.sim import load_instances


def gen(tmp_path, *args):
    out = tmp_path / "fx"
    assert main(["gen", "--out", str(out), *args]) == 0
    return out


def summary_row(path):
    rows = list(csv.reader(path.read_text().splitlines()))
    assert rows[-2][0] == "#summary"
    return dict(zip(rows[-2][1:], rows[-1][1:])), rows


def test_gen_lower_bound_round_trip(tmp_path):
    out = gen(tmp_path, "--kind", "path-lb-C1", "--k", "2")
    g = load_graph(out / "graph.json")
    (inst,) = load_instances(out / "instances.jsonl")
    assert g.n == 10 and [v for v, b in enumerate(inst.payload) if b] == [1, 3, 5, 7]


def test_gen_random_tree_stream(tmp_path):
    out = gen(tmp_path, "--kind", "random-tree", "--n", "500", "--seed", "3")
    g = load_graph(out / "graph.json")
    insts = load_instances(out / "instances.jsonl")
    assert g.n == 500 and g.is_tree() and len(insts) == 50
    assert all(i.kind == "client-set" and len(i.payload) == 500 for i in insts)


def test_gen_bundled_spec(tmp_path):
    out = gen(tmp_path, "--kind", "lcl-mis")
    assert lcl_paths.load_spec(out / "lcl-mis.json") == lcl_paths.mis_spec()


def test_gen_unknown_kind(tmp_path):
    assert main(["gen", "--out", str(tmp_path), "--kind", "nope"]) == 2


def test_cds_tree_with_oracle(tmp_path):
    out = gen(tmp_path, "--kind", "random-tree", "--n", "300", "--count", "10", "--seed", "1")
    rep = tmp_path / "r"
    code = main(["cds-tree", "--graph", str(out / "graph.json"), "--instances", str(out / "instances.jsonl"),
                 "--k", "5", "--oracle", "--report", str(rep)])
    assert code == 0
    summary, rows = summary_row(rep.with_suffix(".csv"))
    assert len(rows) == 10 + 3
    assert float(summary["max_ratio"]) <= 2.0
    doc = json.loads(rep.with_suffix(".json").read_text())
    assert doc["summary"]["instances"] == 10 and doc["summary"]["all_valid"]


def test_empty_stream_gives_summary_only(tmp_path):
    out = gen(tmp_path, "--kind", "random-tree", "--n", "20", "--count", "0")
    rep = tmp_path / "r"
    assert main(["cds-tree", "--graph", str(out / "graph.json"), "--instances", str(out / "instances.jsonl"),
                 "--report", str(rep)]) == 0
    summary, rows = summary_row(rep.with_suffix(".csv"))
    assert len(rows) == 3 and summary["max_rounds"] == "0"


@pytest.mark.parametrize("cmd,kind,extra", [
    ("cds-tree", "random-tree", []),
    ("cds-planar", "random-planar", ["--mode", "approx39"]),
    ("cc", "random-graph", ["--scheme", "priority"]),
    ("mm", "random-tree", []),
    ("mis", "random-graph", []),
])
def test_reports_are_reproducible(tmp_path, cmd, kind, extra):
    ikind = {"cc": "precoloring", "mm": "edge-subset", "mis": "edge-subset"}.get(cmd, "client-set")
    out = gen(tmp_path, "--kind", kind, "--n", "60", "--count", "8", "--instance-kind", ikind, "--seed", "5")
    texts = []
    for run in range(2):
        rep = tmp_path / f"run{run}"
        assert main([cmd, "--graph", str(out / "graph.json"), "--instances", str(out / "instances.jsonl"),
                     "--report", str(rep), *extra]) == 0
        texts.append((rep.with_suffix(".csv").read_bytes(), rep.with_suffix(".json").read_bytes()))
    assert texts[0] == texts[1]


def test_exit_codes(tmp_path, capsys):
    out = gen(tmp_path, "--kind", "random-tree", "--n", "200", "--count", "3", "--density", "0.5")
    args = ["cds-tree", "--graph", str(out / "graph.json"), "--instances", str(out / "instances.jsonl")]
    assert main(args) == 0
    assert main(args + ["--round-cap", "1"]) == 1
    assert main(["cds-tree", "--graph", str(out / "graph.json")]) == 2
    assert main(["cds-tree", "--graph", "missing.json", "--instances", str(out / "instances.jsonl")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_config_and_flag_override(tmp_path, capsys):
    out = gen(tmp_path, "--kind", "random-tree", "--n", "200", "--count", "3", "--density", "0.5")
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"graph": str(out / "graph.json"), "instances": str(out / "instances.jsonl"),
                                "round-cap": 1}))
    assert main(["cds-tree", "--config", str(conf)]) == 1
    assert main(["cds-tree", "--config", str(conf), "--round-cap", "1000"]) == 0
    conf.write_text(json.dumps({"bogus": 1}))
    assert main(["cds-tree", "--config", str(conf)]) == 2
    capsys.readouterr()


def test_lcl_classify_and_oracle(tmp_path, capsys):
    assert main(["lcl", "--spec", "acyclic", "--action", "classify"]) == 0
    assert "ThetaN" in capsys.readouterr().out
    assert main(["lcl", "--spec", "mis", "--action", "solve", "--n", "50"]) == 0
    capsys.readouterr()
    assert main(["oracle", "--problem", "lcl-count", "--spec", "2-coloring", "--n", "4"]) == 0
    assert json.loads(capsys.readouterr().out) == {"count": 2, "n": 4}
