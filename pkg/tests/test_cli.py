from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest
import yaml

from conftest import FIG2_TREE
from lpminer.cli import load_config, main
from lpminer.errors import ConfigError
from lpminer.log import parse_csv, parse_xes
from lpminer.pnml import read_pnml
from lpminer.tree import parse_tree, tree_automaton

DATA = Path(__file__).parent / "data"


@pytest.fixture
def run_dir(tmp_path):
    shutil.copy(DATA / "fig2.csv", tmp_path / "fig2.csv")
    shutil.copy(DATA / "fig2_mapping.yaml", tmp_path / "fig2.mapping.yaml")
    (tmp_path / "spec.yaml").write_text(yaml.safe_dump({"utilities": [{"builtin": "event_cost_sum"}]}))
    (tmp_path / "strict.yaml").write_text(yaml.safe_dump({
        "constraints": [{"builtin": "per_event_min", "params": {"property": "cost", "threshold": 100}}],
        "utilities": [{"builtin": "event_cost_sum"}],
    }))
    (tmp_path / "run.yaml").write_text(yaml.safe_dump({
        "input": "fig2.csv",
        "mapping": "fig2.mapping.yaml",
        "spec": "spec.yaml",
        "output": "out",
        "discovery": {"max_activities": 3, "top_k": 5},
    }))
    return tmp_path


def strip_stamp(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("# generated:"))


def test_discover_writes_all_outputs(run_dir, capsys):
    assert main(["discover", "--config", str(run_dir / "run.yaml")]) == 0
    out = run_dir / "out"
    report = (out / "report.txt").read_text()
    scores = json.loads((out / "scores.json").read_text())
    assert len(scores["ranking"]) == 5
    assert scores["ranking"][0]["score"] == max(r["score"] for r in scores["ranking"])
    for r in scores["ranking"]:
        stem = out / "models" / f"rank{r['rank']:02d}"
        net = read_pnml(stem.with_suffix(".pnml"))
        assert net.automaton().signature == tree_automaton(parse_tree(r["tree"])).signature
        assert stem.with_suffix(".dot").read_text().startswith("digraph")
    assert "max_activities: 3" in report and "beam_width: 200" in report  # defaults are printed
    assert "#1 2600" in capsys.readouterr().out and "#1 score=2600" in report


def test_discover_is_reproducible(run_dir):
    assert main(["discover", "--config", str(run_dir / "run.yaml")]) == 0
    first = (run_dir / "out" / "report.txt").read_text()
    first_scores = (run_dir / "out" / "scores.json").read_text()
    assert main(["discover", "--config", str(run_dir / "run.yaml"), "--output", str(run_dir / "again"), "--workers", "3"]) == 0
    assert strip_stamp((run_dir / "again" / "report.txt").read_text()) == strip_stamp(first).replace("output: out", "output: again")
    assert json.loads((run_dir / "again" / "scores.json").read_text())["ranking"] == json.loads(first_scores)["ranking"]


def test_fig2_model_scores_2100(run_dir, capsys):
    rc = main(["evaluate", "--config", str(run_dir / "run.yaml"), "--tree", FIG2_TREE, "--segments"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "score: 2100" in text
    assert "c1: [A B B C] C [A B C B B]" in text


def test_strict_constraint_removes_fig2_model(run_dir, capsys):
    rc = main(["evaluate", "--config", str(run_dir / "run.yaml"), "--spec", str(run_dir / "strict.yaml"), "--tree", FIG2_TREE])
    assert rc == 0 and "score: 0" in capsys.readouterr().out
    rc = main(["discover", "--config", str(run_dir / "run.yaml"), "--spec", str(run_dir / "strict.yaml"), "--output", str(run_dir / "strict"), "--top-k", "50"])
    assert rc == 0
    ranked = json.loads((run_dir / "strict" / "scores.json").read_text())["ranking"]
    fig2 = tree_automaton(parse_tree(FIG2_TREE)).signature
    assert all(tree_automaton(parse_tree(r["tree"])).signature != fig2 for r in ranked)
    # without the constraint the same search does rank it
    rc = main(["discover", "--config", str(run_dir / "run.yaml"), "--output", str(run_dir / "loose"), "--top-k", "2000"])
    ranked = json.loads((run_dir / "loose" / "scores.json").read_text())["ranking"]
    assert any(tree_automaton(parse_tree(r["tree"])).signature == fig2 for r in ranked)


def test_missing_input_fails_cleanly(run_dir, capsys):
    rc = main(["discover", "--config", str(run_dir / "run.yaml"), "--input", str(run_dir / "nope.csv")])
    assert rc != 0
    err = capsys.readouterr().err
    assert err.startswith("error [event_log]") and "nope.csv" in err
    assert not (run_dir / "out").exists()
    assert not list(run_dir.glob(".out*"))


def test_unknown_config_key(run_dir, capsys):
    (run_dir / "bad.yaml").write_text("input: fig2.csv\nbogus: 1\n")
    rc = main(["discover", "--config", str(run_dir / "bad.yaml")])
    err = capsys.readouterr().err
    assert rc == 2 and err.startswith("error [cli]") and "bogus" in err and "bad.yaml" in err
    with pytest.raises(ConfigError, match="bogus"):
        load_config(str(run_dir / "bad.yaml"))
    (run_dir / "bad2.yaml").write_text("discovery: {max_activities: 9}\ninput: fig2.csv\nspec: spec.yaml\noutput: o\n")
    assert main(["discover", "--config", str(run_dir / "bad2.yaml")]) == 2


def test_unsatisfied_constraint_and_empty_log(run_dir, capsys):
    (run_dir / "empty.csv").write_text("case,activity,time,id,cost,total_cost\n")
    rc = main(["evaluate", "--input", str(run_dir / "empty.csv"), "--mapping", str(run_dir / "fig2.mapping.yaml"),
               "--spec", str(run_dir / "spec.yaml"), "--tree", FIG2_TREE])
    assert rc == 0 and "score: 0" in capsys.readouterr().out


def test_segment_command(run_dir, capsys):
    assert main(["segment", "--config", str(run_dir / "run.yaml"), "--tree", FIG2_TREE]) == 0
    assert "[A B B C] C [A B C B B]" in capsys.readouterr().out


def test_export_round_trip(run_dir, capsys):
    pnml = run_dir / "m.pnml"
    assert main(["export", "--tree", FIG2_TREE, "--output", str(pnml)]) == 0
    assert main(["export", "--model", str(pnml), "--to", "dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph")
    rc = main(["evaluate", "--config", str(run_dir / "run.yaml"), "--model", str(pnml)])
    assert rc == 0 and "score: 2100" in capsys.readouterr().out


def test_gen_synthetic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["gen-synthetic", "--pattern", "seq(A, and(B, C))", "--n-traces", "20", "--noise-rate", "0", "--seed", "5"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    mapping = yaml.safe_load((tmp_path / "a.mapping.yaml").read_text())
    log = parse_csv(a.read_text(), mapping)
    assert len(log) == 20
    words = {tuple(t.activities) for t in log}
    assert words <= {tuple("ABC"), tuple("ACB")}
    x = tmp_path / "n.xes"
    assert main(["gen-synthetic", "--pattern", "seq(A,B)", "--seed", "1", "--output", str(x)]) == 0
    log = parse_xes(x.read_bytes())
    assert all(t.activities[-1] in "BXYZ" for t in log)
    assert main(["gen-synthetic", "--pattern", "seq(A,B)", "--noise-rate", "2", "--output", str(x)]) == 2
