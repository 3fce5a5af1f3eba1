import csv
import json
import subprocess
import sys

import pytest

from genlink.cli import history_path, main
from genlink.data import load_links
from genlink.harness import read_summary
from genlink.rules import Transform, parse, walk

FAST = ["--population", "60", "--iterations", "3", "--no-timing"]


def run(argv, capsys):
    code = main(["-q"] + argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_learn_writes_rule_and_history(tmp_path, capsys):
    rule_path = tmp_path / "rule.txt"
    code, out, _ = run(["learn", "--synthetic", "persons", "--out", str(rule_path)] + FAST, capsys)
    assert code == 0
    info = json.loads(out)
    rule = parse(rule_path.read_text())
    with open(history_path(rule_path)) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == info["iterations"] + 1
    assert [int(r["iteration"]) for r in rows] == list(range(len(rows)))
    code, out, _ = run(["eval", "--synthetic", "persons", "--rule", str(rule_path)], capsys)
    assert code == 0
    assert json.loads(out)["f1"] == pytest.approx(info["train_f1"])
    assert rule is not None


def test_learn_boolean_mode(tmp_path, capsys):
    rule_path = tmp_path / "rule.txt"
    code, _, _ = run(["learn", "--synthetic", "case-noise", "--mode", "boolean",
                      "--out", str(rule_path)] + FAST, capsys)
    assert code == 0
    rule = parse(rule_path.read_text())
    assert not any(isinstance(n, Transform) for _, n in walk(rule.root))


def test_learn_missing_links(tmp_path, capsys):
    a = tmp_path / "a.csv"
    a.write_text("id,name\n1,x\n")
    code, _, err = run(["learn", "--source-a", str(a), "--links", str(tmp_path / "none.csv"),
                        "--out", str(tmp_path / "r.txt")], capsys)
    assert code == 1
    assert "cannot read" in err


def test_learn_same_seed_byte_identical(tmp_path, capsys, monkeypatch):
    paths = [tmp_path / "r1.txt", tmp_path / "r2.txt"]
    for p in paths:
        assert run(["learn", "--synthetic", "persons", "--seed", "5", "--out", str(p)] + FAST, capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert history_path(paths[0]).read_bytes() == history_path(paths[1]).read_bytes()


def test_env_seed_overrides_flag(tmp_path, capsys, monkeypatch):
    base = ["learn", "--synthetic", "persons", "--out"]
    run(base + [str(tmp_path / "a.txt"), "--seed", "3"] + FAST, capsys)
    monkeypatch.setenv("GENLINK_SEED", "3")
    run(base + [str(tmp_path / "b.txt"), "--seed", "99"] + FAST, capsys)
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    monkeypatch.setenv("GENLINK_SEED", "nope")
    assert run(base + [str(tmp_path / "c.txt")] + FAST, capsys)[0] == 1


def toy_sources(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("id,name\na1,Berlin\na2,Paris\n")
    b.write_text("id,name\nb1,Paris\nb2,Rome\n")
    return a, b


EXACT = """genlink-rule v1
compare(measure=levenshtein, threshold=0.0, weight=1.0) {
  left { property(source=A, name=name) }
  right { property(source=B, name=name) }
}
"""


def test_match_exact_rule(tmp_path, capsys):
    a, b = toy_sources(tmp_path)
    rule = tmp_path / "r.txt"
    rule.write_text(EXACT)
    out = tmp_path / "links.csv"
    code, _, _ = run(["match", "--source-a", str(a), "--source-b", str(b), "--rule", str(rule),
                      "--out", str(out)], capsys)
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["source_id"], r["target_id"]) for r in rows] == [("a2", "b1")]
    assert all(0.0 <= float(r["score"]) <= 1.0 for r in rows)
    assert load_links(out) == [("a2", "b1", "+")]


def test_match_nothing_writes_header(tmp_path, capsys):
    a, b = toy_sources(tmp_path)
    rule = tmp_path / "r.txt"
    rule.write_text(EXACT.replace("name=name) }\n  right", "name=absent) }\n  right"))
    out = tmp_path / "links.csv"
    assert run(["match", "--source-a", str(a), "--source-b", str(b), "--rule", str(rule),
                "--out", str(out)], capsys)[0] == 0
    assert out.read_text() == "source_id,target_id,score\n"


def test_match_self_join_skips_identity(tmp_path, capsys):
    a = tmp_path / "a.csv"
    a.write_text("id,name\n1,x\n2,x\n3,y\n")
    rule = tmp_path / "r.txt"
    rule.write_text(EXACT)
    out = tmp_path / "links.csv"
    assert run(["match", "--source-a", str(a), "--rule", str(rule), "--out", str(out)], capsys)[0] == 0
    assert [r[:2] for r in load_links(out)] == [("1", "2"), ("2", "1")]


def test_match_bad_rule(tmp_path, capsys):
    a, b = toy_sources(tmp_path)
    rule = tmp_path / "r.txt"
    rule.write_text(EXACT.replace("levenshtein", "soundex"))
    code, _, err = run(["match", "--source-a", str(a), "--source-b", str(b), "--rule", str(rule),
                        "--out", str(tmp_path / "o.csv")], capsys)
    assert code == 1
    assert "unknown distance function" in err


def test_eval_prints_one_json_line(tmp_path, capsys):
    a, b = toy_sources(tmp_path)
    links = tmp_path / "l.csv"
    links.write_text("a2,b1,+\na1,b2,-\n")
    rule = tmp_path / "r.txt"
    rule.write_text(EXACT)
    code, out, _ = run(["eval", "--source-a", str(a), "--source-b", str(b), "--links", str(links),
                        "--rule", str(rule)], capsys)
    assert code == 0
    assert out.count("\n") == 1
    assert json.loads(out) == {"precision": 1.0, "recall": 1.0, "f1": 1.0,
                               "tp": 1, "fp": 0, "tn": 1, "fn": 0}


def test_bench_default(tmp_path, capsys):
    out = tmp_path / "bench"
    code, _, _ = run(["bench", "--synthetic", "movies", "--runs", "2", "--out", str(out)] + FAST, capsys)
    assert code == 0
    rows = read_summary(out / "summary.csv")
    assert len(rows) == 3 + 1
    assert len(list((out / "rules").glob("*.txt"))) == 4
    for p in (out / "rules").glob("*.txt"):
        parse(p.read_text())


def test_bench_byte_identical(tmp_path, capsys):
    outs = [tmp_path / "b1", tmp_path / "b2"]
    for o in outs:
        run(["bench", "--synthetic", "persons", "--runs", "2", "--seed", "1", "--out", str(o)] + FAST, capsys)
    for name in ("summary.csv", "cells.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_bench_seeding_axis(tmp_path, capsys):
    out = tmp_path / "bench"
    code, _, _ = run(["bench", "--synthetic", "wide", "--axis", "seeding", "--runs", "2",
                      "--out", str(out)] + FAST, capsys)
    assert code == 0
    lines = (out / "ablation_seeding.csv").read_text().splitlines()
    assert lines[0] == "seeding,random,seeded"
    assert [l.split(",")[0] for l in lines[1:]] == ["mean", "sd"]


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "genlink.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "learn" in proc.stdout and "bench" in proc.stdout


def test_invariant_violation_exit_code(tmp_path, capsys, monkeypatch):
    from genlink import cli
    from genlink.rules import ValidationReport

    broken = ValidationReport()
    broken.add((), "forced failure")
    monkeypatch.setattr(cli, "validate", lambda rule: broken)
    code, _, err = run(["learn", "--synthetic", "movies", "--out", str(tmp_path / "r.txt")] + FAST, capsys)
    assert code == 2
    assert "internal error" in err
