import json

import pytest

from polyparse.cli import load_config, main, parse_strategy
from polyparse.conllu import parse_conllu, read_conllu
from polyparse.evaluation import read_grid_csv
from polyparse.model import ConfigError
from polyparse.strategy import Mode, SharingStrategy

TINY = """\
languages: aa,ab
epochs: 1
sample_size: 8
word_dim: 8
char_dim: 4
char_hidden: 4
word_hidden: 6
mlp_hidden: 8
lang_dim: 2
shuffles: 200
"""

MWT_DOC = """\
# sent_id = m1
# text = della casa
1-2\tdella\t_\t_\t_\t_\t_\t_\t_\t_
1\tdi\tdi\tADP\t_\t_\t3\tcase\t_\t_
2\tla\til\tDET\t_\t_\t3\tdet\t_\t_
3\tcasa\tcasa\tNOUN\t_\tGender=Fem\t0\troot\t_\tSpaceAfter=No

"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "-o", str(root / "data"), "--train", "16", "--dev", "6", "--test", "6", "--vocab", "12"]) == 0
    (root / "tiny.yaml").write_text(TINY + f"data_dir: {root / 'data'}\n", encoding="utf-8")
    return root


@pytest.fixture(scope="module")
def trained(workspace):
    out = workspace / "bi"
    code = main(["train", "-c", str(workspace / "tiny.yaml"), "--strategy", "C=h,W=id,S=h", "-o", str(out)])
    assert code == 0
    return out


def test_strategy_notation_round_trip():
    s = parse_strategy("C=x,W=h,S=id")
    assert s == SharingStrategy(Mode.SEPARATE, Mode.HARD, Mode.SOFT)
    assert parse_strategy(str(s)) == s
    assert parse_strategy("mono") == SharingStrategy()
    with pytest.raises(ConfigError):
        parse_strategy("C=x,W=q,S=id")


def test_flags_override_file(workspace):
    cfg = load_config(str(workspace / "tiny.yaml"), ["epochs=3", "seeds=[1, 2]"], {"epochs": 5, "output": "x"})
    assert cfg["epochs"] == 5
    assert cfg["seeds"] == [1, 2]
    assert cfg["languages"] == ["aa", "ab"]
    assert load_config(str(workspace / "tiny.yaml"), ["epochs=3"])["epochs"] == 3


def test_config_errors_exit_2(workspace, tmp_path, capsys):
    nested = tmp_path / "nested.yaml"
    nested.write_text("train:\n  es: a.conllu\n", encoding="utf-8")
    assert main(["train", "-c", str(nested)]) == 2
    assert main(["train", "-c", str(workspace / "tiny.yaml"), "--set", "bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["train", "-c", str(tmp_path / "absent.yaml")]) == 2
    assert main(["no-such-command"]) == 2
    assert main(["train", "-c", str(workspace / "tiny.yaml"), "--strategy", "C=z"]) == 2


def test_missing_dev_file_names_path(workspace, capsys):
    missing = workspace / "nowhere" / "aa-dev.conllu"
    code = main(["train", "-c", str(workspace / "tiny.yaml"), "--languages", "aa", "--set", f"dev.aa={missing}",
                 "-o", str(workspace / "never")])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_runtime_failure_exit_1(workspace, tmp_path):
    bad = tmp_path / "bad.conllu"
    bad.write_text("1\tx\t_\t_\t_\t_\tzz\troot\t_\t_\n\n", encoding="utf-8")
    assert main(["stats", str(bad)]) == 1


def test_train_artifacts(trained):
    for name in ("model.npz", "train_report.jsonl", "manifest.json", "result.json", "pred-dev-aa.conllu"):
        assert (trained / name).is_file()
    manifest = json.loads((trained / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["strategy"] == "C=h,W=id,S=h"
    assert len(manifest["inputs"]) == 6
    assert all(len(h) == 64 for h in manifest["inputs"].values())


def test_mono_train(workspace):
    out = workspace / "mono"
    assert main(["train", "-c", str(workspace / "tiny.yaml"), "--languages", "aa", "-o", str(out)]) == 0
    result = json.loads((out / "result.json").read_text(encoding="utf-8"))
    assert result["strategy"] == "C=x,W=x,S=x"
    assert list(result["dev"]) == ["aa"]


def test_checkpoint_is_byte_identical_in_64_bit_mode(workspace):
    paths = []
    for k in range(2):
        out = workspace / f"det{k}"
        assert main(["train", "-c", str(workspace / "tiny.yaml"), "--languages", "ab", "--set", "deterministic=true",
                     "-o", str(out)]) == 0
        paths.append(out / "model.npz")
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_parse_is_idempotent_and_valid(workspace, trained, tmp_path):
    src = workspace / "data" / "ab-test.conllu"
    outs = []
    for k in range(2):
        out = tmp_path / f"p{k}.conllu"
        assert main(["parse", "-m", str(trained / "model.npz"), "-l", "ab", "-i", str(src), "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    parsed = read_conllu(tmp_path / "p0.conllu", "ab")  # validates trees
    gold = read_conllu(src, "ab")
    assert [s.forms for s in parsed] == [s.forms for s in gold]


def test_parse_keeps_comments_and_multiword_lines(trained, tmp_path):
    src = tmp_path / "mwt.conllu"
    src.write_text(MWT_DOC, encoding="utf-8")
    out = tmp_path / "mwt.out"
    assert main(["parse", "-m", str(trained / "model.npz"), "-l", "aa", "-i", str(src), "-o", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[:3] == MWT_DOC.splitlines()[:3]
    for a, b in zip(lines[3:6], MWT_DOC.splitlines()[3:6]):
        ca, cb = a.split("\t"), b.split("\t")
        assert ca[:6] == cb[:6] and ca[8:] == cb[8:]
    parse_conllu(out.read_text(encoding="utf-8"), "aa")


def test_parse_unknown_language(trained, workspace):
    code = main(["parse", "-m", str(trained / "model.npz"), "-l", "qq", "-i", str(workspace / "data" / "aa-dev.conllu")])
    assert code == 2


def test_eval_and_significance(trained, workspace, capsys):
    gold = workspace / "data" / "aa-dev.conllu"
    pred = trained / "pred-dev-aa.conllu"
    assert main(["eval", "-g", str(gold), "-p", str(pred), "--pred-b", str(pred), "--shuffles", "100"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split("\t") == ["system", "UAS", "LAS", "tokens"]
    assert out[-1] == "p\t1.0000"
    assert main(["eval", "-g", str(gold), "-p", str(gold)]) == 0
    assert "100.00\t100.00" in capsys.readouterr().out


def test_stats_and_trace(workspace, capsys):
    path = workspace / "data" / "aa-train.conllu"
    assert main(["stats", str(path)]) == 0
    row = capsys.readouterr().out.splitlines()[1].split("\t")
    sents = read_conllu(path, "aa")
    assert int(row[1]) == len(sents) and int(row[2]) == sum(len(s) for s in sents)
    assert main(["oracle-trace", str(path), "-s", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "step\tstack\tbuffer\ttransition\tcost"
    assert all(len(l.split("\t")) == 5 and l.endswith("\t0") for l in lines[1:])
    assert main(["oracle-trace", str(path), "-s", "999"]) == 2


def test_grid_schedules_29_jobs(workspace, capsys):
    assert main(["grid", "-c", str(workspace / "tiny.yaml"), "--dry-run"]) == 0
    jobs = capsys.readouterr().out.splitlines()
    assert len(jobs) == 29
    assert sum(j.startswith("mono-") for j in jobs) == 2


def test_ours_schedules_ten_jobs_per_target(workspace, capsys):
    assert main(["ours", "-c", str(workspace / "tiny.yaml"), "--target", "ab", "--dry-run"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 10
    assert main(["ours", "-c", str(workspace / "tiny.yaml"), "--target", "zz", "--dry-run"]) == 2
    assert main(["ours", "-c", str(workspace / "tiny.yaml"), "--languages", "aa", "--dry-run"]) == 2


def test_grid_report_files(workspace):
    out = workspace / "grid"
    assert main(["grid", "-c", str(workspace / "tiny.yaml"), "-o", str(out), "-j", "2"]) == 0
    text = (out / "grid.txt").read_text(encoding="utf-8").splitlines()
    assert len(text) == 2 + 27 + 2
    assert text[2].startswith("Mono") and text[3].startswith("Language-best")
    report = read_grid_csv((out / "grid.csv").read_text(encoding="utf-8"))
    assert len(report.rows) == 27
    assert (out / "grid.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(list((out / "cells").glob("*/model.npz"))) == 29


def test_ours_report(workspace):
    out = workspace / "ours"
    assert main(["ours", "-c", str(workspace / "tiny.yaml"), "-o", str(out), "--target", "aa"]) == 0
    rows = (out / "ours.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "language,W,C,Ours,Mono,delta,p"
    lang, w, c, ours, mono, delta, p = rows[1].split(",")
    assert lang == "aa"
    assert float(delta) == pytest.approx(float(ours) - float(mono), abs=1e-3)
    assert 0 < float(p) <= 1
    selection = json.loads((out / "selection.json").read_text(encoding="utf-8"))
    assert len(selection["aa"]["dev"]) == 9
