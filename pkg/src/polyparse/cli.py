"""Command-line entry point.

Experiments are described by one flat YAML mapping; ``--set key=value`` and
the explicit flags override file keys.  Treebank paths use dotted keys
(``train.es``, ``dev.es``, ``test.es``) or fall back to
``<data_dir>/<lang>-<split>.conllu``.  Every command that writes artifacts
also writes ``manifest.json`` with the resolved config and input hashes.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import __version__
from . import autodiff as ad
from .conllu import ConlluError, read_conllu, serialize_conllu, treebank_stats, write_conllu
from .evaluation import (
    EvaluationError, OursRow, ScoredRun, fmt1, grid_report, nine_cells, ours_table,
    randomization_test, select_strategy,
)
from .model import ConfigError, ModelDims, Parser
from .strategy import MONO, SharingStrategy, all_strategies
from .synthetic import pair_splits
from .training import TrainConfig, parse_all, train
from .transitions import trace_lines

log = logging.getLogger("polyparse")

SPLITS = ("train", "dev", "test")

DEFAULTS: dict[str, Any] = {
    "languages": [],
    "strategy": "mono",
    "data_dir": None,
    "output": "runs/experiment",
    "sample_size": 5000,
    "seeds": [1],
    "epochs": 30,
    "word_dropout": 0.25,
    "explore_from": 2,
    "explore_prob": 0.1,
    "margin": 1.0,
    "optimizer": "adam",
    "learning_rate": 1e-3,
    "target_train_las": None,
    "jobs": 1,
    "deterministic": False,
    "shuffles": 10_000,
    "target": None,
    **{f.name: f.default for f in fields(ModelDims)},
}
_DIM_KEYS = {f.name for f in fields(ModelDims)}


# ---------------------------------------------------------------------------
# configuration


def _listify(v) -> list:
    if v is None:
        return []
    if isinstance(v, str):
        return [x for x in (p.strip() for p in v.split(",")) if x]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


def load_config(path: str | None, overrides: Sequence[str] = (), flags: dict | None = None) -> dict:
    """Merge defaults, the config file, ``--set`` pairs and explicit flags, in that order."""
    cfg = dict(DEFAULTS)
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        doc = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{p}: expected a key-value mapping")
        for k, v in doc.items():
            if isinstance(v, dict):
                raise ConfigError(f"{p}: key {k!r} is nested; use flat dotted keys such as train.es")
        cfg.update(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg[k.strip()] = yaml.safe_load(v)
    for k, v in (flags or {}).items():
        if v is not None:
            cfg[k] = v
    if "seed" in cfg:
        cfg["seeds"] = _listify(cfg.pop("seed"))
    cfg["languages"] = [str(x) for x in _listify(cfg["languages"])]
    cfg["seeds"] = [int(s) for s in _listify(cfg["seeds"])]
    known = set(DEFAULTS) | {f"{s}.{l}" for s in SPLITS for l in cfg["languages"]}
    unknown = sorted(k for k in cfg if k not in known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if not cfg["seeds"]:
        raise ConfigError("need at least one seed")
    if int(cfg["jobs"]) < 1:
        raise ConfigError("jobs must be at least 1")
    return cfg


def treebank_path(cfg: dict, split: str, lang: str, required: bool = True) -> Path | None:
    key = f"{split}.{lang}"
    if cfg.get(key):
        path = Path(cfg[key])
    elif cfg.get("data_dir"):
        path = Path(cfg["data_dir"]) / f"{lang}-{split}.conllu"
    else:
        if required:
            raise ConfigError(f"no {split} treebank configured for {lang} (set {key} or data_dir)")
        return None
    if not path.is_file():
        if required:
            raise ConfigError(f"{split} treebank for {lang} not found: {path}")
        return None
    return path


def parse_strategy(text: str) -> SharingStrategy:
    if str(text).strip().lower() == "mono":
        return MONO
    try:
        return SharingStrategy.parse(str(text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def train_config(cfg: dict, strategy: SharingStrategy, languages: Sequence[str], seed: int) -> TrainConfig:
    dims = ModelDims(**{k: cfg[k] for k in _DIM_KEYS})
    return TrainConfig(
        strategy=strategy, languages=tuple(languages), sample_size=int(cfg["sample_size"]),
        epochs=int(cfg["epochs"]), seed=seed, word_dropout=float(cfg["word_dropout"]),
        explore_from=int(cfg["explore_from"]), explore_prob=float(cfg["explore_prob"]),
        margin=float(cfg["margin"]), optimizer=str(cfg["optimizer"]),
        learning_rate=float(cfg["learning_rate"]), dims=dims,
        target_train_las=cfg["target_train_las"],
    )


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out: Path, command: str, cfg: dict, inputs: Sequence[Path]) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "numpy": np.__version__,
        "float": "float64" if ad.default_dtype() == np.float64 else "float32",
        "config": {k: cfg[k] for k in sorted(cfg)},
        "inputs": {str(p): sha256(p) for p in sorted(set(inputs), key=str)},
    }
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def _apply_precision(cfg: dict) -> None:
    if cfg.get("deterministic"):
        ad.set_default_dtype(np.float64)


# ---------------------------------------------------------------------------
# jobs


@dataclass
class Job:
    """One training run: a strategy on one or two languages with one seed."""

    name: str
    strategy: str
    languages: list[str]
    seed: int
    out: str
    paths: dict[str, str] = field(default_factory=dict)
    cfg: dict = field(default_factory=dict)


def cell_name(strategy: SharingStrategy) -> str:
    c, w, s = strategy.symbols(ascii=True)
    return f"C-{c}_W-{w}_S-{s}"


def run_job(job: Job) -> dict:
    """Train, then parse dev (and test when present) with the best epoch."""
    _apply_precision(job.cfg)
    out = Path(job.out)
    out.mkdir(parents=True, exist_ok=True)
    result = {"name": job.name, "strategy": job.strategy, "seed": job.seed, "dev": {}, "test": {}, "error": None}
    try:
        data = {
            (split, lang): read_conllu(job.paths[f"{split}.{lang}"], lang)
            for split in SPLITS for lang in job.languages if f"{split}.{lang}" in job.paths
        }
        config = train_config(job.cfg, parse_strategy(job.strategy), job.languages, job.seed)
        model, _ = train(
            config,
            {l: data[("train", l)] for l in job.languages},
            {l: data[("dev", l)] for l in job.languages},
            out / "model.npz",
            out / "train_report.jsonl",
        )
        for split in ("dev", "test"):
            for lang in job.languages:
                if (split, lang) not in data:
                    continue
                pred = parse_all(model, data[(split, lang)], lang)
                path = out / f"pred-{split}-{lang}.conllu"
                write_conllu(path, pred)
                run = ScoredRun.from_sentences(data[(split, lang)], pred, lang, job.strategy)
                result[split][lang] = run.las
                result[f"{split}_path"] = result.get(f"{split}_path", {}) | {lang: str(path)}
    except Exception as exc:  # recorded per cell; the report marks the cell missing
        result["error"] = f"{type(exc).__name__}: {exc}"
        (out / "error.txt").write_text(traceback.format_exc(), encoding="utf-8")
        log.error("job %s failed: %s", job.name, result["error"])
    (out / "result.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return result


def run_jobs(jobs: Sequence[Job], workers: int) -> list[dict]:
    if workers <= 1 or len(jobs) <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


def _paths(cfg: dict, languages: Sequence[str], splits: Sequence[str]) -> dict[str, str]:
    return {f"{s}.{l}": str(treebank_path(cfg, s, l)) for s in splits for l in languages}


def _need_languages(cfg: dict, count: int | None, command: str) -> list[str]:
    langs = cfg["languages"]
    if count is not None and len(langs) != count:
        raise ConfigError(f"{command} needs exactly {count} languages, got {langs or 'none'}")
    if not langs:
        raise ConfigError(f"{command} needs at least one language")
    return langs


def grid_jobs(cfg: dict) -> list[Job]:
    """27 bilingual cells plus one mono baseline per language, for every seed."""
    langs = _need_languages(cfg, 2, "grid")
    out = Path(cfg["output"])
    paths = _paths(cfg, langs, ("train", "dev"))
    jobs = []
    for seed in cfg["seeds"]:
        for s in all_strategies():
            jobs.append(Job(cell_name(s), str(s), list(langs), seed, str(out / "cells" / f"{cell_name(s)}-seed{seed}"),
                            paths, cfg))
        for l in langs:
            jobs.append(Job(f"mono-{l}", "mono", [l], seed, str(out / "cells" / f"mono-{l}-seed{seed}"),
                            {k: v for k, v in paths.items() if k.endswith(f".{l}")}, cfg))
    return jobs


def ours_jobs(cfg: dict) -> list[Job]:
    """Nine hard-shared-classifier cells plus a mono baseline per language under test."""
    langs = _need_languages(cfg, 2, "ours")
    targets = [cfg["target"]] if cfg.get("target") else list(langs)
    for t in targets:
        if t not in langs:
            raise ConfigError(f"target language {t!r} is not one of {langs}")
    out = Path(cfg["output"])
    paths = _paths(cfg, langs, SPLITS)
    jobs = []
    for seed in cfg["seeds"]:
        for s in nine_cells():
            jobs.append(Job(cell_name(s), str(s), list(langs), seed, str(out / "cells" / f"{cell_name(s)}-seed{seed}"),
                            paths, cfg))
        for l in targets:
            jobs.append(Job(f"mono-{l}", "mono", [l], seed, str(out / "cells" / f"mono-{l}-seed{seed}"),
                            {k: v for k, v in paths.items() if k.endswith(f".{l}")}, cfg))
    return jobs


def _mean(values: Sequence[float]) -> float | None:
    return float(np.mean(values)) if values else None


# ---------------------------------------------------------------------------
# commands


def cmd_train(args, cfg: dict) -> int:
    langs = _need_languages(cfg, None, "train")
    if len(langs) > 2:
        raise ConfigError("train covers one or two languages")
    strategy = parse_strategy(cfg["strategy"])
    paths = _paths(cfg, langs, ("train", "dev"))
    for l in langs:
        p = treebank_path(cfg, "test", l, required=False)
        if p is not None:
            paths[f"test.{l}"] = str(p)
    out = Path(cfg["output"])
    write_manifest(out, "train", cfg, [Path(p) for p in paths.values()])
    results = []
    for seed in cfg["seeds"]:
        target = out if len(cfg["seeds"]) == 1 else out / f"seed{seed}"
        results.append(run_job(Job("train", str(strategy), langs, seed, str(target), paths, cfg)))
    failed = [r for r in results if r["error"]]
    for r in results:
        for l, v in r["dev"].items():
            print(f"seed={r['seed']}\t{l}\tdev LAS\t{fmt1(v)}")
    if failed:
        print(f"error: {failed[0]['error']}", file=sys.stderr)
        return 1
    return 0


def _load_model(path: str) -> Parser:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"model not found: {p}")
    return Parser.load(p)


def cmd_parse(args, cfg: dict) -> int:
    model = _load_model(args.model)
    if args.language not in model.lexicon.languages:
        raise ConfigError(f"language {args.language!r} unknown to the model (has {model.lexicon.languages})")
    src = Path(args.input)
    if not src.is_file():
        raise ConfigError(f"input not found: {src}")
    sentences = read_conllu(src, args.language, require_tree=False)
    text = serialize_conllu(parse_all(model, sentences, args.language))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args, cfg: dict) -> int:
    for p in [args.gold, args.pred] + ([args.pred_b] if args.pred_b else []):
        if not Path(p).is_file():
            raise ConfigError(f"file not found: {p}")
    gold = read_conllu(args.gold, "xx")
    a = ScoredRun.from_sentences(gold, read_conllu(args.pred, "xx", require_tree=False), strategy="a")
    print("system\tUAS\tLAS\ttokens")
    print(f"{args.pred}\t{a.uas:.2f}\t{a.las:.2f}\t{int(a.tokens.sum())}")
    if args.pred_b:
        b = ScoredRun.from_sentences(gold, read_conllu(args.pred_b, "xx", require_tree=False), strategy="b")
        p = randomization_test(a, b, args.shuffles, args.seed)
        print(f"{args.pred_b}\t{b.uas:.2f}\t{b.las:.2f}\t{int(b.tokens.sum())}")
        print(f"p\t{p:.4f}")
    return 0


def cmd_grid(args, cfg: dict) -> int:
    jobs = grid_jobs(cfg)
    out = Path(cfg["output"])
    if args.dry_run:
        for j in jobs:
            print(f"{j.name}\tseed={j.seed}\t{j.strategy}\t{','.join(j.languages)}")
        return 0
    write_manifest(out, "grid", cfg, [Path(p) for j in jobs for p in j.paths.values()])
    results = run_jobs(jobs, int(cfg["jobs"]))
    langs = cfg["languages"]
    cells: dict[SharingStrategy, dict[str, list[float]]] = {s: {l: [] for l in langs} for s in all_strategies()}
    mono: dict[str, list[float]] = {l: [] for l in langs}
    for r in results:
        if r["error"]:
            continue
        if r["strategy"] == "mono":
            for l, v in r["dev"].items():
                mono[l].append(v)
        else:
            for l, v in r["dev"].items():
                cells[SharingStrategy.parse(r["strategy"])][l].append(v)
    table = {s: {l: _mean(v) for l, v in scores.items()} for s, scores in cells.items()}
    mono_scores = {l: _mean(v) for l, v in mono.items()}
    report = grid_report(table, mono_scores, langs)
    (out / "grid.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "grid.csv").write_text(report.to_csv(), encoding="utf-8")
    from .plotting import grid_figure

    grid_figure(report, out / "grid.png", title=" / ".join(langs))
    sys.stdout.write(report.to_text(ascii=args.ascii))
    failed = [r for r in results if r["error"]]
    if failed:
        print(f"{len(failed)} of {len(results)} jobs failed; see */error.txt under {out / 'cells'}", file=sys.stderr)
        return 1
    return 0


def _pooled_run(results: Sequence[dict], lang: str, gold) -> ScoredRun:
    runs = [ScoredRun.from_sentences(gold, read_conllu(r["test_path"][lang], lang), lang, r["strategy"])
            for r in results]
    return ScoredRun(lang, runs[0].strategy, np.concatenate([r.heads for r in runs]),
                     np.concatenate([r.labeled for r in runs]), np.concatenate([r.tokens for r in runs]))


def cmd_ours(args, cfg: dict) -> int:
    jobs = ours_jobs(cfg)
    out = Path(cfg["output"])
    if args.dry_run:
        for j in jobs:
            print(f"{j.name}\tseed={j.seed}\t{j.strategy}\t{','.join(j.languages)}")
        return 0
    write_manifest(out, "ours", cfg, [Path(p) for j in jobs for p in j.paths.values()])
    results = run_jobs(jobs, int(cfg["jobs"]))
    failed = [r for r in results if r["error"]]
    if failed:
        print(f"error: {len(failed)} jobs failed, first: {failed[0]['error']}", file=sys.stderr)
        return 1
    langs = cfg["languages"]
    targets = [cfg["target"]] if cfg.get("target") else list(langs)
    rows, selections = [], {}
    for lang in targets:
        by_cell: dict[tuple, list[dict]] = {}
        for r in results:
            if r["strategy"] != "mono":
                s = SharingStrategy.parse(r["strategy"])
                by_cell.setdefault((s.word, s.char), []).append(r)
        dev = {k: float(np.mean([r["dev"][lang] for r in v])) for k, v in by_cell.items()}
        w, c = select_strategy(dev)
        chosen = by_cell[(w, c)]
        mono = [r for r in results if r["strategy"] == "mono" and lang in r["test"]]
        gold = read_conllu(treebank_path(cfg, "test", lang), lang)
        a, b = _pooled_run(chosen, lang, gold), _pooled_run(mono, lang, gold)
        p = randomization_test(a, b, int(cfg["shuffles"]), seed=int(cfg["seeds"][0]))
        ours_las = float(np.mean([r["test"][lang] for r in chosen]))
        mono_las = float(np.mean([r["test"][lang] for r in mono]))
        rows.append(OursRow(lang, w, c, ours_las, mono_las, p))
        selections[lang] = {"W": w.value, "C": c.value, "dev": {f"W={k[0].value},C={k[1].value}": v for k, v in dev.items()}}
    text = ours_table(rows, ascii=args.ascii)
    (out / "ours.txt").write_text(ours_table(rows), encoding="utf-8")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["language", "W", "C", "Ours", "Mono", "delta", "p"])
    for r in rows:
        w.writerow([r.language, r.word.value, r.char.value, f"{r.ours:.4f}", f"{r.mono:.4f}", f"{r.delta:.4f}",
                    f"{r.p_value:.6f}"])
    (out / "ours.csv").write_text(buf.getvalue(), encoding="utf-8")
    (out / "selection.json").write_text(json.dumps(selections, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_stats(args, cfg: dict) -> int:
    print("file\tsentences\ttokens\tnon-projective")
    for path in args.files:
        if not Path(path).is_file():
            raise ConfigError(f"file not found: {path}")
        sents = read_conllu(path, "xx")
        n, toks = treebank_stats(sents)
        nonproj = sum(not s.is_projective() for s in sents)
        print(f"{path}\t{n}\t{toks}\t{nonproj}")
    return 0


def cmd_oracle_trace(args, cfg: dict) -> int:
    if not Path(args.file).is_file():
        raise ConfigError(f"file not found: {args.file}")
    sents = read_conllu(args.file, "xx")
    chosen = None
    for i, s in enumerate(sents, 1):
        if args.sentence in (str(i), s.sent_id):
            chosen = s
            break
    if chosen is None:
        raise ConfigError(f"no sentence {args.sentence!r} in {args.file} ({len(sents)} sentences)")
    print("step\tstack\tbuffer\ttransition\tcost")
    for line in trace_lines(chosen.heads, chosen.labels):
        print(line)
    return 0


def cmd_synth(args, cfg: dict) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    splits = pair_splits(args.kind, (args.train, args.dev, args.test), seed=args.seed, vocab=args.vocab)
    for code, parts in splits.items():
        for split, sents in zip(SPLITS, parts):
            write_conllu(out / f"{code}-{split}.conllu", sents)
    print(f"wrote {', '.join(sorted(splits))} to {out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", "-c", help="flat YAML experiment file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--languages", help="comma-separated language codes")
    p.add_argument("--strategy", help="e.g. C=x,W=h,S=id, or mono")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int, dest="seeds", action="append", help="repeat for a seed sweep")
    p.add_argument("--epochs", type=int)
    p.add_argument("--sample-size", type=int, dest="sample_size")
    p.add_argument("--jobs", "-j", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyparse", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model")
    _experiment_flags(p)

    p = sub.add_parser("parse", help="parse a CoNLL-U file with a trained model")
    p.add_argument("--model", "-m", required=True)
    p.add_argument("--language", "-l", required=True)
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o")

    p = sub.add_parser("eval", help="UAS/LAS of predictions, optionally a significance test against a second system")
    p.add_argument("--gold", "-g", required=True)
    p.add_argument("--pred", "-p", required=True)
    p.add_argument("--pred-b", dest="pred_b")
    p.add_argument("--shuffles", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    for name, text in (("grid", "train and rank all 27 strategies plus mono baselines"),
                       ("ours", "nine-cell sweep, dev selection, test comparison with mono")):
        p = sub.add_parser(name, help=text)
        _experiment_flags(p)
        p.add_argument("--dry-run", action="store_true", help="list the jobs and exit")
        p.add_argument("--ascii", action="store_true", help="x/h/id instead of the symbol notation")
        if name == "ours":
            p.add_argument("--target", help="only this language is under test")

    p = sub.add_parser("stats", help="sentence and token counts of treebanks")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("oracle-trace", help="print the oracle's transitions for one gold sentence")
    p.add_argument("file")
    p.add_argument("--sentence", "-s", default="1", help="1-based index or sent_id")

    p = sub.add_parser("synth", help="write a generated treebank pair")
    p.add_argument("--kind", choices=("related", "unrelated"), default="related")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--train", type=int, default=500)
    p.add_argument("--dev", type=int, default=200)
    p.add_argument("--test", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", type=int, default=40)
    return ap


COMMANDS = {
    "train": cmd_train, "parse": cmd_parse, "eval": cmd_eval, "grid": cmd_grid, "ours": cmd_ours,
    "stats": cmd_stats, "oracle-trace": cmd_oracle_trace, "synth": cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = {}
        if hasattr(args, "set"):
            flags = {k: getattr(args, k) for k in ("languages", "strategy", "data_dir", "output", "seeds",
                                                    "epochs", "sample_size", "jobs", "target") if hasattr(args, k)}
            cfg = load_config(args.config, args.set, flags)
            _apply_precision(cfg)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConlluError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        if args.verbose:
            traceback.print_exc()
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
