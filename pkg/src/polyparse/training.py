"""Greedy training with the static-dynamic oracle, and greedy decoding."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import autodiff as ad
from .conllu import Sentence, sample_training
from .lexicon import UNK, build_lexicon
from .model import ConfigError, ModelDims, Parser, build_model
from .strategy import SharingStrategy
from .transitions import (
    Configuration, Transition, TransitionError, apply_inplace, initial_config, legal_transitions,
    max_steps, oracle_next, projective_order, swap_due,
)

log = logging.getLogger(__name__)


class OracleError(RuntimeError):
    """The oracle offered no zero-cost action; indicates a bug."""


@dataclass
class TrainConfig:
    strategy: SharingStrategy = field(default_factory=SharingStrategy)
    languages: tuple[str, ...] = ()
    sample_size: int = 5000
    epochs: int = 30
    seed: int = 1
    word_dropout: float = 0.25
    explore_from: int = 2
    explore_prob: float = 0.1
    margin: float = 1.0
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    dims: ModelDims = field(default_factory=ModelDims)
    # stop once training-set LAS reaches this value (checked only when set)
    target_train_las: float | None = None

    def __post_init__(self):
        if self.sample_size < 1:
            raise ConfigError("sample size must be at least 1")
        if not 0.0 <= self.explore_prob <= 1.0:
            raise ConfigError(f"exploration probability must lie in [0, 1], got {self.explore_prob}")
        if self.margin <= 0:
            raise ConfigError("margin must be positive")
        if self.epochs < 1:
            raise ConfigError("need at least one epoch")
        if self.word_dropout < 0:
            raise ConfigError("word dropout must be non-negative")
        if len(self.languages) not in (0, 1, 2):
            raise ConfigError("training covers one or two languages")


def hinge_loss(scores: np.ndarray, good: np.ndarray, legal: np.ndarray, margin: float = 1.0) -> float:
    """Margin violation between the best zero-cost and the best other legal action.

    ``good`` and ``legal`` are boolean masks over actions.
    """
    good = np.asarray(good, dtype=bool) & np.asarray(legal, dtype=bool)
    if not good.any():
        raise OracleError("no zero-cost action among the legal ones")
    bad = np.asarray(legal, dtype=bool) & ~good
    if not bad.any():
        return 0.0
    return max(0.0, margin - scores[good].max() + scores[bad].max())


@dataclass
class StepRecord:
    rows: list[int]
    good: int
    bad: int


def _good_mask(model: Parser, c, heads, labels, ranks) -> np.ndarray:
    mask = np.zeros(model.n_actions, dtype=bool)
    for t in oracle_next(c, heads, labels, ranks):
        mask[model.action_id(t)] = True
    return mask


def walk_sentence(
    model: Parser,
    sentence: Sentence,
    matrix: np.ndarray,
    enc,
    margin: float,
    explore: float,
    rng: np.random.Generator,
) -> tuple[float, list[StepRecord], Configuration, list[Transition]]:
    """Follow the oracle through one sentence, collecting margin violations.

    With probability ``explore`` at each step where SWAP is not forced, the
    model's own best legal action is taken even when it costs arcs.  Returns
    the summed hinge loss, the violating steps, the final configuration and
    the transitions taken.
    """
    heads, labels = sentence.heads, sentence.labels
    ranks = projective_order(heads)
    c = initial_config(len(sentence))
    loss, records, taken = 0.0, [], []
    while not c.is_terminal():
        kinds = legal_transitions(c)
        legal = model.legal_mask(kinds)
        rows = model.feature_rows(c, enc)
        scores = model.score_values(rows, matrix, sentence.language)
        good = _good_mask(model, c, heads, labels, ranks) & legal
        if not good.any():
            raise OracleError(f"oracle stuck at stack {c.stack}, buffer {c.buffer}")
        bad = legal & ~good
        best_good = int(np.flatnonzero(good)[np.argmax(scores[good])])
        if bad.any():
            best_bad = int(np.flatnonzero(bad)[np.argmax(scores[bad])])
            violation = margin - scores[best_good] + scores[best_bad]
            if violation > 0:
                loss += violation
                records.append(StepRecord(rows, best_good, best_bad))
        nxt = best_good
        if explore > 0 and not swap_due(c, ranks) and rng.random() < explore:
            masked = np.where(legal, scores, -np.inf)
            nxt = int(np.argmax(masked))
        t = model.action(nxt)
        apply_inplace(c, t)
        taken.append(t)
        if len(taken) > max_steps(len(sentence)):
            raise TransitionError("training walk failed to terminate")
    return loss, records, c, taken


def dropout_ids(model: Parser, sentence: Sentence, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Word ids with each word replaced by UNK with probability alpha / (alpha + freq)."""
    ids = model.word_ids(sentence.forms, sentence.language)
    if alpha <= 0:
        return ids
    freq = np.array([model.lexicon.frequency(f, sentence.language) for f in sentence.forms], dtype=float)
    drop = rng.random(len(ids)) < alpha / (alpha + freq)
    return np.where(drop, UNK, ids)


def sentence_loss(model: Parser, sentence: Sentence, margin: float = 1.0, explore: float = 0.0,
                  rng: np.random.Generator | None = None, word_ids=None):
    """Graph for the summed hinge loss over one oracle walk.

    Returns ``(loss tensor or None, loss value, steps)``; the tensor is None
    when no step violates the margin.
    """
    rng = rng or np.random.default_rng(0)
    enc = model.sentence_encode(sentence.forms, sentence.language, word_ids)
    value, records, _, taken = walk_sentence(model, sentence, enc.matrix.value, enc, margin, explore, rng)
    steps = len(taken)
    if not records:
        return None, value, steps
    rows = np.array([r.rows for r in records])
    scores = model.score(model.extract_features(rows, enc), sentence.language)
    good = ad.pick(scores, [r.good for r in records])
    bad = ad.pick(scores, [r.bad for r in records])
    loss = ad.total(ad.relu(ad.add_scalar(ad.sub(bad, good), margin)))
    return loss, value, steps


def train_sentence(model: Parser, optimizer, sentence: Sentence, margin: float = 1.0, explore: float = 0.0,
                   rng: np.random.Generator | None = None, word_ids=None) -> tuple[float, int]:
    """One update from one sentence; returns ``(loss, steps)``."""
    loss, value, steps = sentence_loss(model, sentence, margin, explore, rng, word_ids)
    if loss is not None:
        ad.backward(loss)
        optimizer.step(model.params.tensors())
    return value, steps


def parse_heads(model: Parser, forms: Sequence[str], language: str) -> tuple[list[int], list[str]]:
    """Greedy decoding; returns 1-indexed ``(heads, labels)`` with a placeholder at 0."""
    enc = model.sentence_encode(forms, language)
    matrix = enc.matrix.value
    c = initial_config(len(forms))
    while not c.is_terminal():
        legal = model.legal_mask(legal_transitions(c))
        scores = model.score_values(model.feature_rows(c, enc), matrix, language)
        apply_inplace(c, model.action(int(np.argmax(np.where(legal, scores, -np.inf)))))
    heads, labels = c.heads, c.labels
    _assert_tree(heads)
    return heads, ["" if l is None else l for l in labels]


def _assert_tree(heads: Sequence[int]) -> None:
    n = len(heads) - 1
    for d in range(1, n + 1):
        seen, x = set(), d
        while x != 0:
            if x in seen or x < 0:
                raise AssertionError(f"decoder produced a malformed tree: {heads}")
            seen.add(x)
            x = heads[x]


def parse(model: Parser, sentence: Sentence, language: str | None = None) -> Sentence:
    heads, labels = parse_heads(model, sentence.forms, language or sentence.language)
    return sentence.with_arcs(heads, labels)


def parse_all(model: Parser, sentences: Sequence[Sentence], language: str | None = None) -> list[Sentence]:
    return [parse(model, s, language) for s in sentences]


def corpus_las(model: Parser, sentences: Sequence[Sentence]) -> float:
    from .evaluation import attachment_scores

    if not sentences:
        return 0.0
    return attachment_scores(sentences, parse_all(model, sentences))[1]


# ---------------------------------------------------------------------------
# epochs


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    steps: int
    dev_las: dict[str, float]
    seconds: float
    train_las: dict[str, float] | None = None

    @property
    def mean_dev(self) -> float:
        return float(np.mean(list(self.dev_las.values()))) if self.dev_las else 0.0


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    checkpoint: str | None = None

    @property
    def best(self) -> EpochRecord:
        return self.epochs[self.best_epoch - 1]

    def to_jsonl(self) -> str:
        lines = []
        for rec in self.epochs:
            row = asdict(rec)
            row["record"] = "epoch"
            lines.append(json.dumps(row, sort_keys=True))
        lines.append(json.dumps({"record": "summary", "best_epoch": self.best_epoch,
                                 "checkpoint": self.checkpoint}, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "TrainReport":
        report = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            kind = row.pop("record")
            if kind == "epoch":
                report.epochs.append(EpochRecord(**row))
            else:
                report.best_epoch = row["best_epoch"]
                report.checkpoint = row["checkpoint"]
        return report


def train(
    config: TrainConfig,
    train_data: Mapping[str, Sequence[Sentence]],
    dev_data: Mapping[str, Sequence[Sentence]],
    out_path: str | Path | None = None,
    report_path: str | Path | None = None,
) -> tuple[Parser, TrainReport]:
    """Train one model on one or two languages.

    The returned model holds the parameters of the best epoch (mean dev LAS,
    earliest on ties), which are also written to ``out_path`` when given.
    """
    languages = list(config.languages or train_data)
    if len(languages) not in (1, 2):
        raise ConfigError(f"training covers one or two languages, got {languages}")
    for lang in languages:
        if not train_data.get(lang):
            raise ConfigError(f"no training data for {lang}")
        if lang not in dev_data or not dev_data[lang]:
            raise ConfigError(f"no dev data for {lang}")
    rng = np.random.default_rng(config.seed)
    sampled = {
        lang: sample_training(train_data[lang], config.sample_size, seed=config.seed + i)
        for i, lang in enumerate(languages)
    }
    lexicon = build_lexicon(sampled, config.strategy)
    model = build_model(config.strategy, lexicon, config.dims, seed=config.seed)
    optimizer = ad.make_optimizer(config.optimizer, config.learning_rate)
    stream = [s for lang in languages for s in sampled[lang]]

    report = TrainReport()
    best_score, best_values = -1.0, None
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        explore = config.explore_prob if epoch >= config.explore_from else 0.0
        total, steps = 0.0, 0
        for i in rng.permutation(len(stream)):
            sent = stream[i]
            ids = dropout_ids(model, sent, config.word_dropout, rng)
            loss, n = train_sentence(model, optimizer, sent, config.margin, explore, rng, ids)
            total += float(loss)
            steps += n
        dev = {lang: float(corpus_las(model, dev_data[lang])) for lang in languages}
        rec = EpochRecord(epoch, total, steps, dev, time.perf_counter() - start)
        if config.target_train_las is not None:
            rec.train_las = {lang: corpus_las(model, sampled[lang]) for lang in languages}
        report.epochs.append(rec)
        log.info("epoch %d loss %.3f dev %s", epoch, total, {k: round(v, 2) for k, v in dev.items()})
        if rec.mean_dev > best_score:
            best_score, best_values = rec.mean_dev, model.params.snapshot()
            report.best_epoch = epoch
        if report_path is not None:
            Path(report_path).write_text(report.to_jsonl(), encoding="utf-8")
        if rec.train_las is not None and min(rec.train_las.values()) >= config.target_train_las:
            break

    model.params.restore(best_values)
    if out_path is not None:
        model.save(out_path, {"train_config": config_to_dict(config)})
        report.checkpoint = str(out_path)
    if report_path is not None:
        Path(report_path).write_text(report.to_jsonl(), encoding="utf-8")
    return model, report


def config_to_dict(config: TrainConfig) -> dict:
    out = asdict(config)
    out["strategy"] = str(config.strategy)
    out["languages"] = list(config.languages)
    return out
