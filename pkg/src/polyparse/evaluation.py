"""Attachment scores, paired randomization tests, grid reports and strategy selection."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from .conllu import Sentence
from .strategy import MODE_PRIORITY, Mode, SharingStrategy, all_strategies


class EvaluationError(ValueError):
    """Gold and predicted data do not line up, or a report is incomplete."""


def fmt1(x: float | None) -> str:
    """One decimal, halves rounded up, as in published score tables."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    return str(Decimal(repr(round(float(x), 9))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# attachment scores


@dataclass
class ScoredRun:
    """Per-sentence counts for one system on one gold corpus."""

    language: str
    strategy: str
    heads: np.ndarray
    labeled: np.ndarray
    tokens: np.ndarray

    @property
    def uas(self) -> float:
        return 100.0 * self.heads.sum() / self.tokens.sum() if self.tokens.sum() else 0.0

    @property
    def las(self) -> float:
        return 100.0 * self.labeled.sum() / self.tokens.sum() if self.tokens.sum() else 0.0

    @classmethod
    def from_sentences(cls, gold: Sequence[Sentence], predicted: Sequence[Sentence],
                       language: str = "", strategy: str = "") -> "ScoredRun":
        if len(gold) != len(predicted):
            raise EvaluationError(f"{len(gold)} gold sentences but {len(predicted)} predicted")
        heads, labeled, tokens = [], [], []
        for i, (g, p) in enumerate(zip(gold, predicted)):
            name = g.sent_id or f"#{i + 1}"
            if len(g.tokens) != len(p.tokens):
                raise EvaluationError(
                    f"sentence {name}: {len(g.tokens)} gold tokens but {len(p.tokens)} predicted"
                )
            h = l = 0
            for gt, pt in zip(g.tokens, p.tokens):
                if gt.head == pt.head:
                    h += 1
                    if gt.label == pt.label:
                        l += 1
            heads.append(h)
            labeled.append(l)
            tokens.append(len(g.tokens))
        return cls(language, strategy, np.array(heads), np.array(labeled), np.array(tokens))


def attachment_scores(gold: Sequence[Sentence], predicted: Sequence[Sentence]) -> tuple[float, float]:
    """Micro-averaged ``(UAS, LAS)`` in percent; every syntactic word counts."""
    run = ScoredRun.from_sentences(gold, predicted)
    return run.uas, run.las


def randomization_test(a: ScoredRun, b: ScoredRun, shuffles: int = 10_000, seed: int = 0,
                       metric: str = "las", chunk: int = 1000) -> float:
    """Two-sided paired randomization test on the LAS (or UAS) difference.

    Each replicate swaps the two systems' per-sentence counts with
    probability one half.  The p-value counts the observed assignment too:
    ``(1 + #{replicates >= observed}) / (1 + shuffles)``.
    """
    if shuffles < 1:
        raise EvaluationError("need at least one shuffle")
    if len(a.tokens) != len(b.tokens) or not np.array_equal(a.tokens, b.tokens):
        raise EvaluationError("runs are not aligned on the same gold sentences")
    xa, xb = (a.labeled, b.labeled) if metric == "las" else (a.heads, b.heads)
    diff = (xa - xb).astype(np.int64)
    observed = abs(int(diff.sum()))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < shuffles:
        k = min(chunk, shuffles - done)
        signs = np.where(rng.random((k, len(diff))) < 0.5, -1, 1)
        hits += int((np.abs(signs @ diff) >= observed).sum())
        done += k
    return (1 + hits) / (1 + shuffles)


# ---------------------------------------------------------------------------
# strategy selection


def _tie_key(w: Mode, c: Mode) -> tuple:
    shared = int(w.shared) + int(c.shared)
    return (shared, MODE_PRIORITY[w], MODE_PRIORITY[c])


def select_strategy(results: Mapping[tuple[Mode, Mode], float]) -> tuple[Mode, Mode]:
    """Best ``(W, C)`` cell of the nine with a hard-shared classifier.

    Ties go to fewer shared components, then to the less-sharing mode of W,
    then of C (Separate before Soft before Hard).
    """
    modes = (Mode.SEPARATE, Mode.HARD, Mode.SOFT)
    missing = [(w, c) for w in modes for c in modes if (w, c) not in results]
    if missing:
        cells = ", ".join(f"W={w.value}/C={c.value}" for w, c in missing)
        raise EvaluationError(f"missing dev cells: {cells}")
    best = max(results[k] for k in results)
    tied = [k for k in results if math.isclose(results[k], best, rel_tol=0, abs_tol=1e-9)]
    return min(tied, key=lambda k: _tie_key(*k))


def nine_cells() -> list[SharingStrategy]:
    """Strategies with a hard-shared classifier, W varying slowest."""
    modes = (Mode.SEPARATE, Mode.HARD, Mode.SOFT)
    return [SharingStrategy(char=c, word=w, state=Mode.HARD) for w in modes for c in modes]


# ---------------------------------------------------------------------------
# grid reports


@dataclass
class GridRow:
    name: str
    strategy: SharingStrategy | None
    scores: dict[str, float | None]

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self.scores.values())

    @property
    def average(self) -> float | None:
        if not self.complete:
            return None
        return math.fsum(self.scores.values()) / len(self.scores)


@dataclass
class GridReport:
    languages: list[str]
    mono: GridRow | None
    language_best: GridRow
    rows: list[GridRow] = field(default_factory=list)

    @property
    def best(self) -> GridRow:
        return self.rows[0]

    @property
    def worst(self) -> GridRow:
        ranked = [r for r in self.rows if r.complete]
        return ranked[-1]

    def all_rows(self) -> list[GridRow]:
        head = [self.mono] if self.mono is not None else []
        return head + [self.language_best] + self.rows

    def table(self, ascii: bool = False) -> list[list[str]]:
        out = [["Model", "C", "W", "S", *self.languages, "average"]]
        for r in self.all_rows():
            sym = list(r.strategy.symbols(ascii)) if r.strategy else ["", "", ""]
            out.append([r.name, *sym, *(fmt1(r.scores.get(l)) for l in self.languages), fmt1(r.average)])
        return out

    def to_text(self, ascii: bool = False) -> str:
        rows = self.table(ascii)
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = []
        for k, row in enumerate(rows):
            cells = [c.ljust(w) if i < 4 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
            lines.append("  ".join(cells).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def to_csv(self, ascii: bool = True) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.table(ascii))
        return buf.getvalue()


def grid_report(
    results: Mapping[SharingStrategy, Mapping[str, float | None]],
    mono: Mapping[str, float] | None = None,
    languages: Sequence[str] | None = None,
) -> GridReport:
    """Rank strategies by average LAS; incomplete rows go last."""
    if not results:
        raise EvaluationError("empty grid")
    if languages is None:
        languages = list(next(iter(results.values())))
    languages = list(languages)
    order = {s: i for i, s in enumerate(all_strategies())}
    rows = []
    for strategy, scores in results.items():
        name = "strategy"
        rows.append(GridRow(name, strategy, {l: scores.get(l) for l in languages}))
    rows.sort(key=lambda r: (r.average is None, -(r.average or 0.0), order.get(r.strategy, 99)))
    if rows[0].complete:
        rows[0].name = "Best"
    complete = [r for r in rows if r.complete]
    if len(complete) > 1:
        complete[-1].name = "Worst"
    best_per_lang = {}
    for l in languages:
        vals = [r.scores[l] for r in rows if r.scores[l] is not None]
        best_per_lang[l] = max(vals) if vals else None
    lb = GridRow("Language-best", None, best_per_lang)
    mono_row = GridRow("Mono", None, {l: mono.get(l) for l in languages}) if mono is not None else None
    report = GridReport(languages, mono_row, lb, rows)
    check_report(report)
    return report


def check_report(report: GridReport) -> None:
    for l in report.languages:
        vals = [r.scores[l] for r in report.rows if r.scores[l] is not None]
        if vals and report.language_best.scores[l] != max(vals):
            raise EvaluationError(f"language-best entry for {l} is not the column maximum")
    avgs = [r.average for r in report.rows if r.complete]
    if any(a < b for a, b in zip(avgs, avgs[1:])):
        raise EvaluationError("grid rows are not sorted by average")


def read_grid_csv(text: str) -> GridReport:
    """Inverse of :meth:`GridReport.to_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    languages = header[4:-1]
    results: dict[SharingStrategy, dict[str, float | None]] = {}
    mono = None
    for r in rows[1:]:
        scores = {l: (None if v == "-" else float(v)) for l, v in zip(languages, r[4:-1])}
        if r[0] == "Mono":
            mono = scores
        elif r[0] == "Language-best":
            continue
        else:
            results[SharingStrategy(Mode.parse(r[1]), Mode.parse(r[2]), Mode.parse(r[3]))] = scores
    return grid_report(results, mono, languages)


# ---------------------------------------------------------------------------
# selected-model tables


@dataclass
class OursRow:
    language: str
    word: Mode
    char: Mode
    ours: float
    mono: float
    p_value: float | None = None

    @property
    def delta(self) -> float:
        return self.ours - self.mono


def ours_table(rows: Sequence[OursRow], ascii: bool = False) -> str:
    """Plain-text table with columns language, W, C, Ours, Mono, delta and p."""
    sym = (lambda m: m.value) if ascii else (lambda m: m.symbol)
    lines = [["", "W", "C", "Ours", "Mono", "delta", "p"]]
    for r in rows:
        p = "-" if r.p_value is None else f"{r.p_value:.4f}"
        lines.append([r.language, sym(r.word), sym(r.char), fmt1(r.ours), fmt1(r.mono), fmt1(r.delta), p])
    if rows:
        ours = math.fsum(r.ours for r in rows) / len(rows)
        mono = math.fsum(r.mono for r in rows) / len(rows)
        lines.append(["av.", "", "", fmt1(ours), fmt1(mono), fmt1(ours - mono), ""])
    widths = [max(len(l[i]) for l in lines) for i in range(len(lines[0]))]
    return "\n".join("  ".join(c.rjust(w) if i > 2 else c.ljust(w) for i, (c, w) in enumerate(zip(l, widths))).rstrip()
                     for l in lines) + "\n"
