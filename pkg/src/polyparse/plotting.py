"""Figures for grid reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import GridReport  # noqa: E402


def _label(row) -> str:
    if row.strategy is None:
        return row.name
    c, w, s = row.strategy.symbols(ascii=True)
    return f"C={c} W={w} S={s}"


def grid_figure(report: GridReport, path: str | Path, title: str | None = None) -> Path:
    """Heatmap of per-language LAS (relative to Mono when present) plus row averages.

    Missing cells are left blank.  Returns the written path.
    """
    rows = report.rows
    langs = report.languages
    values = np.array([[np.nan if r.scores[l] is None else r.scores[l] for l in langs] for r in rows], dtype=float)
    relative = report.mono is not None and all(report.mono.scores.get(l) is not None for l in langs)
    if relative:
        values = values - np.array([report.mono.scores[l] for l in langs])

    height = 1.5 + 0.28 * len(rows)
    fig, (ax, bx) = plt.subplots(1, 2, figsize=(4 + 0.6 * len(langs), height),
                                 gridspec_kw={"width_ratios": [max(len(langs), 1), 2]}, sharey=True)
    lim = np.nanmax(np.abs(values)) if np.isfinite(values).any() else 1.0
    if relative:
        im = ax.imshow(values, cmap="RdBu", vmin=-lim, vmax=lim, aspect="auto")
    else:
        im = ax.imshow(values, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(langs)), langs)
    ax.set_yticks(range(len(rows)), [_label(r) for r in rows], fontsize=7, family="monospace")
    fig.colorbar(im, ax=ax, fraction=0.04, pad=0.02, label="LAS - Mono" if relative else "LAS")

    avgs = [np.nan if r.average is None else r.average for r in rows]
    bx.barh(range(len(rows)), avgs, color="0.55")
    if report.mono is not None and report.mono.average is not None:
        bx.axvline(report.mono.average, color="k", lw=0.8, ls="--", label="Mono")
        bx.legend(loc="lower right", fontsize=7, frameon=False)
    finite = [a for a in avgs if np.isfinite(a)]
    if finite:
        lo = min(finite + ([report.mono.average] if report.mono and report.mono.average else []))
        bx.set_xlim(lo - 0.5, max(finite) + 0.3)
    bx.set_xlabel("average LAS")
    bx.spines[["top", "right"]].set_visible(False)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
