"""Matplotlib renderings of the report tables.

Only used when a CLI command is run with ``--figures``; every figure is drawn
from data that is also written as CSV.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .reports import DensityCurve, Histogram  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}

# keeps PNG bytes free of version strings
_META = {"Software": None}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def _subplots(**kw):
    with plt.rc_context(STYLE):
        return plt.subplots(**kw)


def entropy_distribution(hist: Histogram, kde: DensityCurve, path, corpus_max: float | None = None):
    fig, ax = _subplots()
    widths = np.diff(hist.edges)
    ax.bar(hist.edges[:-1], hist.counts, width=widths, align="edge", color="0.75",
           edgecolor="0.5", linewidth=0.4, label="entities")
    ax.set_xlabel("entropy (bits)")
    ax.set_ylabel("entities")
    ax2 = ax.twinx()
    ax2.plot(kde.x, kde.density, color="green", lw=1.5, label="KDE")
    ax2.set_ylabel("density")
    ax2.set_ylim(bottom=0)
    ax2.grid(False)
    if corpus_max:
        ax.axvline(corpus_max, color="k", ls=":", lw=0.8)
    return _save(fig, path)


def size_vs_entropy(sizes: Sequence[float], entropies: Sequence[float], path,
                    correlation: float | None = None):
    fig, ax = _subplots()
    ax.scatter(sizes, entropies, s=8, alpha=0.5)
    ax.set_xscale("log")
    ax.set_xlabel("total facts")
    ax.set_ylabel("entropy (bits)")
    if correlation is not None:
        ax.set_title(f"Spearman rho = {correlation:.3f}")
    return _save(fig, path)


def coverage_rank(counts: Sequence[int], path, threshold: float = 0.95):
    fig, ax = _subplots()
    ranks = np.arange(1, len(counts) + 1)
    ax.plot(ranks, counts, drawstyle="steps-post")
    if len(counts):
        # entities are ranked descending, so the 90th percentile entity sits at 10% rank
        ax.axvline(max(1, round(0.1 * len(counts))), color="red", ls="--", lw=1)
    ax.set_yscale("log")
    ax.set_xlabel("entity rank")
    ax.set_ylabel(f"documents for {threshold:.0%} coverage")
    return _save(fig, path)


def adjacency_heatmap(matrix: np.ndarray, path, title: str = ""):
    fig, ax = _subplots(figsize=(5, 5))
    masked = np.ma.masked_equal(matrix, 0)
    im = ax.imshow(masked, cmap="viridis", interpolation="nearest", origin="lower")
    fig.colorbar(im, ax=ax, shrink=0.8, label="shared documents")
    ax.grid(False)
    ax.set_xlabel("entity (by documents, descending)")
    ax.set_ylabel("entity")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def entropy_over_time(series: Mapping[str, Sequence[float]], path):
    fig, ax = _subplots()
    for name, values in series.items():
        ax.plot(np.arange(len(values)), values, lw=1, label=name)
    if 0 < len(series) <= 8:
        ax.legend()
    ax.set_xlabel("days from first mention")
    ax.set_ylabel("entropy (bits)")
    return _save(fig, path)


def early_vs_final(early: Sequence[float], final: Sequence[float], growing: Sequence[bool], path,
                   fit_all=None, fit_growing=None, early_day: int = 10, final_day: int = 90):
    fig, ax = _subplots()
    e, f, g = np.asarray(early), np.asarray(final), np.asarray(growing, dtype=bool)
    ax.scatter(e[~g], f[~g], s=10, alpha=0.3, color="0.5", label="stable")
    ax.scatter(e[g], f[g], s=10, alpha=0.3, color="C0", label="growing")
    hi = float(max(e.max(initial=0), f.max(initial=0), 1.0))
    xs = np.array([0.0, hi])
    ax.plot(xs, xs, color="0.6", lw=0.8)
    if fit_all:
        ax.plot(xs, fit_all[0] * xs + fit_all[1], color="k", lw=1.2, label="all")
    if fit_growing:
        ax.plot(xs, fit_growing[0] * xs + fit_growing[1], color="k", ls="--", lw=1.2,
                label="growing")
    ax.set_xlabel(f"entropy at day {early_day} (bits)")
    ax.set_ylabel(f"entropy at day {final_day} (bits)")
    ax.legend()
    return _save(fig, path)


def trajectory_decomposition(entropy: Sequence[float], baseline: Sequence[float],
                             feedback: Sequence[float], path, observed: Sequence[float] | None = None):
    """Simulated entropy (top) and the baseline / feedback terms that drive it (bottom)."""
    fig, (top, bottom) = _subplots(nrows=2, sharex=True, figsize=(6.4, 5.0))
    days = np.arange(len(entropy))
    if observed is not None:
        top.plot(np.arange(len(observed)), observed, color="k", lw=1.2, label="observed")
    top.plot(days, entropy, color="C0", lw=1.2, label="model")
    top.set_ylabel("entropy (bits)")
    top.legend()
    b = np.asarray(baseline)
    fb = np.asarray(feedback)
    bottom.fill_between(days, 0, b, color="tab:blue", alpha=0.3, label="baseline importance")
    bottom.fill_between(days, b, b + fb, color="tab:green", alpha=0.3, label="entropy feedback")
    bottom.plot(days, b + fb, color="k", lw=0.8)
    bottom.set_xlabel("day")
    bottom.set_ylabel("mean-proportion input")
    bottom.legend()
    return _save(fig, path)


def daily_deltas(deltas: Sequence[float], path, threshold: float | None = None):
    fig, ax = _subplots()
    ax.bar(np.arange(1, len(deltas) + 1), deltas, width=1.0, color="C3")
    if threshold:
        for y in (threshold, -threshold):
            ax.axhline(y, color="k", ls="--", lw=0.8)
    ax.set_xlabel("day")
    ax.set_ylabel("entropy change (bits)")
    return _save(fig, path)


def fit_metrics(final_entropy: Sequence[float], rmse: Sequence[float],
                train_days: Sequence[int], path):
    fig, ax = _subplots()
    fe, r, td = np.asarray(final_entropy), np.asarray(rmse), np.asarray(train_days)
    for i, days in enumerate(sorted(set(td.tolist()))):
        m = td == days
        ax.scatter(fe[m], r[m], s=10, alpha=0.6, color=f"C{i}", label=f"{days} days")
    ax.set_xlabel("entity entropy (bits)")
    ax.set_ylabel("RMSE (bits)")
    ax.legend(title="training window")
    return _save(fig, path)


def fact_distribution(empirical: Sequence[float], simulated: Sequence[float], path):
    fig, ax = _subplots()
    emp = np.asarray(empirical, float)
    sim = np.asarray(simulated, float)
    hi = max(emp.max(initial=1), sim.max(initial=1))
    bins = np.logspace(0, np.log10(hi + 1), 40)
    ax.hist(emp, bins=bins, density=True, alpha=0.5, color="tab:blue", label="empirical")
    ax.hist(sim, bins=bins, density=True, alpha=0.5, color="tab:red", label="simulated")
    ax.set_xscale("log")
    ax.set_xlabel("facts per document")
    ax.set_ylabel("density")
    ax.legend()
    return _save(fig, path)


def document_schedule(counts: Sequence[int], path):
    fig, ax = _subplots()
    ax.bar(np.arange(len(counts)), counts, width=1.0, color="0.4")
    ax.set_xlabel("day")
    ax.set_ylabel("documents created")
    return _save(fig, path)
