"""Figure rendering for the report-style outputs.

Import is deferred to the CLI's --figure path so plain scoring runs
never pay the matplotlib startup cost. All functions render straight
to a file (Agg backend, no display).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import BenchReport
from .online import ConsistencySeries
from .scoring import ScoreTable

__all__ = ["save_score_figure", "save_consistency_figure", "save_bench_figure"]


def save_score_figure(table: ScoreTable, path: str, top_n: int = 20) -> None:
    """Horizontal bar chart of the highest-scoring participants."""
    ranked = table.top(top_n)
    names = [pid for pid, _ in ranked][::-1]
    scores = [score for _, score in ranked][::-1]
    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.3 * len(ranked) + 1)))
    ax.barh(names, scores, color="#3b6ea5")
    ax.set_xlabel("influence score")
    ax.set_title(f"top {len(ranked)} participants")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_consistency_figure(series: ConsistencySeries, path: str) -> None:
    """Top-k overlap per rolling window, the shape of the online report."""
    xs = [point.window_end_interval for point in series.points]
    ys = [point.overlap_fraction for point in series.points]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, ys, marker="o", color="#3b6ea5")
    ax.set_xlabel("window end interval")
    ax.set_ylabel(f"top-{series.k_requested} overlap with previous window")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(report: BenchReport, path: str) -> None:
    """Stage timing bars for one benchmark run."""
    stages = ["parse", "build", "score"]
    seconds = [report.parse_seconds, report.build_seconds, report.score_seconds]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(stages, seconds, color=["#3b6ea5", "#6a9f58", "#c5703f"])
    ax.set_ylabel("mean seconds")
    ax.set_title(f"{report.events} events, {report.repetitions} repetitions")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
