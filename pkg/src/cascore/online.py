"""Incremental scoring, interval partitioning, and ranking consistency.

Because participant scores are plain sums, an accumulator can absorb
new cascade batches forever without revisiting earlier data, and a
rolling window over time intervals is just a merge of per-interval
tables (recomputing by merge instead of subtracting departed intervals
avoids accumulating float cancellation error).
"""

from __future__ import annotations

import csv
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Optional, Sequence

from .cascades import Cascade, EventRecord
from .errors import DataError
from .scoring import ScoreTable, ScoringConfig, score_cascade, score_set

__all__ = [
    "Accumulator",
    "IntervalPartition",
    "ConsistencyPoint",
    "ConsistencySeries",
    "update",
    "partition_intervals",
    "assign_cascades",
    "rolling_scores",
    "topk_consistency",
    "write_consistency_csv",
]

logger = logging.getLogger(__name__)


@dataclass
class Accumulator:
    """A running score table plus the latest timestamp incorporated.

    The watermark is informational only; late-arriving batches are
    accepted and fold in exactly like any other.
    """

    table: ScoreTable = field(default_factory=ScoreTable)
    watermark: Optional[float] = None


def update(
    acc: Accumulator,
    new_cascades: Iterable[Cascade],
    config: ScoringConfig = ScoringConfig(),
) -> Accumulator:
    """Fold a batch of cascades into the accumulator, in place.

    Totals grow by exactly what scoring the batch alone would produce;
    previously absorbed data is neither read nor touched, so feeding
    twenty interval batches one at a time matches one bulk run.
    """
    for cascade in new_cascades:
        for term in score_cascade(cascade, config):
            acc.table.add_term(term)
        latest = cascade.time_span[1]
        if acc.watermark is None or latest > acc.watermark:
            acc.watermark = latest
    return acc


@dataclass(frozen=True)
class IntervalPartition:
    """Evenly spaced time intervals spanning the observed event range.

    Intervals are half-open ``[b_i, b_{i+1})`` with the last one closed
    on the right. A degenerate span (all events at one timestamp) puts
    everything into interval 0.
    """

    k: int
    boundaries: tuple[float, ...]

    @property
    def low(self) -> float:
        return self.boundaries[0]

    @property
    def high(self) -> float:
        return self.boundaries[-1]

    def index_of(self, timestamp: float) -> int:
        if self.high == self.low:
            return 0
        index = bisect_right(self.boundaries, timestamp) - 1
        return min(max(index, 0), self.k - 1)


def partition_intervals(events: Iterable[EventRecord], k: int) -> IntervalPartition:
    """Split the events' time range into k evenly spaced intervals."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    low = high = None
    for event in events:
        if low is None:
            low = high = event.timestamp
        elif event.timestamp < low:
            low = event.timestamp
        elif event.timestamp > high:
            high = event.timestamp
    if low is None:
        raise DataError("cannot partition an empty event collection")
    span = high - low
    boundaries = tuple(low + i * span / k for i in range(k)) + (high,)
    return IntervalPartition(k=k, boundaries=boundaries)


def assign_cascades(
    partition: IntervalPartition, cascades: Iterable[Cascade]
) -> dict[int, list[Cascade]]:
    """Group cascades by the interval containing their first event.

    A cascade straddling a boundary counts once, in its origin
    interval; its ranks and percentiles stay those of the full cascade.
    """
    by_interval: dict[int, list[Cascade]] = {}
    for cascade in cascades:
        index = partition.index_of(cascade.time_span[0])
        by_interval.setdefault(index, []).append(cascade)
    return by_interval


def rolling_scores(
    partition: IntervalPartition,
    cascades_by_interval: Mapping[int, Sequence[Cascade]],
    window: int,
    config: ScoringConfig = ScoringConfig(),
) -> list[ScoreTable]:
    """Score tables for every rolling window of ``window`` intervals.

    Each interval is scored once; the window ending at interval t is
    the merge of the per-interval tables for t-window+1 .. t. Returns
    k-window+1 tables, ordered by window end.
    """
    if not 1 <= window <= partition.k:
        raise ValueError(f"window must be in 1..{partition.k}, got {window}")
    per_interval = [
        score_set(cascades_by_interval.get(i, ()), config) for i in range(partition.k)
    ]
    windows = []
    for end in range(window - 1, partition.k):
        merged = per_interval[end - window + 1]
        for i in range(end - window + 2, end + 1):
            merged = merged.merge(per_interval[i])
        windows.append(merged)
    return windows


@dataclass(frozen=True)
class ConsistencyPoint:
    """Top-k overlap between the windows ending here and one earlier."""

    window_end_interval: int
    overlap_fraction: float
    k_used: int


@dataclass(frozen=True)
class ConsistencySeries:
    k_requested: int
    points: tuple[ConsistencyPoint, ...]


def topk_consistency(
    tables: Sequence[ScoreTable], k: int, *, window_end_offset: int = 0
) -> ConsistencySeries:
    """Fraction of the top-k participants shared by consecutive tables.

    Score ties break by participant id ascending, so the selection is
    deterministic. When a table holds fewer than k participants, k is
    clamped to that table's size for the comparison and the clamping is
    reported. ``window_end_offset`` labels ``tables[0]`` with its
    absolute interval index for output purposes.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(tables) < 2:
        raise ValueError("need at least 2 tables to compare")
    points = []
    for i in range(1, len(tables)):
        previous, current = tables[i - 1], tables[i]
        k_used = min(k, len(previous), len(current))
        if k_used < k:
            logger.warning(
                "top-%d clamped to %d at window %d (table sizes %d, %d)",
                k, k_used, window_end_offset + i, len(previous), len(current),
            )
        if k_used == 0:
            overlap = 1.0 if len(previous) == len(current) == 0 else 0.0
        else:
            top_previous = {pid for pid, _ in previous.top(k_used)}
            top_current = {pid for pid, _ in current.top(k_used)}
            overlap = len(top_previous & top_current) / k_used
        points.append(
            ConsistencyPoint(
                window_end_interval=window_end_offset + i,
                overlap_fraction=overlap,
                k_used=k_used,
            )
        )
    return ConsistencySeries(k_requested=k, points=tuple(points))


def write_consistency_csv(series: ConsistencySeries, handle: IO[str]) -> int:
    """Write ``window_end_interval,overlap_fraction`` rows, plot-ready."""
    writer = csv.writer(handle)
    writer.writerow(["window_end_interval", "overlap_fraction"])
    for point in series.points:
        writer.writerow([point.window_end_interval, f"{point.overlap_fraction:.6f}"])
    return len(series.points)
