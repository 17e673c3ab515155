"""Synthetic cascade generation and pipeline benchmarking.

The generator stands in for large real-world event dumps in CI: it
emits cascades contiguously (so the constant-memory grouped path
applies), deterministically for a fixed seed, and with a configurable
size distribution up to a heavy-tailed power law. The bench harness
times the full parse / build / score pipeline over repeated runs with
one discarded warm-up.
"""

from __future__ import annotations

import statistics
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .cascades import BuildOptions, EventRecord, build_cascades
from .ingest import CsvEventFormat, read_events, write_events
from .scoring import ScoringConfig, score_set

__all__ = [
    "FixedSize",
    "UniformSize",
    "PowerLawSize",
    "SyntheticSpec",
    "BenchReport",
    "generate",
    "run_bench",
    "write_bench_csv",
    "format_bench_text",
    "peak_rss_mb",
]

_CHUNK = 4096


@dataclass(frozen=True)
class FixedSize:
    size: int

    @property
    def max_size(self) -> int:
        return self.size


@dataclass(frozen=True)
class UniformSize:
    low: int
    high: int

    def __post_init__(self):
        if not 1 <= self.low <= self.high:
            raise ValueError(f"need 1 <= low <= high, got [{self.low}, {self.high}]")

    @property
    def max_size(self) -> int:
        return self.high


@dataclass(frozen=True)
class PowerLawSize:
    """Discrete power law over sizes [minimum, cap], mass ~ size**-exponent."""

    exponent: float = 2.0
    cap: int = 1000
    minimum: int = 1

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError(f"exponent must be positive, got {self.exponent}")
        if not 1 <= self.minimum <= self.cap:
            raise ValueError(f"need 1 <= minimum <= cap, got [{self.minimum}, {self.cap}]")

    @property
    def max_size(self) -> int:
        return self.cap


SizeDistribution = Union[FixedSize, UniformSize, PowerLawSize]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic synthetic event set.

    Exactly one of ``n_cascades`` / ``n_events`` sets the stopping
    rule; with ``n_events`` generation stops at the first cascade
    boundary at or past the target. Participants within a cascade are
    sampled without replacement from a pool of ``pool_size`` ids, and
    timestamps are uniform over ``time_span``, strictly increasing
    within each cascade unless ``tie_fraction`` deliberately injects
    equal-timestamp runs.
    """

    pool_size: int
    n_cascades: Optional[int] = None
    n_events: Optional[int] = None
    sizes: SizeDistribution = PowerLawSize()
    time_span: tuple[float, float] = (0.0, 1000.0)
    seed: int = 0
    tie_fraction: float = 0.0

    def __post_init__(self):
        if (self.n_cascades is None) == (self.n_events is None):
            raise ValueError("set exactly one of n_cascades / n_events")
        target = self.n_cascades if self.n_cascades is not None else self.n_events
        if target < 1:
            raise ValueError(f"target must be positive, got {target}")
        if self.pool_size < self.sizes.max_size:
            raise ValueError(
                f"pool of {self.pool_size} cannot fill cascades of up to "
                f"{self.sizes.max_size} distinct participants"
            )
        if not 0.0 <= self.tie_fraction <= 1.0:
            raise ValueError(f"tie_fraction must be in [0, 1], got {self.tie_fraction}")
        if not self.time_span[0] < self.time_span[1]:
            raise ValueError(f"time_span must be increasing, got {self.time_span}")


def _size_sampler(dist: SizeDistribution, rng: np.random.Generator):
    if isinstance(dist, FixedSize):
        return lambda count: np.full(count, dist.size, dtype=np.int64)
    if isinstance(dist, UniformSize):
        return lambda count: rng.integers(dist.low, dist.high + 1, size=count)
    supports = np.arange(dist.minimum, dist.cap + 1, dtype=np.int64)
    weights = supports.astype(np.float64) ** -dist.exponent
    weights /= weights.sum()
    return lambda count: rng.choice(supports, size=count, p=weights)


def _sample_distinct(rng: np.random.Generator, pool: int, size: int) -> list[int]:
    # Rejection sampling beats a full permutation while size << pool.
    if size * 2 >= pool:
        return rng.permutation(pool)[:size].tolist()
    out: list[int] = []
    seen: set[int] = set()
    need = size
    while need:
        for value in rng.integers(0, pool, size=need + (need >> 1) + 8).tolist():
            if value not in seen:
                seen.add(value)
                out.append(value)
                need -= 1
                if not need:
                    break
    return out


def _cascade_times(
    rng: np.random.Generator, size: int, low: float, high: float, tie_fraction: float
) -> list[float]:
    times = np.sort(rng.uniform(low, high, size))
    stamps = times.tolist()
    for i in range(1, size):
        if stamps[i] <= stamps[i - 1]:
            stamps[i] = float(np.nextafter(stamps[i - 1], np.inf))
    if tie_fraction > 0.0 and size > 1:
        ties = rng.random(size - 1) < tie_fraction
        for i, tie in enumerate(ties.tolist(), start=1):
            if tie:
                stamps[i] = stamps[i - 1]
    return stamps


def generate(spec: SyntheticSpec) -> Iterator[EventRecord]:
    """Yield events lazily, one cascade at a time, grouped by cascade id.

    Identical specs yield identical record sequences.
    """
    rng = np.random.default_rng(spec.seed)
    draw_sizes = _size_sampler(spec.sizes, rng)
    low, high = spec.time_span
    cascades_made = 0
    events_made = 0

    def done() -> bool:
        if spec.n_cascades is not None:
            return cascades_made >= spec.n_cascades
        return events_made >= spec.n_events

    while not done():
        chunk = _CHUNK
        if spec.n_cascades is not None:
            chunk = min(chunk, spec.n_cascades - cascades_made)
        sizes = draw_sizes(chunk)
        for size in sizes.tolist():
            if done():
                break
            cascade_id = f"c{cascades_made}"
            members = _sample_distinct(rng, spec.pool_size, size)
            stamps = _cascade_times(rng, size, low, high, spec.tie_fraction)
            for member, stamp in zip(members, stamps):
                yield EventRecord(cascade_id, f"u{member}", stamp)
            cascades_made += 1
            events_made += size


@dataclass(frozen=True)
class BenchReport:
    """Timings for one spec: per-stage means plus total spread."""

    events: int
    cascades: int
    participants: int
    repetitions: int
    mean_seconds: float
    stdev_seconds: float
    parse_seconds: float
    build_seconds: float
    score_seconds: float
    peak_rss_mb: Optional[float]


def peak_rss_mb() -> Optional[float]:
    """Process-lifetime peak resident set size, where the OS exposes it."""
    try:
        import resource
    except ImportError:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    divisor = 1024.0 * 1024.0 if sys.platform == "darwin" else 1024.0
    return peak / divisor


def run_bench(
    spec: SyntheticSpec,
    config: ScoringConfig = ScoringConfig(),
    repetitions: int = 7,
    *,
    build_options: BuildOptions = BuildOptions(),
) -> BenchReport:
    """Time parse -> build -> score over a materialized synthetic file.

    Runs one discarded warm-up iteration, then ``repetitions`` measured
    ones; reported stage times are means over the measured runs.
    Generation happens once, outside the clock.
    """
    if repetitions < 3:
        raise ValueError(f"need at least 3 repetitions, got {repetitions}")
    fmt = CsvEventFormat()
    totals: list[float] = []
    stage_sums = [0.0, 0.0, 0.0]
    events = cascades = participants = 0
    with tempfile.TemporaryDirectory(prefix="cascore-bench-") as tmp:
        path = str(Path(tmp) / "events.csv")
        events = write_events(path, generate(spec), fmt)
        for iteration in range(repetitions + 1):
            t0 = time.perf_counter()
            records = list(read_events(path, fmt))
            t1 = time.perf_counter()
            built = build_cascades(records, build_options)
            t2 = time.perf_counter()
            table = score_set(built, config)
            t3 = time.perf_counter()
            if iteration == 0:
                cascades = len(built)
                participants = len(table)
                continue
            totals.append(t3 - t0)
            stage_sums[0] += t1 - t0
            stage_sums[1] += t2 - t1
            stage_sums[2] += t3 - t2
    return BenchReport(
        events=events,
        cascades=cascades,
        participants=participants,
        repetitions=repetitions,
        mean_seconds=statistics.mean(totals),
        stdev_seconds=statistics.stdev(totals),
        parse_seconds=stage_sums[0] / repetitions,
        build_seconds=stage_sums[1] / repetitions,
        score_seconds=stage_sums[2] / repetitions,
        peak_rss_mb=peak_rss_mb(),
    )


def write_bench_csv(report: BenchReport, handle) -> None:
    import csv

    writer = csv.writer(handle)
    writer.writerow(
        [
            "events", "cascades", "participants", "repetitions",
            "mean_seconds", "stdev_seconds",
            "parse_seconds", "build_seconds", "score_seconds", "peak_rss_mb",
        ]
    )
    writer.writerow(
        [
            report.events, report.cascades, report.participants, report.repetitions,
            f"{report.mean_seconds:.6f}", f"{report.stdev_seconds:.6f}",
            f"{report.parse_seconds:.6f}", f"{report.build_seconds:.6f}",
            f"{report.score_seconds:.6f}",
            "" if report.peak_rss_mb is None else f"{report.peak_rss_mb:.1f}",
        ]
    )


def format_bench_text(report: BenchReport) -> str:
    rss = "n/a" if report.peak_rss_mb is None else f"{report.peak_rss_mb:.1f} MB"
    return "\n".join(
        [
            f"events:       {report.events}",
            f"cascades:     {report.cascades}",
            f"participants: {report.participants}",
            f"repetitions:  {report.repetitions} (plus 1 discarded warm-up)",
            f"total:        {report.mean_seconds:.3f} s mean, "
            f"{report.stdev_seconds:.3f} s stdev",
            f"  parse:      {report.parse_seconds:.3f} s",
            f"  build:      {report.build_seconds:.3f} s",
            f"  score:      {report.score_seconds:.3f} s",
            f"peak RSS:     {rss}",
        ]
    )
