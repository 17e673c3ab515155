"""Cascade construction from raw timestamped events.

A cascade is the time-ordered set of participants that engaged with one
piece of content. Construction is deterministic and order-independent:

* participants are deduplicated to their earliest event (repeated posts
  by the same participant never inflate anyone's downstream count);
* ranks are competition ranks, so participants with equal timestamps
  share the minimum rank of their group;
* ``downstream_count`` counts participants with a strictly later
  timestamp;
* ``inverse_percentile`` is 1 for the first participant, 0 for an
  untied last participant, and 1 - rank/(n-1) in between. A
  single-participant cascade gets percentile 1 by convention.

Only the ordering of timestamps matters; any strictly increasing
re-timestamping yields identical ranks, counts, and percentiles.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .errors import DataError, UngroupedInputError

__all__ = [
    "EventRecord",
    "CascadeEntry",
    "Cascade",
    "BuildOptions",
    "build_cascades",
    "stream_cascades",
]


@dataclass(slots=True)
class EventRecord:
    """One raw observation: a participant acting in a cascade at a time.

    ``viewed`` is an optional attention flag; ``None`` means the data
    carried no such flag, which downstream scoring treats as viewed.
    """

    cascade_id: str
    participant_id: str
    timestamp: float
    viewed: Optional[bool] = None


@dataclass(slots=True)
class CascadeEntry:
    """One participant's position within a single cascade."""

    participant_id: str
    rank: int
    downstream_count: int
    inverse_percentile: float
    viewed: bool


@dataclass(slots=True)
class Cascade:
    """A deduplicated, time-ordered participant sequence.

    Entries are sorted by (timestamp, participant_id); the secondary key
    only fixes storage order for reproducible output, it never affects
    ranks or percentiles. Treat instances as immutable once built.
    """

    cascade_id: str
    entries: list[CascadeEntry]
    size: int
    time_span: tuple[float, float]


@dataclass(frozen=True)
class BuildOptions:
    """Construction knobs; deduplication is always keep-first-occurrence."""

    min_size: int = 1
    max_size: Optional[int] = None

    def admits(self, size: int) -> bool:
        if size < self.min_size:
            return False
        return self.max_size is None or size <= self.max_size


def _check_event(event: EventRecord, index: int) -> None:
    if not event.cascade_id:
        raise DataError(f"record {index}: empty cascade_id")
    if not event.participant_id:
        raise DataError(f"record {index}: empty participant_id")
    if not math.isfinite(event.timestamp):
        raise DataError(
            f"record {index}: non-finite timestamp {event.timestamp!r} "
            f"(cascade {event.cascade_id!r})"
        )


def _assemble(cascade_id: str, records: list[tuple[float, str, Optional[bool]]]) -> Cascade:
    """Build one Cascade from (timestamp, participant_id, viewed) triples."""
    # Keep-first dedup: earliest timestamp wins; among duplicates at that
    # timestamp an explicit True beats False beats absent.
    earliest: dict[str, tuple[float, Optional[bool]]] = {}
    for ts, pid, viewed in records:
        held = earliest.get(pid)
        if held is None or ts < held[0]:
            earliest[pid] = (ts, viewed)
        elif ts == held[0]:
            if viewed is True and held[1] is not True:
                earliest[pid] = (ts, True)
            elif viewed is False and held[1] is None:
                earliest[pid] = (ts, False)

    seq = sorted((ts, pid, viewed) for pid, (ts, viewed) in earliest.items())
    n = len(seq)
    entries: list[CascadeEntry] = []
    i = 0
    while i < n:
        j = i
        ts_i = seq[i][0]
        while j < n and seq[j][0] == ts_i:
            j += 1
        downstream = n - j
        percentile = 1.0 if n == 1 else 1.0 - i / (n - 1)
        for k in range(i, j):
            _, pid, viewed = seq[k]
            entries.append(
                CascadeEntry(
                    participant_id=pid,
                    rank=i,
                    downstream_count=downstream,
                    inverse_percentile=percentile,
                    viewed=viewed is not False,
                )
            )
        i = j
    return Cascade(
        cascade_id=cascade_id,
        entries=entries,
        size=n,
        time_span=(seq[0][0], seq[-1][0]),
    )


def build_cascades(
    events: Iterable[EventRecord], options: BuildOptions = BuildOptions()
) -> list[Cascade]:
    """Group events by cascade id and build every admissible cascade.

    Holds all events in memory; for inputs already grouped by cascade id
    use :func:`stream_cascades` instead. The result is sorted by
    cascade_id and is a pure function of the input multiset: shuffling
    the input never changes any cascade.

    Raises :class:`DataError` on events with empty ids or non-finite
    timestamps, reporting the offending record index.
    """
    groups: dict[str, list[tuple[float, str, Optional[bool]]]] = defaultdict(list)
    for index, event in enumerate(events):
        _check_event(event, index)
        groups[event.cascade_id].append(
            (event.timestamp, event.participant_id, event.viewed)
        )
    cascades = []
    for cascade_id in sorted(groups):
        cascade = _assemble(cascade_id, groups[cascade_id])
        if options.admits(cascade.size):
            cascades.append(cascade)
    return cascades


def stream_cascades(
    events: Iterable[EventRecord], options: BuildOptions = BuildOptions()
) -> Iterator[Cascade]:
    """Yield cascades from a stream whose events are grouped by cascade id.

    Peak memory is bounded by the largest single cascade, independent of
    the total event count, which is what makes multi-million-event runs
    cheap. The input contract is that each cascade id occupies one
    contiguous run of records (the synthetic generator and cluster-style
    exports satisfy this); a full out-of-order check would need memory
    proportional to the number of cascades, so only adjacent splits are
    detected. Use :func:`build_cascades` for arbitrary input order.
    """
    current_id: Optional[str] = None
    previous_id: Optional[str] = None
    buffer: list[tuple[float, str, Optional[bool]]] = []
    index = 0
    for event in events:
        _check_event(event, index)
        index += 1
        if event.cascade_id != current_id:
            if event.cascade_id == previous_id:
                raise UngroupedInputError(
                    f"cascade {event.cascade_id!r} reappeared after "
                    f"{current_id!r}; input is not grouped by cascade id"
                )
            if buffer:
                cascade = _assemble(current_id, buffer)
                if options.admits(cascade.size):
                    yield cascade
            previous_id = current_id
            current_id = event.cascade_id
            buffer = []
        buffer.append((event.timestamp, event.participant_id, event.viewed))
    if buffer:
        cascade = _assemble(current_id, buffer)
        if options.admits(cascade.size):
            yield cascade
