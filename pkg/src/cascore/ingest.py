"""Reading and writing event files.

Two on-disk shapes are supported:

* :class:`CsvEventFormat` for general delimited files (RFC-4180 style
  quoting, configurable delimiter, header, and column positions);
* :class:`ClusterTsvFormat` for cluster-style exports with exactly
  three tab-separated fields per line: ``cluster_id``, ``timestamp``,
  ``site_id``.

Readers stream with a constant buffer, so file size never matters.
Malformed lines are never silently dropped: strict mode raises on the
first one, lenient mode logs each to standard error and counts them.
"""

from __future__ import annotations

import csv
import logging
import math
from contextlib import nullcontext
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Union

from .cascades import EventRecord
from .errors import MalformedLineError

__all__ = [
    "CsvEventFormat",
    "ClusterTsvFormat",
    "IngestStats",
    "read_events",
    "write_events",
]

logger = logging.getLogger(__name__)

_VIEWED_VALUES = {"0": False, "1": True, "true": True, "false": False}

ColumnRef = Union[int, str]


@dataclass(frozen=True)
class CsvEventFormat:
    """Column layout of a delimited event file.

    Columns may be given as 0-based indices, or as header names when
    ``header`` is true. The three mandatory columns must be distinct.
    """

    delimiter: str = ","
    cascade_col: ColumnRef = 0
    participant_col: ColumnRef = 1
    time_col: ColumnRef = 2
    viewed_col: Optional[ColumnRef] = None
    header: bool = True

    def __post_init__(self):
        mandatory = (self.cascade_col, self.participant_col, self.time_col)
        if len(set(mandatory)) != 3:
            raise ValueError(f"cascade/participant/time columns must be distinct: {mandatory}")


@dataclass(frozen=True)
class ClusterTsvFormat:
    """Three tab-separated fields per line: cluster, timestamp, site."""


EventFormat = Union[CsvEventFormat, ClusterTsvFormat]


@dataclass
class IngestStats:
    """Counters filled in by :func:`read_events` as it goes."""

    lines: int = 0
    parsed: int = 0
    skipped: int = 0


def _parse_viewed(raw: str, line_number: int) -> Optional[bool]:
    text = raw.strip()
    if not text:
        return None
    try:
        return _VIEWED_VALUES[text.lower()]
    except KeyError:
        raise MalformedLineError(
            line_number, f"viewed flag must be one of 0/1/true/false, got {raw!r}"
        ) from None


def _parse_timestamp(raw: str, line_number: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedLineError(line_number, f"bad timestamp {raw!r}") from None
    if not math.isfinite(value):
        raise MalformedLineError(line_number, f"non-finite timestamp {raw!r}")
    return value


def _resolve_columns(fmt: CsvEventFormat, header_row: Optional[list[str]]):
    def resolve(ref: Optional[ColumnRef]) -> Optional[int]:
        if ref is None or isinstance(ref, int):
            return ref
        if header_row is None:
            raise ValueError(f"column name {ref!r} needs header=True")
        try:
            return header_row.index(ref)
        except ValueError:
            raise ValueError(f"column {ref!r} not in header {header_row}") from None

    return (
        resolve(fmt.cascade_col),
        resolve(fmt.participant_col),
        resolve(fmt.time_col),
        resolve(fmt.viewed_col),
    )


def _iter_csv(handle: IO[str], fmt: CsvEventFormat, strict: bool, stats: IngestStats):
    reader = csv.reader(handle, delimiter=fmt.delimiter)
    line_number = 0
    header_row = None
    if fmt.header:
        header_row = next(reader, None)
        line_number += 1
        if header_row is None:
            return
    c_col, p_col, t_col, v_col = _resolve_columns(fmt, header_row)
    width = max(c for c in (c_col, p_col, t_col, v_col) if c is not None) + 1
    for row in reader:
        line_number += 1
        stats.lines += 1
        try:
            if len(row) < width:
                raise MalformedLineError(
                    line_number, f"expected at least {width} fields, got {len(row)}"
                )
            cascade_id = row[c_col]
            participant_id = row[p_col]
            if not cascade_id or not participant_id:
                raise MalformedLineError(line_number, "empty cascade or participant id")
            record = EventRecord(
                cascade_id=cascade_id,
                participant_id=participant_id,
                timestamp=_parse_timestamp(row[t_col], line_number),
                viewed=None if v_col is None else _parse_viewed(row[v_col], line_number),
            )
        except MalformedLineError as exc:
            if strict:
                raise
            stats.skipped += 1
            logger.warning("skipping %s", exc)
            continue
        stats.parsed += 1
        yield record


def _iter_cluster_tsv(handle: IO[str], strict: bool, stats: IngestStats):
    for line_number, line in enumerate(handle, start=1):
        stats.lines += 1
        try:
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise MalformedLineError(
                    line_number, f"expected 3 tab-separated fields, got {len(fields)}"
                )
            cluster_id, raw_ts, site_id = fields
            if not cluster_id or not site_id:
                raise MalformedLineError(line_number, "empty cluster or site id")
            record = EventRecord(
                cascade_id=cluster_id,
                participant_id=site_id,
                timestamp=_parse_timestamp(raw_ts, line_number),
            )
        except MalformedLineError as exc:
            if strict:
                raise
            stats.skipped += 1
            logger.warning("skipping %s", exc)
            continue
        stats.parsed += 1
        yield record


def read_events(
    path: str,
    fmt: EventFormat = CsvEventFormat(),
    *,
    strict: bool = True,
    stats: Optional[IngestStats] = None,
) -> Iterator[EventRecord]:
    """Stream event records from ``path`` in file order.

    Memory use is bounded by a single line regardless of file size.
    In strict mode (the library default) the first malformed line
    raises :class:`MalformedLineError`; in lenient mode malformed lines
    are logged to standard error, counted in ``stats``, and skipped.
    """
    if stats is None:
        stats = IngestStats()
    with open(path, encoding="utf-8", newline="") as handle:
        if isinstance(fmt, ClusterTsvFormat):
            yield from _iter_cluster_tsv(handle, strict, stats)
        else:
            yield from _iter_csv(handle, fmt, strict, stats)


def _render_viewed(viewed: Optional[bool]) -> str:
    if viewed is None:
        return ""
    return "1" if viewed else "0"


def write_events(
    path: Union[str, IO[str]],
    events: Iterable[EventRecord],
    fmt: CsvEventFormat = CsvEventFormat(),
) -> int:
    """Write events as delimited text; returns the number of rows written.

    ``path`` may also be an already-open text handle, which is left
    open. The format's column mapping is honored (integer refs place
    fields at those indices, name refs land in canonical order under a
    header carrying those names), so reading the file back with the
    same format reproduces the records exactly. Timestamps are rendered
    with full round-trip precision, which makes a second round trip
    byte-identical. The viewed column is emitted only when
    ``fmt.viewed_col`` is set; records without a flag leave it blank.
    """
    refs: list[ColumnRef] = [fmt.cascade_col, fmt.participant_col, fmt.time_col]
    names = ["cascade_id", "participant_id", "timestamp"]
    if fmt.viewed_col is not None:
        refs.append(fmt.viewed_col)
        names.append("viewed")
    if all(isinstance(ref, int) for ref in refs):
        positions = list(refs)
    else:
        positions = list(range(len(refs)))
        names = [ref if isinstance(ref, str) else names[i] for i, ref in enumerate(refs)]
    width = max(positions) + 1

    def place(values: list[str]) -> list[str]:
        row = [""] * width
        for position, value in zip(positions, values):
            row[position] = value
        return row

    if hasattr(path, "write"):
        sink = nullcontext(path)
    else:
        sink = open(path, "w", encoding="utf-8", newline="")
    written = 0
    with sink as handle:
        writer = csv.writer(handle, delimiter=fmt.delimiter)
        if fmt.header:
            writer.writerow(place(names))
        for event in events:
            values = [event.cascade_id, event.participant_id, repr(event.timestamp)]
            if fmt.viewed_col is not None:
                values.append(_render_viewed(event.viewed))
            writer.writerow(place(values))
            written += 1
    return written
