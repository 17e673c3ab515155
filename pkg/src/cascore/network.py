"""Influence-network export with score-derived edge weights.

Each participant's contribution value is redistributed over the people
they plausibly influenced, so the exported network conserves score mass
rather than amplifying it. The underlying data never says who actually
influenced whom, so two edge rules are exposed:

* ``successor``: edges go only to the immediately following rank
  group, weight split evenly across that group (sparse, local);
* ``downstream``: edges go to every strictly later participant, weight
  split across all of them (dense; quadratic in cascade size, hence
  the guard and the optional fan-out cap).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import IO, Iterable, Optional

from .cascades import Cascade
from .errors import DataError
from .scoring import ScoringConfig, score_cascade

__all__ = ["InfluenceEdge", "export_network", "write_edges_csv"]

logger = logging.getLogger(__name__)

MODES = ("successor", "downstream")

# Above this size, downstream mode without a fan-out cap is refused.
DEFAULT_GUARD_SIZE = 10_000


@dataclass(slots=True)
class InfluenceEdge:
    """Aggregated directed edge; support counts contributing cascades."""

    source: str
    target: str
    weight: float
    support: int


def _rank_groups(cascade: Cascade) -> list[tuple[int, int]]:
    """(start, stop) index pairs of equal-timestamp entry runs."""
    groups = []
    entries = cascade.entries
    n = len(entries)
    i = 0
    while i < n:
        j = i
        rank = entries[i].rank
        while j < n and entries[j].rank == rank:
            j += 1
        groups.append((i, j))
        i = j
    return groups


def export_network(
    cascades: Iterable[Cascade],
    config: ScoringConfig = ScoringConfig(),
    mode: str = "successor",
    max_fanout: Optional[int] = None,
    *,
    guard_size: int = DEFAULT_GUARD_SIZE,
    allow_quadratic: bool = False,
) -> list[InfluenceEdge]:
    """Aggregate influence edges across cascades.

    Weights are each source's contribution value split over its targets
    (successor: the next rank group; downstream: all strictly later
    participants, normalized by the full downstream count even when
    ``max_fanout`` truncates the target list, so truncation sheds mass
    and is reported). Output is sorted by weight descending, then
    (source, target), so identical inputs export identical files.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if max_fanout is not None and max_fanout < 1:
        raise ValueError(f"max_fanout must be positive, got {max_fanout}")
    edges: dict[tuple[str, str], list] = {}
    truncated_sources = 0

    def add(source: str, target: str, weight: float) -> None:
        if source == target:
            raise DataError(
                f"self-loop {source!r} -> {target!r}; cascade entries are not deduplicated"
            )
        slot = edges.get((source, target))
        if slot is None:
            edges[(source, target)] = [weight, 1]
        else:
            slot[0] += weight
            slot[1] += 1

    for cascade in cascades:
        if (
            mode == "downstream"
            and max_fanout is None
            and cascade.size > guard_size
            and not allow_quadratic
        ):
            raise ValueError(
                f"cascade {cascade.cascade_id!r} has {cascade.size} participants; "
                f"downstream mode without max_fanout builds O(n^2) edges "
                f"(pass allow_quadratic=True to override)"
            )
        terms = score_cascade(cascade, config)
        entries = cascade.entries
        groups = _rank_groups(cascade)
        for g, (start, stop) in enumerate(groups):
            if g + 1 >= len(groups):
                break
            if mode == "successor":
                next_start, next_stop = groups[g + 1]
                share = 1.0 / (next_stop - next_start)
                for u in range(start, stop):
                    weight = terms[u].value * share
                    for w in range(next_start, next_stop):
                        add(entries[u].participant_id, entries[w].participant_id, weight)
            else:
                downstream_start = stop
                downstream_count = len(entries) - downstream_start
                downstream_stop = len(entries)
                if max_fanout is not None and downstream_count > max_fanout:
                    downstream_stop = downstream_start + max_fanout
                    truncated_sources += stop - start
                share = 1.0 / downstream_count
                for u in range(start, stop):
                    weight = terms[u].value * share
                    for w in range(downstream_start, downstream_stop):
                        add(entries[u].participant_id, entries[w].participant_id, weight)

    if truncated_sources:
        logger.warning(
            "downstream fan-out capped at %d for %d source entries; "
            "truncated edges shed their share of the score mass",
            max_fanout, truncated_sources,
        )
    result = [
        InfluenceEdge(source=source, target=target, weight=slot[0], support=slot[1])
        for (source, target), slot in edges.items()
    ]
    result.sort(key=lambda edge: (-edge.weight, edge.source, edge.target))
    return result


def write_edges_csv(edges: Iterable[InfluenceEdge], handle: IO[str]) -> int:
    """Write ``source,target,weight,support`` rows, weight at 6 decimals."""
    writer = csv.writer(handle)
    writer.writerow(["source", "target", "weight", "support"])
    count = 0
    for edge in edges:
        writer.writerow([edge.source, edge.target, f"{edge.weight:.6f}", edge.support])
        count += 1
    return count
