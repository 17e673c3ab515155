"""Early-adopter influence scoring.

Each cascade entry contributes ``ln(d) * v * p**alpha`` where ``d`` is
the entry's downstream participant count, ``v`` is the binary attention
indicator, and ``p`` its inverse positional percentile. Entries with no
downstream participants contribute 0 (the natural-log term is otherwise
undefined at d=0, and a last participant has nobody left to influence).
Per-participant totals are plain sums across cascades, which is what
makes tables mergeable and incrementally updatable: scoring a union of
disjoint cascade sets equals merging the per-set tables.

Totals accumulate in hardware doubles without compensated summation;
terms are non-negative and bounded by ``ln(n_max)``, so reordering
error stays far inside the 1e-9 relative tolerance the contracts quote.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from statistics import mean, median
from typing import IO, Iterable, Iterator, Optional

from .cascades import Cascade
from .errors import DecompositionDisabled, ParticipantNotFound

__all__ = [
    "ScoringConfig",
    "ContributionTerm",
    "ScoreTable",
    "TermProfile",
    "score_cascade",
    "score_set",
    "decompose",
    "term_profile",
    "write_score_csv",
]


@dataclass(frozen=True)
class ScoringConfig:
    """Scoring knobs.

    ``alpha`` is the positional decay exponent; larger values punish
    late entries harder. ``use_view_filter`` controls whether the
    attention flag parsed from the data multiplies into the score or is
    forced to 1 (the default, since the flag is optional).
    """

    alpha: float = 0.5
    use_view_filter: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be finite and positive, got {self.alpha}")


@dataclass(slots=True)
class ContributionTerm:
    """One participant's contribution from one cascade, factors retained."""

    cascade_id: str
    participant_id: str
    downstream_count: int
    viewed: bool
    inverse_percentile: float
    value: float


@dataclass(slots=True)
class TermProfile:
    """Per-factor summary of a participant's retained terms.

    Separates the three behavioral axes: how early they tend to be
    (percentiles), how large their downstream reach is, and how often
    they participate at all.
    """

    participant_id: str
    cascade_count: int
    mean_percentile: float
    median_percentile: float
    mean_downstream: float
    median_downstream: float
    viewed_fraction: float


def _term_value(downstream: int, viewed: bool, percentile: float, alpha: float) -> float:
    if downstream < 1 or not viewed:
        return 0.0
    return math.log(downstream) * percentile**alpha


class ScoreTable:
    """Accumulated participant scores, mergeable and updatable.

    Holds one running total and cascade-participation count per
    participant. When built with ``retain_terms=True`` every
    contribution term is kept as well, enabling :func:`decompose` and
    :func:`term_profile` at a memory cost proportional to total events
    (the default keeps only totals, so resident size tracks the number
    of distinct participants).
    """

    def __init__(self, retain_terms: bool = False):
        self._totals: dict[str, float] = {}
        self._counts: dict[str, int] = {}
        self._terms: Optional[dict[str, list[ContributionTerm]]] = (
            {} if retain_terms else None
        )

    @property
    def retains_terms(self) -> bool:
        return self._terms is not None

    def __len__(self) -> int:
        return len(self._totals)

    def __contains__(self, participant_id: str) -> bool:
        return participant_id in self._totals

    def participants(self) -> Iterator[str]:
        return iter(self._totals)

    def total(self, participant_id: str) -> float:
        try:
            return self._totals[participant_id]
        except KeyError:
            raise ParticipantNotFound(participant_id) from None

    def cascade_count(self, participant_id: str) -> int:
        try:
            return self._counts[participant_id]
        except KeyError:
            raise ParticipantNotFound(participant_id) from None

    def items(self) -> Iterator[tuple[str, float, int]]:
        """Yield (participant_id, total_score, cascade_count) unordered."""
        counts = self._counts
        for pid, total in self._totals.items():
            yield pid, total, counts[pid]

    def _accumulate(self, participant_id: str, value: float) -> None:
        self._totals[participant_id] = self._totals.get(participant_id, 0.0) + value
        self._counts[participant_id] = self._counts.get(participant_id, 0) + 1

    def add_term(self, term: ContributionTerm) -> None:
        self._accumulate(term.participant_id, term.value)
        if self._terms is not None:
            self._terms.setdefault(term.participant_id, []).append(term)

    def terms_for(self, participant_id: str) -> list[ContributionTerm]:
        if self._terms is None:
            raise DecompositionDisabled(
                "terms were not retained; score with retain_terms=True to decompose"
            )
        if participant_id not in self._totals:
            raise ParticipantNotFound(participant_id)
        return self._terms[participant_id]

    def merge(self, other: "ScoreTable") -> "ScoreTable":
        """Return a new table with per-participant totals and counts summed."""
        if self.retains_terms != other.retains_terms:
            raise ValueError("cannot merge a term-retaining table with a totals-only one")
        merged = ScoreTable(retain_terms=self.retains_terms)
        for source in (self, other):
            for pid, total in source._totals.items():
                merged._totals[pid] = merged._totals.get(pid, 0.0) + total
                merged._counts[pid] = merged._counts.get(pid, 0) + source._counts[pid]
            if merged._terms is not None:
                for pid, terms in source._terms.items():
                    merged._terms.setdefault(pid, []).extend(terms)
        return merged

    def top(self, k: int) -> list[tuple[str, float]]:
        """The k highest-scoring participants; ties break by id ascending."""
        ranked = sorted(self._totals.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:k]


def score_cascade(cascade: Cascade, config: ScoringConfig = ScoringConfig()) -> list[ContributionTerm]:
    """Evaluate the metric for every entry of one cascade.

    Terms come back in entry order. The attention factor is read from
    the entry only when ``config.use_view_filter`` is set; otherwise it
    is forced to 1.
    """
    alpha = config.alpha
    use_filter = config.use_view_filter
    terms = []
    for entry in cascade.entries:
        viewed = entry.viewed if use_filter else True
        terms.append(
            ContributionTerm(
                cascade_id=cascade.cascade_id,
                participant_id=entry.participant_id,
                downstream_count=entry.downstream_count,
                viewed=viewed,
                inverse_percentile=entry.inverse_percentile,
                value=_term_value(entry.downstream_count, viewed, entry.inverse_percentile, alpha),
            )
        )
    return terms


def score_set(
    cascades: Iterable[Cascade],
    config: ScoringConfig = ScoringConfig(),
    *,
    retain_terms: bool = False,
) -> ScoreTable:
    """Accumulate scores over a stream of cascades.

    Consumes one cascade at a time; with ``retain_terms=False`` the
    resident state is just the per-participant totals, independent of
    how many events flow through.
    """
    table = ScoreTable(retain_terms=retain_terms)
    if retain_terms:
        for cascade in cascades:
            for term in score_cascade(cascade, config):
                table.add_term(term)
        return table
    # Fast path: same formula without materializing term objects.
    alpha = config.alpha
    use_filter = config.use_view_filter
    totals = table._totals
    counts = table._counts
    log = math.log
    for cascade in cascades:
        for entry in cascade.entries:
            pid = entry.participant_id
            downstream = entry.downstream_count
            if downstream >= 1 and (not use_filter or entry.viewed):
                value = log(downstream) * entry.inverse_percentile**alpha
                totals[pid] = totals.get(pid, 0.0) + value
            elif pid not in totals:
                totals[pid] = 0.0
            counts[pid] = counts.get(pid, 0) + 1
    return table


def decompose(table: ScoreTable, participant_id: str, top_n: int) -> list[ContributionTerm]:
    """The participant's largest contribution terms, value-descending.

    Requires a table built with ``retain_terms=True``; raises
    :class:`DecompositionDisabled` otherwise. An id that never appeared
    raises :class:`ParticipantNotFound` (a ``KeyError``) so absence is
    distinguishable from a participant whose terms are all zero.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be positive, got {top_n}")
    terms = table.terms_for(participant_id)
    ranked = sorted(terms, key=lambda term: (-term.value, term.cascade_id))
    return ranked[:top_n]


def term_profile(table: ScoreTable, participant_id: str) -> TermProfile:
    """Summary statistics of each scoring factor for one participant."""
    terms = table.terms_for(participant_id)
    percentiles = [term.inverse_percentile for term in terms]
    downstreams = [term.downstream_count for term in terms]
    return TermProfile(
        participant_id=participant_id,
        cascade_count=len(terms),
        mean_percentile=mean(percentiles),
        median_percentile=median(percentiles),
        mean_downstream=mean(downstreams),
        median_downstream=median(downstreams),
        viewed_fraction=sum(1 for term in terms if term.viewed) / len(terms),
    )


def write_score_csv(table: ScoreTable, handle: IO[str]) -> int:
    """Write ``participant_id,total_score,cascade_count`` rows.

    Sorted by score descending then id ascending, scores at 6 decimal
    places; deterministic for identical inputs.
    """
    writer = csv.writer(handle)
    writer.writerow(["participant_id", "total_score", "cascade_count"])
    rows = sorted(table.items(), key=lambda row: (-row[1], row[0]))
    for pid, total, count in rows:
        writer.writerow([pid, f"{total:.6f}", count])
    return len(rows)
