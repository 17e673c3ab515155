"""Early-adopter influence scoring for timestamped cascades.

Builds deduplicated, rank-annotated cascades from raw events, scores
every participant by how early and how consequentially they join,
supports incremental and rolling-window updates, and exports the
implied influence network. Designed to stay fast and memory-flat into
the millions of events.
"""

from .cascades import (
    BuildOptions,
    Cascade,
    CascadeEntry,
    EventRecord,
    build_cascades,
    stream_cascades,
)
from .errors import (
    CascoreError,
    DataError,
    DecompositionDisabled,
    MalformedLineError,
    ParticipantNotFound,
    UngroupedInputError,
)
from .ingest import ClusterTsvFormat, CsvEventFormat, IngestStats, read_events, write_events
from .network import InfluenceEdge, export_network, write_edges_csv
from .online import (
    Accumulator,
    ConsistencyPoint,
    ConsistencySeries,
    IntervalPartition,
    assign_cascades,
    partition_intervals,
    rolling_scores,
    topk_consistency,
    update,
    write_consistency_csv,
)
from .scoring import (
    ContributionTerm,
    ScoreTable,
    ScoringConfig,
    TermProfile,
    decompose,
    score_cascade,
    score_set,
    term_profile,
    write_score_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BuildOptions",
    "Cascade",
    "CascadeEntry",
    "EventRecord",
    "build_cascades",
    "stream_cascades",
    "CascoreError",
    "DataError",
    "DecompositionDisabled",
    "MalformedLineError",
    "ParticipantNotFound",
    "UngroupedInputError",
    "ClusterTsvFormat",
    "CsvEventFormat",
    "IngestStats",
    "read_events",
    "write_events",
    "InfluenceEdge",
    "export_network",
    "write_edges_csv",
    "Accumulator",
    "ConsistencyPoint",
    "ConsistencySeries",
    "IntervalPartition",
    "assign_cascades",
    "partition_intervals",
    "rolling_scores",
    "topk_consistency",
    "update",
    "write_consistency_csv",
    "ContributionTerm",
    "ScoreTable",
    "ScoringConfig",
    "TermProfile",
    "decompose",
    "score_cascade",
    "score_set",
    "term_profile",
    "write_score_csv",
    "__version__",
]
