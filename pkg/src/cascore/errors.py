"""Exception types shared across the package."""


class CascoreError(Exception):
    """Base class for all package-specific errors."""


class DataError(CascoreError):
    """Input data violates a contract (malformed line, bad record, ...)."""


class MalformedLineError(DataError):
    """A single input line could not be parsed.

    Carries the 1-based line number and a short reason so callers can
    report exactly where the input broke.
    """

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class UngroupedInputError(DataError):
    """A streaming grouper saw a cascade id split across the stream."""


class ParticipantNotFound(DataError, KeyError):
    """Lookup of a participant id that never appeared in the scored data."""

    def __init__(self, participant_id: str):
        self.participant_id = participant_id
        DataError.__init__(self, f"unknown participant: {participant_id!r}")

    def __str__(self) -> str:
        # KeyError.__str__ would repr-quote the whole message.
        return self.args[0]


class DecompositionDisabled(CascoreError):
    """Per-cascade terms were requested but were not retained during scoring."""
