"""Exception types raised across the toolkit."""

from __future__ import annotations


class TransitVulnError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TransitVulnError):
    """A file could not be parsed; carries the offending path and line number."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class ValidationError(TransitVulnError):
    """Input data parsed but violates a structural constraint."""


class UnknownStationError(TransitVulnError):
    """A station id does not exist in the graph."""


class UnknownLineError(TransitVulnError):
    """A line identifier does not exist in the graph."""


class RecordOutOfRangeError(TransitVulnError):
    """A trip record falls outside every time bin (raised only in strict mode)."""


class InvalidProfileError(TransitVulnError):
    """A synthetic demand profile is malformed or inconsistent."""


class UnreachableError(TransitVulnError):
    """No path exists between two stations that are both present in the graph."""


class MisclassifiedDisruptionError(TransitVulnError):
    """A long-delay disruption was passed to the short-delay metric."""


class DelayAboveThresholdError(TransitVulnError):
    """A requested delay exceeds the short/long classification threshold."""


class EmptyGraphError(TransitVulnError):
    """The (reconstructed) graph has too few stations for the computation."""


class ZeroDemandError(TransitVulnError):
    """An operation that needs positive demand received an all-zero matrix."""


class DegenerateSeriesError(TransitVulnError):
    """An importance series is too short for slope-based analysis."""


class LengthMismatchError(TransitVulnError):
    """Two sequences that must be paired have different lengths."""


class AllTiesError(TransitVulnError):
    """Rank correlation is undefined because one input is entirely tied."""
