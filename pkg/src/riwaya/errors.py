"""Exception hierarchy shared across the toolkit.

Every error raised by riwaya derives from RiwayaError, so callers (and the
CLI) can distinguish data problems from genuine I/O failures.
"""

from __future__ import annotations


class RiwayaError(Exception):
    """Base class for all toolkit errors."""


class InvariantViolation(RiwayaError):
    """A record violates a structural invariant (bad field value)."""

    def __init__(self, field: str, reason: str = ""):
        self.field = field
        self.reason = reason
        msg = f"invariant violated on field '{field}'"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class ZeroTotal(RiwayaError):
    """Percentage requested over a zero total."""


# --- markup ----------------------------------------------------------------

class MarkupSyntaxError(RiwayaError):
    """Malformed directive or stray content in a markup file.

    Carries the 1-based line number when raised by the parser; line 0 means
    the document was built programmatically.
    """

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateOrdinal(MarkupSyntaxError):
    """Two chapters or traditions share an ordinal within one parent."""


class DanglingReference(MarkupSyntaxError):
    """An explicit @NAME[id] annotation names an id the lexicon lacks."""


class NoLexicon(RiwayaError):
    """Heuristic chain extraction invoked without any name entries."""


# --- store -----------------------------------------------------------------

class StoreIOError(RiwayaError):
    """The store directory could not be read or written."""


class DuplicateFlagKey(RiwayaError):
    """Flag vocabulary declares the same key twice."""


class UnknownParent(RiwayaError):
    """Inserted record references a parent id that does not exist."""


class UnknownEndpoint(RiwayaError):
    """Link endpoint id does not exist in its table."""


class DuplicateLink(RiwayaError):
    """The (left, right) pair is already linked under this kind."""


class UnknownId(RiwayaError):
    """A query or scope references an id that does not exist."""


class UnknownFlagKey(RiwayaError):
    """Flag key is not part of the store's declared vocabulary."""


class EmptyWork(RiwayaError):
    """Statistics requested for a work containing zero traditions."""
