"""Exception types shared across the package."""

from __future__ import annotations


class EtadmError(Exception):
    """Base class for every error raised by this package."""


# --- state / rulebook ---------------------------------------------------


class SchemaError(EtadmError):
    """A rulebook, corpus, or database file violates its schema."""


class UnknownVariable(EtadmError):
    """A mutation or expression refers to an undeclared state variable."""


class TemplateSlotMissing(EtadmError):
    """A response template placeholder has no value in the current state."""


class QueueNotEmpty(EtadmError):
    """A new turn was started while events were still pending."""


# --- trigger expression language ----------------------------------------


class LexError(EtadmError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ParseError(EtadmError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        detail = f"{message} (at offset {position})"
        if expected:
            detail += f", expected one of: {', '.join(expected)}"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class ExprTypeError(EtadmError):
    """An expression is well-formed but ill-typed against the schema."""


# --- model / training ----------------------------------------------------


class DimensionMismatch(EtadmError):
    """Feature or weight dimensions disagree."""


class LabelOutOfRange(EtadmError):
    """A training record's gold action id is outside 0..A-1."""


class MissingVector(EtadmError):
    """The precomputed context encoder has no vector for a turn key."""


class ModelMissing(EtadmError):
    """A model-backed policy was requested but no parameters are loaded."""


class EmptyTrainingSet(EtadmError):
    """Training was invoked with no records."""


class EmptySplit(EtadmError):
    """A requested data split or subsample contains no dialogues."""


# --- corpus ---------------------------------------------------------------


class UnknownActionLabel(EtadmError):
    """A corpus action label does not resolve in the rulebook."""


class ReplayError(EtadmError):
    """Applying a labeled action failed while replaying a dialogue."""


# --- service --------------------------------------------------------------


class UnknownSession(EtadmError):
    """No session with the given id exists."""


class SessionBusy(EtadmError):
    """A turn is already being processed for this session."""
