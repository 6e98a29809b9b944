"""Exception types shared across the toolkit.

Every error that callers are expected to catch derives from FigchainError,
so the CLI can map the whole family onto its input-error exit code.
"""


class FigchainError(Exception):
    """Base class for all figchain errors."""


# --- SVG model ---

class MalformedXml(FigchainError):
    """Input is not well-formed XML or has no svg root."""


class UnsupportedFeature(FigchainError):
    """SVG construct outside the supported subset, with the element path."""

    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{message} (at {path})")
        self.path = path


# --- taxonomy / figure map ---

class UnknownRole(FigchainError):
    """Role token not in the two-level taxonomy."""


class FigureMapSyntaxError(FigchainError):
    """Figure-map line that does not follow the rule grammar."""

    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateSelector(FigchainError):
    """Two figure-map rules with the same selector kind and pattern."""


class AmbiguousRule(FigchainError):
    """Two rules of equal specificity match one element with different roles."""


# --- diff engine ---

class MixedAspect(FigchainError):
    """Changes in one operation span more than one taxonomy class."""

    def __init__(self, tokens):
        self.tokens = sorted(tokens)
        super().__init__("operation spans multiple aspects: " + ", ".join(self.tokens))


class NoMarks(FigchainError):
    """Neither figure version contains marks-role elements."""


# --- audit trail ---

class MsgFormat(FigchainError):
    """Commit message does not follow the [class: description] grammar."""


class UnknownClass(FigchainError):
    """Commit message class token is not a taxonomy token."""


class BranchFormat(FigchainError):
    """Branch name does not follow iteration<K>-improvement<M>."""


class MissingArtifact(FigchainError):
    """An operation lacks its before/after SVG artifact."""


class ManifestIncomplete(FigchainError):
    """A required manifest section or field is absent."""

    def __init__(self, section, message=None):
        self.section = section
        super().__init__(message or f"manifest section incomplete: {section}")


class UnknownOperation(FigchainError):
    """A verdict references an operation id not in the manifest."""


class InvalidTransition(FigchainError):
    """Iteration status change outside draft->submitted->(needs-revision->submitted)*->complete."""


# --- assessment ---

class SchemaError(FigchainError):
    """CSV header or question-bank document does not match the schema."""


class UnknownQuestion(FigchainError):
    """Response row references a question id absent from the bank."""


class ChoiceOutOfRange(FigchainError):
    """Response choice index outside 0..3."""


class DuplicateResponse(FigchainError):
    """Second response for the same (participant, question) pair."""

    def __init__(self, participant_id, question_id):
        self.participant_id = participant_id
        self.question_id = question_id
        super().__init__(f"duplicate response: participant {participant_id!r}, question {question_id!r}")


class EmptyRecords(FigchainError):
    """Scoring requires at least one record."""


class MixedVersions(FigchainError):
    """Scoring requires records from a single figure version."""


class NoAnnotatedSpan(FigchainError):
    """Pre-test derivation needs an annotated figure-reference span."""


class TermNotFound(Warning):
    """A terminology entry was not found in the question text (warning)."""


class CorrectRecomputed(Warning):
    """An input row claimed a correctness value that the bank contradicts."""


# --- model fitting ---

class NonConvergence(FigchainError):
    """Optimizer failed to reach its tolerance within the iteration cap."""


class SeparationWarning(Warning):
    """A fitted coefficient is large enough to suggest quasi-separation."""
