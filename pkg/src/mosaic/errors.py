"""Exception hierarchy shared across the pipeline.

The CLI maps errors to exit codes via the ``exit_code`` attribute:
2 config, 3 backend, 4 parse, 5 segmentation.
"""


class MosaicError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


# --- configuration / input artifacts (exit 2) ---

class ConfigError(MosaicError):
    exit_code = 2


class MissingArtifacts(ConfigError):
    """A prior run's manifest or artifact files are absent."""


class BadTemplate(ConfigError):
    """Corpus template with mismatched slot counts or misplaced slots."""


class BadLexicon(ConfigError):
    """Lexicon phrase that would break the prompt grammar."""


# --- prompt parsing and pair serialization (exit 4) ---

class ParseError(MosaicError):
    exit_code = 4


class EmptyPrompt(ParseError):
    """Prompt blank after whitespace trimming."""


class NoPairsFound(ParseError):
    """A clause (or the whole prompt) matches no style-marker pattern."""


class AmbiguousClause(ParseError):
    """A clause matches two style markers at the same position."""

    def __init__(self, clause: str, readings):
        self.clause = clause
        self.readings = tuple(readings)
        options = "; ".join(f"({o!r}, {s!r})" for o, s in self.readings)
        super().__init__(f"ambiguous clause {clause!r}: readings {options}")


class IllegalPhrase(ParseError):
    """Phrase contains a control-token literal."""


class MalformedSequence(ParseError):
    """Serialized pair string violates the control-token layout."""


class UnknownToken(ParseError):
    """Word or token id outside the vocabulary."""


# --- model backends (exit 3) ---

class BackendError(MosaicError):
    exit_code = 3


class BackendUnavailable(BackendError):
    """Transport failure or backend not ready to serve."""


class BadResponse(BackendError):
    """Backend reply violates the wire contract."""


class ImageTooLarge(BackendError):
    """Image exceeds the backend-declared size limit."""


class UnknownEncoding(BackendError):
    """encoding_id not known to (or no longer held by) the backend."""


class DimensionMismatch(MosaicError):
    """Images, masks, or embeddings with incompatible dimensions."""

    exit_code = 3


# --- segmentation (exit 5) ---

class SegmentationError(MosaicError):
    exit_code = 5


class EmptyMask(SegmentationError):
    """Mask with no set pixel where one is required."""


class StageError(MosaicError):
    """Wraps a failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
