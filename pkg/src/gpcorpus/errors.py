"""Exception types shared across the package."""

from __future__ import annotations


class GPCorpusError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GPCorpusError):
    """Invalid configuration or violated operation precondition."""


class FormatError(GPCorpusError):
    """Malformed input file; carries the path and 1-based line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class TransportError(GPCorpusError):
    """Remote source unreachable or returned an HTTP-level failure."""


class PayloadError(GPCorpusError):
    """Remote source returned a response we could not parse.

    ``doc_id`` is set when the failing payload belongs to a known document.
    """

    def __init__(self, message: str, doc_id: str | None = None):
        if doc_id is not None:
            message = f"{message} (doc_id={doc_id})"
        super().__init__(message)
        self.doc_id = doc_id


class IntegrityError(GPCorpusError):
    """Cross-file inconsistency: unknown uid, duplicate mark, and the like."""


class StageError(GPCorpusError):
    """Pipeline failure attributed to the stage where it happened."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
