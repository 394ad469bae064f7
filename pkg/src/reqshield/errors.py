"""Exception hierarchy shared by every stage of the pipeline.

Each branch carries the process exit code the CLI maps it to, so the
service and the CLI agree on failure semantics without string matching.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_ARTIFACT = 4
EXIT_NUMERIC = 5


class ReqShieldError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DataError(ReqShieldError):
    """Input data is missing, malformed, or insufficient."""

    exit_code = EXIT_DATA


class MalformedRequest(DataError):
    """Raw text lacks anything usable as a request line."""


class CorpusFormatError(DataError):
    """A corpus file violates its declared format."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class EmptyCorpus(DataError):
    """An operation that needs at least one entry got none."""


class InsufficientData(DataError):
    """Too few Normal entries to form a training split."""


class EmptyToken(DataError):
    """classify() was handed an empty string."""


class EmptyScores(DataError):
    """A score-consuming operation received no scores."""


class LengthMismatch(DataError):
    """Paired sequences (labels vs verdicts) differ in length."""


class DegenerateDistribution(DataError):
    """Score distribution cannot support the requested threshold policy."""


class ArtifactError(ReqShieldError):
    """A stored artifact is unusable."""

    exit_code = EXIT_ARTIFACT


class ArtifactMismatch(ArtifactError):
    """Artifact contents fail hash checks or pair with the wrong vocab."""


class NumericError(ReqShieldError):
    """A numeric computation failed."""

    exit_code = EXIT_NUMERIC


class ShapeMismatch(NumericError):
    """Tensor shapes are incompatible with the requested operation."""


class NonFiniteLoss(NumericError):
    """Training produced a non-finite loss; the model keeps its last good state."""


class NonFiniteValue(NumericError):
    """A numeric routine encountered NaN or infinity."""


class StageError(ReqShieldError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
        if isinstance(cause, ReqShieldError):
            self.exit_code = cause.exit_code
        elif isinstance(cause, OSError):
            self.exit_code = EXIT_DATA
        else:
            self.exit_code = 1
