"""atloss exceptions."""


class AtLossError(Exception):
    """Base error for atloss."""

    pass


class InvalidInputError(AtLossError):
    """Field values or dimensions are not acceptable (non-finite, negative, empty)."""

    pass


class InvalidParameterError(AtLossError):
    """A hyperparameter is outside its valid range."""

    pass


class DimensionError(AtLossError):
    """Two arrays that must share a shape do not."""

    pass


class MissingCacheError(AtLossError):
    """backward() was called before forward()."""

    pass


class NonFiniteLossError(AtLossError):
    """Training produced a NaN/Inf loss and was aborted."""

    pass


class OracleSizeError(AtLossError):
    """The exhaustive penalty oracle was asked for too many cells."""

    pass


class ConfigError(AtLossError):
    """Experiment configuration is malformed or inconsistent."""

    pass


class VerificationFailure(AtLossError):
    """A verification suite exceeded its tolerance."""

    def __init__(self, message: str, cases: list | None = None) -> None:
        super().__init__(message)
        self.cases = cases or []


class StageError(AtLossError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
