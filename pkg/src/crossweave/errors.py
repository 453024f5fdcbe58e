"""Exception types shared across the package."""


class CorpusError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(CorpusError):
    """A knowledge-base or corpus input file is malformed or inconsistent."""


class ConfigError(CorpusError):
    """The run configuration is missing, unreadable, or invalid."""


class MarkerError(CorpusError):
    """A marked sentence cannot be round-tripped.

    Carries the offending marker ordinal when one can be identified so
    callers can route the sentence to manual review with a precise reason.
    """

    def __init__(self, message: str, ordinal: int | None = None):
        super().__init__(message)
        self.ordinal = ordinal


class StreamError(CorpusError):
    """A training-example stream violates the mixing contract."""


class PipelineError(CorpusError):
    """A pipeline stage failed; ``module`` names the stage that raised."""

    def __init__(self, module: str, message: str):
        super().__init__(f"{module}: {message}")
        self.module = module
