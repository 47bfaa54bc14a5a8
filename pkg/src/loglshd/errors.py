class LogLSHDError(Exception):
    """Base class of all errors raised by loglshd."""


class LogFormatError(LogLSHDError, ValueError):
    """Raised when a log format string cannot be turned into a line pattern."""


class PreprocessRuleError(LogLSHDError, ValueError):
    """Raised when a preprocessing regular expression does not compile."""


class GroupingStrategyError(LogLSHDError, ValueError):
    """Raised when a grouping strategy enables no criterion or is malformed."""


class SignatureLengthError(LogLSHDError, ValueError):
    """Raised when MinHash signatures of different lengths are compared."""


class EmptyClusterError(LogLSHDError, ValueError):
    """Raised when representatives are requested from a cluster without members."""


class CoverageMismatchError(LogLSHDError, ValueError):
    """Raised when predictions and ground truth do not cover the same log lines."""


class ConfigurationError(LogLSHDError, ValueError):
    """Raised for invalid run parameters or config file contents."""


class CorpusReadError(LogLSHDError, OSError):
    """Raised when an input file cannot be read."""


class OutputWriteError(LogLSHDError, OSError):
    """Raised when an output artifact cannot be written."""


class PipelineStageError(LogLSHDError, RuntimeError):
    """Raised when a pipeline stage fails, naming the stage."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f'{stage}: {cause}')
        self.stage = stage
        self.cause = cause
