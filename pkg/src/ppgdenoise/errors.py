"""Exception hierarchy shared by all pipeline modules.

Every error carries an ``exit_code`` so the CLI can map failure categories
to distinct process exit codes: 2 config, 3 ingestion, 4 file format,
5 missing translated images, 1 anything else.
"""


class PipelineError(Exception):
    exit_code = 1


class InvalidInputError(PipelineError):
    """Operation preconditions violated (lengths, ranges, emptiness)."""


class DegenerateWindowError(InvalidInputError):
    """Window is constant, so min-max normalization is undefined."""


class UndefinedSignalPowerError(InvalidInputError):
    """Signal has zero AC power, so an S/N ratio is undefined."""


class InsufficientPeaksError(InvalidInputError):
    """Fewer than two peaks; interval-based HR metrics need at least two."""


class ShapeError(PipelineError):
    """Array shapes disagree with the fixed network layer plan."""


class ConfigError(PipelineError):
    exit_code = 2


class IngestionError(PipelineError):
    exit_code = 3


class MissingFileError(IngestionError):
    pass


class MissingColumnError(IngestionError):
    pass


class NonNumericCellError(IngestionError):
    pass


class RateError(IngestionError):
    pass


class RangeError(IngestionError):
    pass


class FormatError(PipelineError):
    exit_code = 4


class PgmFormatError(FormatError):
    """Malformed PGM file; the message names the offending header field."""


class WeightsFormatError(FormatError):
    pass


class BadMagicError(WeightsFormatError):
    pass


class VersionMismatchError(WeightsFormatError):
    pass


class TruncatedFileError(WeightsFormatError):
    """Payload shorter than declared; the message carries the byte offset."""


class TopologyError(WeightsFormatError):
    """Layer stack in the file disagrees with the fixed layer plan."""


class MissingTranslationError(PipelineError):
    exit_code = 5
