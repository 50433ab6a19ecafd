"""Exception hierarchy.

``IngestError`` subclasses map to data problems; ``PipelineError`` subclasses
to invalid inputs reaching the modelling stages. The CLI turns these into
exit codes.
"""


class MocapError(Exception):
    """Base class for every error raised by this package."""


class IngestError(MocapError):
    pass


class MissingFile(IngestError):
    pass


class DuplicatePath(IngestError):
    pass


class BadLabel(IngestError):
    pass


class MissingColumn(IngestError):
    pass


class RaggedRow(IngestError):
    pass


class EmptyFile(IngestError):
    pass


class TooManyMissing(IngestError):
    pass


class AllMissing(IngestError):
    pass


class PipelineError(MocapError):
    pass


class TooShort(PipelineError):
    pass


class UnknownMarker(PipelineError):
    pass


class SingleClass(PipelineError):
    pass


class TargetTooLarge(PipelineError):
    pass


class BadConfig(PipelineError):
    pass


class EmptyData(PipelineError):
    pass


class TooFewTrials(PipelineError):
    pass


class SingleSubject(PipelineError):
    pass


class LengthMismatch(PipelineError):
    pass


class UnlabeledData(PipelineError):
    pass
