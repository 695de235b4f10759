"""Exception hierarchy.

Every error raised on bad *data* derives from :class:`DataError`; the CLI
maps those to exit code 2.
"""


class Ppg2EcgError(Exception):
    """Base class for all package errors."""


class DataError(Ppg2EcgError, ValueError):
    """The input data cannot be processed."""


class InvalidConfig(Ppg2EcgError, ValueError):
    pass


# -- ingestion / validation -------------------------------------------------

class NonFiniteSample(DataError):
    def __init__(self, position, signal="signal"):
        self.position = int(position)
        self.signal = signal
        super().__init__(f"non-finite sample in {signal} at index {self.position}")


class LengthMismatchBeyondTolerance(DataError):
    pass


class SamplingRateMismatch(DataError):
    pass


class NonMonotonePeaks(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingMeta(DataError):
    pass


class UnitMismatch(DataError):
    pass


# -- preprocessing ----------------------------------------------------------

class SignalTooShort(DataError):
    pass


class TooFewPeaks(DataError):
    pass


class InsufficientPeaks(DataError):
    pass


class EmptyOverlap(DataError):
    pass


class NoValidCycles(DataError):
    pass


class AllCyclesDegenerate(DataError):
    pass


# -- spectral / regression --------------------------------------------------

class LengthMismatch(DataError):
    pass


class BadCount(DataError):
    pass


class TooFewCycles(DataError):
    pass


class SingularSystem(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NumericalError(Ppg2EcgError, ArithmeticError):
    """A solver residual check failed."""


# -- evaluation -------------------------------------------------------------

class ZeroReference(DataError):
    pass


class ConstantInput(DataError):
    pass


class TooFewSessions(DataError):
    pass


class RankDeficientDesign(DataError):
    pass
