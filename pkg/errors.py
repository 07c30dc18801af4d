"""
Exception hierarchy for the DPP engine.

Every error carries the process exit code the command line reports for it.
"""


class DPPError(Exception):
    """Base class for all engine errors"""
    exit_code = 1


# --- Validation / domain errors (exit 1) ---

class DomainError(DPPError):
    exit_code = 1


class NotHermitian(DomainError):
    pass


class SpectrumOutOfRange(DomainError):
    pass


class NonFinite(DomainError):
    pass


class NotUnitary(DomainError):
    pass


class NotStrictContraction(DomainError):
    pass


class NotPSD(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class EmptySubset(DomainError):
    pass


class BlocksNotDisjoint(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class TooManyFactors(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class Disconnected(DomainError):
    pass


class InvalidGraph(DomainError):
    pass


class InvalidArgument(DomainError):
    pass


# --- Numerical failures (exit 1) ---

class NumericalError(DPPError):
    exit_code = 1


class DecompositionFailure(NumericalError):
    pass


class NumericalInconsistency(NumericalError):
    pass


class NumericalBreakdown(NumericalError):
    pass


# --- Input / parse errors (exit 2) ---

class InputError(DPPError):
    exit_code = 2


class ParseError(InputError):
    pass


# --- Resource caps (exit 3) ---

class ResourceLimit(DPPError):
    exit_code = 3


class DimensionTooLarge(ResourceLimit):
    pass
