class DerandError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class CapExceeded(DerandError):
    exit_code = 3


class TooLarge(CapExceeded):
    pass


class Infeasible(CapExceeded):
    pass


class NotPrime(DerandError):
    pass


class Reducible(DerandError):
    pass


class DivideByZero(DerandError):
    pass


class NotInField(DerandError):
    pass


class BadExponentBase(DerandError):
    pass


class DomainMismatch(DerandError):
    pass


class BadRange(DerandError):
    pass


class BadParams(DerandError):
    pass


class RngRequired(DerandError):
    pass


class LengthMismatch(DerandError):
    pass


class AlphabetMismatch(DerandError):
    pass


class Ambiguous(DerandError):
    pass


class Inconsistent(DerandError):
    pass


class BadLengths(DerandError):
    pass


class ErrorTooLarge(DerandError):
    pass


class UnknownDistance(DerandError):
    pass


class RankDeficient(DerandError):
    pass


class SizeMismatch(DerandError):
    pass


class ArityMismatch(DerandError):
    pass


class NoInverter(DerandError):
    pass


class AdversaryUnsupported(DerandError):
    pass


class BadThresholds(DerandError):
    pass


class ColumnMismatch(DerandError):
    pass


class MissingProvenance(DerandError):
    pass


class NotLinear(DerandError):
    pass


class OuterDecodingFailed(DerandError):
    pass


class InsufficientStretch(DerandError):
    pass
