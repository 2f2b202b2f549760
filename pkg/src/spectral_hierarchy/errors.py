"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to distinct
process exit statuses without a lookup table.
"""


class SpectralError(Exception):
    exit_code = 1


class InvalidSequence(SpectralError):
    exit_code = 2


class NonMonotone(InvalidSequence):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"sequence not strictly increasing at index {index}")


class NonFinite(InvalidSequence):
    def __init__(self, index):
        self.index = index
        super().__init__(f"non-finite value at index {index}")


class TooShort(InvalidSequence):
    def __init__(self, length, needed=2):
        self.length = length
        self.needed = needed
        super().__init__(f"need at least {needed} values, got {length}")


class Degenerate(InvalidSequence):
    pass


class ZeroSpacing(InvalidSequence):
    def __init__(self, index):
        self.index = index
        super().__init__(f"zero spacing between elements {index} and {index + 1}")


class EmptyInput(InvalidSequence):
    pass


class DomainError(SpectralError):
    exit_code = 3


class OutOfDomain(DomainError):
    def __init__(self, value, domain, index=None):
        self.value = value
        self.domain = domain
        self.index = index
        where = "" if index is None else f" (index {index})"
        super().__init__(f"{value!r} outside model domain {domain}{where}")


class OutOfRange(DomainError):
    def __init__(self, value, range_):
        self.value = value
        self.range = range_
        super().__init__(f"{value!r} outside model range {range_}")


class NumericalFailure(SpectralError):
    exit_code = 4


class NoConvergence(NumericalFailure):
    def __init__(self, iterations):
        self.iterations = iterations
        super().__init__(f"no convergence after {iterations} iterations")


class QuadratureFailure(NumericalFailure):
    pass


class TrackingLoss(NumericalFailure):
    pass


class NotRegular(SpectralError):
    exit_code = 5

    def __init__(self, spread):
        self.spread = spread
        super().__init__(f"sequence is not regular (delta spread {spread:.6g} > 1)")


class CutoffTooLarge(SpectralError):
    exit_code = 6

    def __init__(self, estimate, cap):
        self.estimate = estimate
        self.cap = cap
        super().__init__(f"orbit count estimate {estimate:.3g} exceeds cap {cap}")


class RequiresModulus(SpectralError):
    exit_code = 2


class InputError(SpectralError):
    exit_code = 7


class ParseError(InputError):
    def __init__(self, line, text=""):
        self.line = line
        super().__init__(f"cannot parse line {line}: {text!r}")


class GraphSpecError(InputError):
    pass


class FetchError(SpectralError):
    exit_code = 8


class NetworkError(FetchError):
    pass


class EmptyPayload(FetchError):
    pass
