"""Exception types shared across the package."""


class NovikovError(Exception):
    """Base class for every error raised by this package."""


class ArityMismatch(NovikovError):
    pass


class RingMismatch(NovikovError):
    pass


class NotAField(NovikovError):
    pass


class NotNilpotentRing(NovikovError):
    pass


class MonoidNotStable(NovikovError):
    pass


class NotInvertible(NovikovError):
    pass


class PrecisionExhausted(NovikovError):
    pass


class EigenvalueNotInField(NovikovError):
    pass


class ZeroSeed(NovikovError):
    pass


class NotDescentDatum(NovikovError):
    pass


class CocycleViolated(NovikovError):
    pass


class HypothesisViolated(NovikovError):
    pass


class NotSquareZeroStep(NovikovError):
    pass


class AdditiveCocycleViolated(NovikovError):
    """Square-zero lift failed: the defect is not an additive cocycle."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SupportSplitFailed(NovikovError):
    pass


class ProblemSyntaxError(NovikovError):
    """Parse error in a problem file, tagged with a source position."""

    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ProblemSemanticError(NovikovError):
    pass
