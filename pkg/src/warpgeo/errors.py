"""Exception types shared across the toolkit."""


class WarpGeoError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(WarpGeoError):
    pass


class AsymmetryExceedsTol(WarpGeoError):
    pass


class FrameNotOrthonormal(WarpGeoError):
    pass


class SOutOfRange(WarpGeoError):
    pass


class BudgetZero(WarpGeoError):
    pass


class PTooLarge(WarpGeoError):
    pass


class WrongBlockCount(WarpGeoError):
    pass


class TrialsZero(WarpGeoError):
    pass


class HypothesisFailed(WarpGeoError):
    """Nullity hypotheses do not hold; downstream residuals are meaningless."""


class UmbilicalConstraintViolated(WarpGeoError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class BasePointOffQuadric(WarpGeoError):
    pass


class NonpositiveWarping(WarpGeoError):
    pass


class ResultOffQuadric(WarpGeoError):
    pass


class StepTooLargeForDomain(WarpGeoError):
    pass


class OutOfDomain(WarpGeoError):
    pass


class DegenerateGrid(WarpGeoError):
    pass


class RankDeficientJacobian(WarpGeoError):
    pass


class FactorTargetMismatch(WarpGeoError):
    pass


class DomainMismatch(WarpGeoError):
    pass


class HypothesisViolated(WarpGeoError):
    """A pointwise nullity bound fails; carries the witnessing s and point."""

    def __init__(self, message, s=None, point=None, value=None, bound=None):
        super().__init__(message)
        self.s = s
        self.point = point
        self.value = value
        self.bound = bound


class NotAdapted(WarpGeoError):
    pass


class ParseError(WarpGeoError):
    """Malformed instance document; carries location when known."""

    def __init__(self, message, source=None, line=None, column=None):
        super().__init__(message)
        self.source = source
        self.line = line
        self.column = column
