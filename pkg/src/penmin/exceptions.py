"""Exception hierarchy shared by all penmin modules."""


class PenminError(Exception):
    """Base class for every error raised by penmin."""


class ValidationError(PenminError, ValueError):
    """Input data violates a documented precondition."""


class EmptyCollection(ValidationError):
    pass


class NonFiniteField(ValidationError):
    def __init__(self, record_id, field):
        self.record_id = record_id
        self.field = field
        super().__init__(f"record {record_id!r}: field {field!r} is not finite")


class DuplicateId(ValidationError):
    pass


class NegativeC(ValidationError):
    pass


class NoJump(PenminError):
    """The penalized path has a single segment."""


class ThresholdUnreachable(PenminError):
    pass


class UnboundedInterval(PenminError):
    """The last maximizing window interval extends to +inf."""


class DegenerateX(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class TooFewDimensions(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NegativeSigma2(ValidationError):
    pass


class FullDimension(ValidationError):
    pass


class FullDf(ValidationError):
    pass


class TooShort(ValidationError):
    pass


class AsymmetricM(ValidationError):
    pass


class BadRange(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class WrongFamily(ValidationError):
    pass


class SingularGrid(PenminError):
    """Some integer degrees of freedom cannot be reached by the ridge family."""
