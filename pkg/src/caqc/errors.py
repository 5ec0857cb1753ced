"""Exception hierarchy. Every domain error derives from :class:`CaqcError`."""


class CaqcError(Exception):
    """Base class for all domain errors raised by this package."""


class DimensionError(CaqcError, ValueError):
    pass


class GeometryError(CaqcError, ValueError):
    """A pattern does not fit on the requested ring."""


class ValidationError(CaqcError):
    """A transition rule is not a valid Clifford QCA."""


class PeriodNotFoundError(CaqcError):
    pass


class DecompositionError(CaqcError):
    pass


class HypothesisError(CaqcError):
    """A construction was called outside the regime it is defined for."""


class CodeError(CaqcError):
    """Malformed stabilizer code or edge list."""


class ImpossibleOutcomeError(CaqcError):
    pass


class NonHermitianError(CaqcError, ValueError):
    pass


class DegenerateDatasetError(CaqcError):
    pass


class TrainingError(CaqcError):
    pass


class FormatError(CaqcError, ValueError):
    """Bad file contents (IDX, state dumps, JSON rules)."""
