"""Exception hierarchy shared by every corrlab module."""


class CorrlabError(Exception):
    """Base class for all library errors."""


class NegativeMass(CorrlabError, ValueError):
    pass


class BadShape(CorrlabError, ValueError):
    pass


class NotNormalized(CorrlabError, ValueError):
    pass


class EmptySubset(CorrlabError, ValueError):
    pass


class FullSubset(CorrlabError, ValueError):
    pass


class OverlappingSubsets(CorrlabError, ValueError):
    pass


class BadPartition(CorrlabError, ValueError):
    pass


class BadPoint(CorrlabError, ValueError):
    pass


class BadMetric(CorrlabError, ValueError):
    pass


class SpaceMismatch(CorrlabError, ValueError):
    pass


class CapacityExceeded(CorrlabError):
    """A dense table or transport problem is larger than the configured cap."""


class InfiniteDivergence(CorrlabError, ValueError):
    pass


class CoverDeficient(CorrlabError, ValueError):
    pass


class NotProduct(CorrlabError, ValueError):
    pass


class PreconditionError(CorrlabError, ValueError):
    pass


class BudgetInfeasible(CorrlabError):
    """No subset within the cardinality cap meets the conditional budget."""


class GoodSetTooSmall(CorrlabError):
    pass


class SamplingFailed(CorrlabError):
    pass


class SolverError(CorrlabError):
    """The transport solver returned a plan it could not certify."""


class IdentityViolation(CorrlabError, AssertionError):
    """Two routes to the same quantity disagreed beyond tolerance."""


class GuaranteeViolation(CorrlabError, AssertionError):
    """A bound that should hold under a verified hypothesis did not."""
