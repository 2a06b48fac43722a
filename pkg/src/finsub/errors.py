"""Exception hierarchy shared by all modules."""


class FinsubError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(FinsubError, ValueError):
    pass


class ZeroVector(FinsubError, ValueError):
    """A derivative was requested at the origin, where norms are not smooth."""


class InvalidNorm(FinsubError, ValueError):
    pass


class RankDeficient(FinsubError, ValueError):
    pass


class MaxIterations(FinsubError, RuntimeError):
    pass


class NonConvexEncountered(FinsubError, RuntimeError):
    """Newton direction failed to be a descent direction on the fibre."""


class TangencyViolated(FinsubError, ValueError):
    pass


class SingularKilling(FinsubError, ValueError):
    pass


class NotInGroup(FinsubError, ValueError):
    pass


class NotInvariant(FinsubError, ValueError):
    pass
