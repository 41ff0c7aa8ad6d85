"""Exception types shared across the package."""


class MilnorianError(Exception):
    """Base class; every error raised on purpose by this package derives from it."""


class InvalidRootSystem(MilnorianError, ValueError):
    pass


class WeylGroupTooLarge(MilnorianError):
    def __init__(self, order, limit):
        super().__init__(f"Weyl group of order {order} exceeds enumeration limit {limit}")
        self.order = order
        self.limit = limit


class DimensionCapExceeded(MilnorianError):
    def __init__(self, dimension, cap, what="representation"):
        super().__init__(f"{what} has dimension {dimension}, above the cap {cap}")
        self.dimension = dimension
        self.cap = cap


class InternalConsistencyError(MilnorianError):
    """Two independent computations disagree; indicates a bug, never user error."""


class ConditionNotMet(MilnorianError):
    pass


class NotRegular(MilnorianError):
    """The element is not rho-regular with respect to the chosen X0 at the requested gaps."""


class BudgetExhausted(MilnorianError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateInvariant(MilnorianError):
    pass


class NotCollinear(MilnorianError):
    pass


class BelowDescentThreshold(MilnorianError):
    """Raised by the norm-step when the vector is already inside the stopping shell."""


class CertificationFailure(MilnorianError):
    pass


class ConfigError(MilnorianError, ValueError):
    pass
