"""Exception hierarchy shared by all modules."""


class ConvexSmoothError(Exception):
    """Base class."""


class DomainError(ConvexSmoothError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapabilityError(ConvexSmoothError):
    """The request exceeds a configured capability (order cap, table range, ...)."""


class NotDifferentiableError(ConvexSmoothError, ArithmeticError):
    """A derivative was requested where the function is not classically differentiable."""


class BudgetExceededError(ConvexSmoothError):
    """Branch-and-bound ran out of boxes.  ``best`` carries the bound reached so far."""

    def __init__(self, message, best=None, partial=None):
        super().__init__(message)
        self.best = best
        self.partial = partial


class PreconditionError(ConvexSmoothError, ValueError):
    """A documented precondition does not hold; ``witness`` shows where."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class WitnessInvalidError(PreconditionError):
    """A supplied extension witness disagrees with the function it should extend."""
