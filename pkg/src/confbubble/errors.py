"""Exception types shared across the toolkit."""


class ConfBubbleError(Exception):
    """Base class for all toolkit errors."""


class OutOfDomain(ConfBubbleError):
    """A query (stencil, ball, sample set) leaves the field's domain."""


class NonFinite(ConfBubbleError):
    pass


class NonPositiveValue(ConfBubbleError):
    pass


class Singularity(ConfBubbleError):
    """A point was mapped through the inversion centre."""


class NoRoot(ConfBubbleError):
    pass


class NoSignChange(ConfBubbleError):
    """The sphere comparison never failed up to the search cap.

    ``lower_bound`` is the largest radius tested, so the critical radius is
    at least that large.
    """

    def __init__(self, message, lower_bound):
        super().__init__(message)
        self.lower_bound = lower_bound


class NotCentered(ConfBubbleError):
    pass


class BudgetExceeded(ConfBubbleError):
    pass


class PreconditionError(ConfBubbleError):
    pass


class NegativeSource(ConfBubbleError):
    pass


class ConeExit(ConfBubbleError):
    pass


class RootFail(ConfBubbleError):
    pass


class UnknownFixture(ConfBubbleError):
    pass
