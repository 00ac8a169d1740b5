"""Exception hierarchy shared by all modules."""


class RellichError(Exception):
    """Base class for errors raised by rellichkit."""


class DomainError(RellichError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateTensorError(RellichError):
    """The fundamental tensor is singular at the requested vector.

    Raised for l^p (p > 2) and quartic norms on coordinate hyperplanes,
    where the Hessian of F^2/2 loses rank.
    """

    def __init__(self, msg, axes=()):
        super().__init__(msg)
        self.axes = tuple(axes)


class ConvergenceError(RellichError):
    """A numerical maximization did not reach its tolerance.

    ``best`` holds the best value found so far.
    """

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class HypothesisError(RellichError, ValueError):
    """Parameters violate the hypotheses of the requested inequality."""


class QuadratureError(RellichError):
    """The integrand produced a non-finite value."""

    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location
