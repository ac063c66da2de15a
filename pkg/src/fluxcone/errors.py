"""Exception types shared across the library."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class AccuracyError(ArithmeticError):
    """The requested accuracy could not be reached.

    Carries the best value obtained so far in ``best`` and the estimated
    absolute error in ``error_estimate``.
    """

    def __init__(self, message, best=None, error_estimate=None):
        super().__init__(message)
        self.best = best
        self.error_estimate = error_estimate


class IntegrandError(ValueError):
    """An integrand returned a non-finite value.

    ``location`` is the abscissa at which the bad sample occurred.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location
