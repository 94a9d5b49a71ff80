"""Exception types shared across the package.

The CLI maps :class:`DataError` to exit status 2 and :class:`NumericalError`
to exit status 3.
"""


class CCAPMError(Exception):
    pass


class DataError(CCAPMError, ValueError):
    """Bad user-supplied data: malformed files, missing columns, bad levels."""


class DomainError(DataError):
    """An argument lies outside the domain of a model function."""


class NumericalError(CCAPMError, ArithmeticError):
    pass


class NoFiniteEquilibrium(NumericalError):
    """The price-dividend series diverges (k >= 1)."""

    def __init__(self, k):
        self.k = k
        super().__init__(
            f"no finite equilibrium price: beta*zeta*E[x^(1-rho)] = {k!r} >= 1"
        )


class ConvergenceError(NumericalError):
    """Raised by the calibration solver when it runs out of iterations."""

    def __init__(self, message, x, sse, iterations):
        self.x = x
        self.sse = sse
        self.iterations = iterations
        super().__init__(f"{message} (iterations={iterations}, sse={sse:.3e}, x={list(x)})")
