"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An input violates a documented precondition."""


class NumericFailure(ArithmeticError):
    """A numerical routine did not converge or hit a singular system."""


class UnusableLink(ArithmeticError):
    """Estimation error is as large as the channel itself; the link carries no rate."""
