"""Exception types raised by the numerical routines."""


class EmptyCandidateSet(ValueError):
    """Water-filling was asked to allocate power over no channels."""


class NonpositiveBudget(ValueError):
    """Water-filling was given a total power budget that is not positive."""


class NonConvergence(ArithmeticError):
    """An adaptive quadrature or root search failed to meet its tolerance."""


class MCVarianceTooHigh(ArithmeticError):
    """A Monte Carlo root estimate cannot be resolved from its own noise."""
