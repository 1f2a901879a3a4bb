"""Exception types shared across the package."""


class GlqError(Exception):
    """Base class for all errors raised by glqlab."""


class DimensionMismatch(GlqError, ValueError):
    pass


class NotCoercive(GlqError, ValueError):
    pass


class SingularMatrix(GlqError, ArithmeticError):
    pass


class NoConvergence(GlqError, ArithmeticError):
    pass


class KktSingular(GlqError, ArithmeticError):
    """The steady-state KKT matrix is numerically singular."""

    def __init__(self, message, fallback=None):
        super().__init__(message)
        # least-squares SteadyStateResult computed anyway, flagged non-unique
        self.fallback = fallback


class NonFiniteState(GlqError, ArithmeticError):
    """An integrated arc left the finite floats.

    Attributes
    ----------
    t_last : float
        Last grid time at which the state was still finite.
    last_state : ndarray
        The state sampled at ``t_last``.
    """

    def __init__(self, message, t_last=float("nan"), last_state=None):
        super().__init__(message)
        self.t_last = t_last
        self.last_state = last_state


class NotConverged(GlqError, ArithmeticError):
    def __init__(self, message, last=None, t_reached=float("nan")):
        super().__init__(message)
        self.last = last
        self.t_reached = t_reached


class SpectralUnreliable(GlqError, ArithmeticError):
    pass


class GapViolation(GlqError, ValueError):
    pass


class Unstabilizable(GlqError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExhausted(GlqError, RuntimeError):
    pass
