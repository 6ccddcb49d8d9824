"""Exception hierarchy for fracwave."""


class FracwaveError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameter(FracwaveError, ValueError):
    pass


class SingularPoint(FracwaveError, ValueError):
    """Kernel evaluated at its singular point x = 0."""


class DomainError(FracwaveError, ValueError):
    pass


class ToleranceUnreachable(FracwaveError, RuntimeError):
    """Adaptive quadrature exhausted its panel budget before meeting tol."""

    def __init__(self, tol, achieved):
        super().__init__(f"requested tolerance {tol:.3g} not reached (estimate {achieved:.3g})")
        self.tol = tol
        self.achieved = achieved


class GridMismatch(FracwaveError, ValueError):
    pass


class NoConvergence(FracwaveError, RuntimeError):
    def __init__(self, iterations, last_norm, message=None):
        msg = message or f"no convergence after {iterations} iterations (residual {last_norm:.3e})"
        super().__init__(msg)
        self.iterations = iterations
        self.last_norm = last_norm


class SingularJacobian(FracwaveError, RuntimeError):
    def __init__(self, condition):
        super().__init__(f"Jacobian condition estimate {condition:.3e} exceeds cap")
        self.condition = condition


class NegativeRadicand(FracwaveError, RuntimeError):
    """Bootstrap map left the admissible set: the square root argument went negative."""

    def __init__(self, index):
        super().__init__(f"negative radicand at node {index}")
        self.index = index


class NoRealConstants(FracwaveError, ValueError):
    pass


class InadmissibleMode(FracwaveError, ValueError):
    def __init__(self, message, boundary=None):
        super().__init__(message)
        self.boundary = boundary


class NoRoot(FracwaveError, RuntimeError):
    pass


class WindowTooSmall(FracwaveError, ValueError):
    pass


class CheckpointVersionError(FracwaveError, ValueError):
    pass
