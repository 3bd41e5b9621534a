"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised for unresolvable measures, malformed configs and bad parameters."""


class InvariantError(ValueError):
    """Raised when a constructed object violates its structural invariants."""


class CapabilityError(TypeError):
    """Raised when an operation is requested on an object that cannot support it."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap before meeting its tolerance.

    The last iterate and the residual history are attached so callers can
    inspect or report how far the method got.
    """

    def __init__(self, message, residual, iterate=None, trace=None):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
        self.iterate = iterate
        self.trace = trace if trace is not None else []


class InfeasibleError(ValueError):
    """The intersection of the measurability and feature constraints is empty."""
