"""Exception hierarchy shared by all modules."""


class LevySmoothError(Exception):
    """Base class for library errors."""


class ConfigError(LevySmoothError, ValueError):
    """Invalid model, grid or experiment configuration."""


class QuadratureError(LevySmoothError, ArithmeticError):
    """Quadrature failed to converge.

    Parameters
    ----------
    message : str
        Human readable description.
    residual : float, optional
        Best available estimate of the unresolved part of the integral.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class DivergenceError(QuadratureError):
    """The integral diverges (partial sums do not settle)."""


class InadmissibleWeightError(LevySmoothError, ValueError):
    """A weight q is not square integrable against the Levy measure."""


class SamplerError(LevySmoothError, ValueError):
    """Path sampling cannot proceed with the requested parameters."""


class ConvergenceError(LevySmoothError, ArithmeticError):
    """An iterative solver did not converge.

    Attributes
    ----------
    diagnostics : dict
        Solver-specific information (e.g. observed contraction factors).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
