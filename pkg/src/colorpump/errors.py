"""Exception hierarchy shared by all colorpump modules."""


class ColorPumpError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(ColorPumpError, ValueError):
    pass


class NoEmission(ColorPumpError):
    """The excited state is unreachable, so no photons are ever emitted."""


class Degenerate(ColorPumpError):
    """The two characteristic times coincide and the two-exponential form is singular."""


class ComplexResidual(ColorPumpError):
    pass


class IntegrationFailure(ColorPumpError):
    pass


class EventCapExceeded(ColorPumpError):
    pass


class InsufficientData(ColorPumpError, ValueError):
    pass


class NoConvergence(ColorPumpError):
    """Nonlinear solver failed; ``trace`` holds the per-iteration history."""

    def __init__(self, message, trace=None, bias=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
        self.bias = bias


class FitDiverged(ColorPumpError):
    pass


class SingularJacobian(ColorPumpError):
    pass


class ConfigError(ColorPumpError, ValueError):
    """Invalid run configuration. ``key`` is the dotted path of the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
