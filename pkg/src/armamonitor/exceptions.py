"""Exception hierarchy shared by all submodules."""


class ArmaMonitorError(Exception):
    """Base class for every error raised by :mod:`armamonitor`."""


class InvalidModel(ArmaMonitorError, ValueError):
    """Parameter tuple does not describe a valid ARMA model."""


class NonCausal(InvalidModel):
    pass


class NonInvertible(InvalidModel):
    pass


class CommonRoot(InvalidModel):
    pass


class NonPositiveSigma(InvalidModel):
    pass


class InsufficientData(ArmaMonitorError, ValueError):
    pass


class InvalidOrder(ArmaMonitorError, ValueError):
    pass


class OptimizerDiverged(ArmaMonitorError, RuntimeError):
    pass


class NoValidFit(ArmaMonitorError, RuntimeError):
    pass


class DegenerateDrift(ArmaMonitorError, ValueError):
    """A break induces a zero drift, so no delay law exists."""


class AssumptionViolated(ArmaMonitorError, ValueError):
    pass


class TooFewDetections(ArmaMonitorError, RuntimeError):
    pass


class ParseError(ArmaMonitorError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
