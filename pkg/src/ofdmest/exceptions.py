"""Exception types shared across the toolkit."""


class InputShapeError(ValueError):
    """An array argument has the wrong length, shape, or divisibility."""


class SingularPilotError(ValueError):
    """A transmitted pilot symbol is zero and cannot be inverted."""


class DegenerateEstimateError(ValueError):
    """A channel estimate is unusable (e.g. identically zero)."""


class DegenerateMeasurementError(ValueError):
    """A power-ratio measurement has a zero reference power."""


class ConfigError(ValueError):
    """A config file or CLI override is malformed; the message names the key."""


class ConvergenceError(RuntimeError):
    """The dual solver hit its iteration cap before reaching tolerance.

    Carries the last iterate and the dual-objective trace so callers can
    inspect how far the solve got.
    """

    def __init__(self, message, psi=None, objective_trace=None):
        super().__init__(message)
        self.psi = psi
        self.objective_trace = objective_trace
