"""Exception types shared across the package."""


class SignwalkError(Exception):
    """Base class for errors raised by this package."""


class EdgeListError(SignwalkError):
    """Malformed or inconsistent edge-list input.

    Carries the 1-based line number when the problem is tied to a line.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(SignwalkError):
    """Invalid or missing configuration value."""


class SamplingError(SignwalkError):
    """A rejection-sampling loop exhausted its attempt budget."""


class ConvergenceError(SignwalkError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DivergenceError(SignwalkError):
    """Training produced a non-finite loss.

    ``last_params`` holds the most recent finite-loss parameters so a run
    can be resumed or inspected.
    """

    def __init__(self, message, last_params=None, epoch=None):
        super().__init__(message)
        self.last_params = last_params
        self.epoch = epoch


class StageError(SignwalkError):
    """A pipeline stage failed; earlier artifacts stay on disk."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
