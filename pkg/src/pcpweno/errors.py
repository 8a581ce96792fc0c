"""Exception hierarchy shared by the solver modules and the CLI."""


class PcpError(Exception):
    """Base class for every error raised by the package."""

    category = "solver"


class ConfigError(PcpError, ValueError):
    category = "config"


class DomainError(PcpError, ValueError):
    """A primitive state outside rho > 0, p > 0, |v| < 1."""


class AdmissibilityError(PcpError, ValueError):
    """A conservative state outside D > 0, q(U) > 0."""


class ConvergenceError(PcpError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CflViolationError(PcpError, RuntimeError):
    """LLF trial states fell below the floors, so the limiter cannot repair the flux."""

    def __init__(self, message, stage=None, location=None):
        super().__init__(message)
        self.stage = stage
        self.location = location


class DegenerateGridError(PcpError, ValueError):
    category = "config"


class OutputError(PcpError, OSError):
    category = "io"
