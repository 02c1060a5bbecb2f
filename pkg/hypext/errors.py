class HypextError(Exception):
    """Base class for every error raised by hypext."""

class GeometryError(HypextError):
    """Raised on dimension mismatch, off-hyperboloid drift or a degenerate angle."""

class SolverError(HypextError):
    """Raised when a one-point problem is ill-posed (empty map, xi on a source)."""

class ConvergenceError(SolverError):
    """Raised when strict convergence was requested and the solver did not reach it."""

class InstanceFormatError(HypextError):
    """Raised when an instance, sample or config file cannot be parsed."""


class CertificateError(HypextError):
    """Raised when a Lipschitz certificate fails and the caller cannot continue."""

    def __init__(self, message: str, report=None) -> None:
        super().__init__(message)
        self.report = report


class PipelineError(HypextError):
    """Raised when a pipeline stage aborts; carries the structured stage report."""

    def __init__(self, message: str, stage: str, report=None) -> None:
        super().__init__(message)
        self.stage = stage
        self.report = report
