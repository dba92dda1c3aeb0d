"""Exception hierarchy shared across the solver library."""


class AllmachError(Exception):
    """Base class for all library errors."""


class ConfigurationError(AllmachError):
    """Invalid mesh, case, or run configuration."""


class InvalidInitialDataError(AllmachError):
    """Initial data sampled non-positive density or temperature."""


class SolverError(AllmachError):
    """Base class for runtime solver failures."""


class CflViolationError(SolverError):
    """An explicit update produced an inadmissible (non-positive) state."""


class NonlinearSolverError(SolverError):
    """The implicit temperature solve did not converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class LinearSolverError(SolverError):
    """A linear solve stagnated or diverged."""


class UnsupportedDiagnosticError(AllmachError):
    """Requested diagnostic is undefined for the given parameters (gamma = 1)."""
