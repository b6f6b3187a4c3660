"""Exceptions with a fixed mapping to command-line exit codes."""


class EstimateViolation(RuntimeError):
    """A monitored a-priori bound failed during a run (discretization breakdown)."""

    exit_code = 2

    def __init__(self, message: str, t: float | None = None, check: str | None = None):
        self.t = t
        self.check = check
        super().__init__(message)


class AmbiguousBlowup(RuntimeError):
    """Blowup detection could not single out one label and time."""

    exit_code = 3


class SolverBreakdown(RuntimeError):
    """Non-finite values or a degenerate state during time stepping."""

    exit_code = 1
