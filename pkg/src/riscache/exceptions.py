"""Exception hierarchy shared by the solvers and the harness."""


class RisCacheError(Exception):
    """Base class for all package errors."""


class ConfigError(RisCacheError, ValueError):
    """Invalid configuration key or value.

    ``key`` names the offending configuration entry when one is known.
    """

    def __init__(self, message, key=None):
        if key and not message.startswith(f"{key}:"):
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key


class InfeasibleError(RisCacheError):
    """The SINR targets cannot be met by any precoder.

    ``dual_objective`` holds the (diverging) dual objective that certifies
    infeasibility and ``trace`` the per-iteration solver log.
    """

    def __init__(self, message, dual_objective=None, trace=None):
        super().__init__(message)
        self.dual_objective = dual_objective
        self.trace = trace or []


class SolverError(RisCacheError):
    """Numerical failure inside an iterative solver."""

    def __init__(self, message, trace=None, report=None):
        super().__init__(message)
        self.trace = trace or []
        self.report = report


class RankError(SolverError):
    """An SDP block is not numerically rank one."""


class StepTooLargeError(RisCacheError, ArithmeticError):
    """A retraction hit a zero-magnitude component; shrink the step."""
