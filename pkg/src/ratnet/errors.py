"""Exception hierarchy shared by every ratnet module."""


class RatnetError(Exception):
    """Base class for all errors raised by ratnet."""


class DomainError(RatnetError, ValueError):
    """A point lies outside the box an operation is defined on."""


class PoleError(RatnetError, ArithmeticError):
    """A rational function was evaluated where its denominator (nearly) vanishes."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class LpStructureError(RatnetError, ValueError):
    """Malformed linear program (dimension mismatch, non-finite data)."""


class SolverStalledError(RatnetError, RuntimeError):
    """The LP solver hit its iteration limit or gave up for numerical reasons.

    Distinct from infeasibility: nothing is known about the LP.
    """

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class InvariantViolation(RatnetError, RuntimeError):
    """An internal guarantee failed (e.g. a differential-correction LP was infeasible)."""


class DegenerateFitError(RatnetError, RuntimeError):
    """The fitted denominator is not positive on every sample."""


class BracketError(RatnetError, ValueError):
    """The bisection bracket is invalid (upper end infeasible, or lo >= hi)."""


class GridParseError(RatnetError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(RatnetError, ArithmeticError):
    """A dense linear-algebra kernel failed; ``condition`` describes the matrix involved."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
