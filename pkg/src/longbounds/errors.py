"""Exception hierarchy shared across the package."""


class LongBoundsError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(LongBoundsError):
    """An input value violates a documented range or shape requirement."""


class InvalidDimension(ValidationError):
    """Covariate count outside the supported range."""


class ShapeError(ValidationError):
    """Mismatched dimensions between a system and a candidate point."""


class UnknownArm(ValidationError):
    """A treatment id was requested that the trial does not contain."""


class InvalidAssumption(ValidationError):
    """A bounded-variation assumption violates its structural invariants."""


class InfeasibleInput(LongBoundsError):
    """Reported summaries are mutually inconsistent beyond tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RouteError(LongBoundsError):
    """An operation was dispatched to a solver route it is not eligible for."""


class NumericalFailure(LongBoundsError):
    """A solver broke down numerically (tiny pivot, NaN gradient, ...)."""


class SolverFailure(LongBoundsError):
    """No start of a multistart run produced a usable result."""


class EmptyOracle(LongBoundsError):
    """The sampling oracle retained no feasible point at its budget."""


class DegenerateSample(LongBoundsError):
    """A simulated trial produced an empty (arm, covariate-value) stratum."""


class StudyFailure(LongBoundsError):
    """Every replication of a Monte Carlo study failed."""


class ParseError(ValidationError):
    """An input document does not match the documented schema."""
