"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class MissingPropagator(ToolkitError):
    """A mode in the requested support has no propagator entry."""


class AdmissibilityViolation(ToolkitError):
    """A support set fails one of its admissibility preconditions."""


class NonpositivePropagator(ToolkitError):
    """A propagator diagonal entry is zero (or negative where positivity is required)."""


class UnknownLabel(ToolkitError):
    """A kernel or ladder operator refers to a label outside the Fock context."""


class BandLimitExceeded(ToolkitError):
    """A requested mode lies outside the band the sampling grid resolves."""


class GridTooSmall(ToolkitError):
    """A quadrature grid cannot reach the requested tolerance."""


class SizeLimit(ToolkitError):
    """An exhaustive enumeration was requested above its hard size cap."""


class ParseError(ToolkitError):
    """A fixture file is not syntactically readable."""


class ValidationError(ToolkitError):
    """A fixture file parsed but violates the schema or an invariant."""
