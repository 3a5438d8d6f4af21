"""Finite-truncation verification toolkit for mode-space field identities.

The package is organized around one object, the mode (a character label of
the compact group [R mod 4pi] x SU(2)), and checks every closed-form
identity of the construction it implements against an independent route:
brute-force enumeration, dense matrix algebra, or adaptive quadrature.

Modules:

    modes       mode labels, coefficient fields, propagator diagonals, bounds
    harmonics   Wigner matrices, group quadrature grids, Fourier transforms
    fockspace   truncated Fock contexts, ladder operators, coherent vectors
    chrono      pairing combinatorics and time-ordered exponentials
    symbolcalc  coherent-state symbols and growth-bound fits
    measure     regularized Fresnel integrals and the per-mode measure
    fixtures    the versioned fixture file format and bundled templates
    suites      named check batteries producing deterministic reports
    cli         the ``eufock`` command line driver
"""

from .errors import (
    AdmissibilityViolation,
    BandLimitExceeded,
    GridTooSmall,
    MissingPropagator,
    NonpositivePropagator,
    ParseError,
    SizeLimit,
    ToolkitError,
    UnknownLabel,
    ValidationError,
)
from .fixtures import Fixture, emit_fixture, load_fixture, loads_fixture, template_names
from .modes import (
    CoefficientField,
    Mode,
    PropagatorSpec,
    AdmissibleSupport,
    causal_quadratic_form,
    dual_pairing,
    eigenvalue,
    lower_bound_check,
    sobolev_norm,
    upper_bound_check,
)
from .reporting import VERSION, CheckRow, Report
from .suites import SUITE_NAMES, RunFlags, run_suite

__version__ = VERSION

__all__ = [
    "__version__",
    "VERSION",
    "Mode",
    "CoefficientField",
    "PropagatorSpec",
    "AdmissibleSupport",
    "eigenvalue",
    "sobolev_norm",
    "dual_pairing",
    "causal_quadratic_form",
    "upper_bound_check",
    "lower_bound_check",
    "Fixture",
    "load_fixture",
    "loads_fixture",
    "emit_fixture",
    "template_names",
    "CheckRow",
    "Report",
    "RunFlags",
    "run_suite",
    "SUITE_NAMES",
    "ToolkitError",
    "MissingPropagator",
    "AdmissibilityViolation",
    "NonpositivePropagator",
    "UnknownLabel",
    "BandLimitExceeded",
    "GridTooSmall",
    "SizeLimit",
    "ParseError",
    "ValidationError",
]
