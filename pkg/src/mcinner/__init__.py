"""Inner functions and minimal-norm interpolation on multiply connected domains."""

from .geometry import BoundaryCurve, Domain, DomainError, load_domain, parse_domain
from .laplace import (
    GreenField,
    HarmonicField,
    LaplaceSolver,
    MeasureSet,
    SolverError,
    green,
    harmonic_conjugate,
    harmonic_measures,
    winding_number,
)

__version__ = "0.1.0"
