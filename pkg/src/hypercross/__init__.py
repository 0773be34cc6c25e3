"""Hyperbolic cross index sets: enumeration, cardinality bounds and approximation checks."""

from .errors import HypercrossError, HypothesisViolated, PreconditionViolated, SpecError
from .weights import CrossSpec, MultiIndex, SmoothnessSequence, Tail, log_weight, validate_spec

__all__ = [
    "CrossSpec",
    "HypercrossError",
    "HypothesisViolated",
    "MultiIndex",
    "PreconditionViolated",
    "SmoothnessSequence",
    "SpecError",
    "Tail",
    "log_weight",
    "validate_spec",
]

__version__ = "0.1.0"
