"""Frobenius modules over a truncated tilted valuation ring."""

from .errors import (
    ConfigMismatch,
    GridError,
    HypothesisError,
    NoRootError,
    NotAUnit,
    ParseError,
    PrecisionExhausted,
    SolverError,
    TiltphiError,
)
from .gf import Field, FieldElement, QuadSplit, ff_frobenius, ff_frobenius_inv, ff_make, poly_roots, quad_split_fp
from .tilt import AtLeastP, RingConfig, TiltElement, format_element, parse_element

__version__ = "0.1.0"
