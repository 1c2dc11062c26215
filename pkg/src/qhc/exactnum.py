"""Exact arithmetic tower, re-exported from its three layers.

Scalars live in Q(sqrt(-1))(q), multivariate fractions in the X variables
over the Gaussian rationals, and jets are truncated power series at a base
point.  Importing from here gives the whole tower in one namespace.
"""
from .jets import (
    InexactJetDivisionError,
    Jet,
    NonUnitJetError,
    PoleError,
)
from .multivar import MvPoly, MvRat
from .scalars import (
    GR_I,
    GR_ONE,
    GR_ZERO,
    GaussRational,
    S_I,
    S_ONE,
    S_Q,
    S_ZERO,
    Scalar,
)

__all__ = [
    "GaussRational",
    "GR_ZERO",
    "GR_ONE",
    "GR_I",
    "Scalar",
    "S_ZERO",
    "S_ONE",
    "S_I",
    "S_Q",
    "MvPoly",
    "MvRat",
    "Jet",
    "PoleError",
    "NonUnitJetError",
    "InexactJetDivisionError",
]
