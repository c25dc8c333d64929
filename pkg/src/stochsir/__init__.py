"""Threshold analysis and simulation of a stochastic SIR model with degenerate noise."""

from .boundary import StationaryDensity
from .params import (
    EXAMPLE_1,
    EXAMPLE_2,
    EXAMPLE_3,
    DerivedQuantities,
    SirParams,
    Verdict,
    derive,
    threshold_lambda,
    validate,
)
from .rng import RngStream
from .sde import PathConfig, Scheme, Trajectory

__all__ = [
    "EXAMPLE_1",
    "EXAMPLE_2",
    "EXAMPLE_3",
    "DerivedQuantities",
    "PathConfig",
    "RngStream",
    "Scheme",
    "SirParams",
    "StationaryDensity",
    "Trajectory",
    "Verdict",
    "derive",
    "threshold_lambda",
    "validate",
]
