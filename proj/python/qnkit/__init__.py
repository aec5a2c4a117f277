"""Closed queueing network solvers, approximations and throughput bounds."""

from ._core import (
    BoundInterval,
    DemandMoments,
    Error,
    Model,
    ModelError,
    NumericError,
    ParseError,
    bound,
    load_model,
    moments,
    pam,
    parse_model,
    run_study,
    solve,
    solve_demands,
    solve_multichain,
    t_series,
    uja2,
)

__all__ = [
    "BoundInterval",
    "DemandMoments",
    "Error",
    "Model",
    "ModelError",
    "NumericError",
    "ParseError",
    "bound",
    "load_model",
    "moments",
    "pam",
    "parse_model",
    "run_study",
    "solve",
    "solve_demands",
    "solve_multichain",
    "t_series",
    "uja2",
]
