"""Second-order solver for f(x) + beta * ||C x||_1."""

from ._core import (
    ConfigError,
    DimensionError,
    Error,
    NonQuadraticSmoothPart,
    Problem,
    admm,
    cauchy_problem,
    graph_trend_problem,
    min_norm_subgradient,
    problem_from_config,
    prox_problem,
    quadratic_tv_problem,
    soft_threshold,
    solve,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Error",
    "NonQuadraticSmoothPart",
    "Problem",
    "admm",
    "cauchy_problem",
    "graph_trend_problem",
    "min_norm_subgradient",
    "problem_from_config",
    "prox_problem",
    "quadratic_tv_problem",
    "soft_threshold",
    "solve",
]
