"""Incremental informative motion planning toolkit."""

from ._core import (
    GridWorld,
    Point2,
    bcm_fuse,
    cell_entropy,
    cli,
    explore,
    gp_predict,
    haversine_distance,
    mi_gaussian_exact,
    mi_gaussian_marginal,
    monitor,
    plan,
)

__all__ = [
    "GridWorld",
    "Point2",
    "bcm_fuse",
    "cell_entropy",
    "cli",
    "explore",
    "gp_predict",
    "haversine_distance",
    "mi_gaussian_exact",
    "mi_gaussian_marginal",
    "monitor",
    "plan",
]
