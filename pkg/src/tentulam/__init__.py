"""Ulam discretization of transfer operators for piecewise-affine expanding maps.

The two-dimensional tent family ``t * phi_1`` on ``[tau, 1]`` is the built-in
fixture; arbitrary finite piecewise-affine maps can be loaded from JSON.
"""

from .geometry import AffineMap2, Point2, Polygon, apply_affine, area, clip_convex, shared_edge_length
from .maps import TAU, PiecewiseAffineMap, comparison_map, condition_constants, eval_map, tent_family
from .ulam import UlamPartition, apply_transfer, build_partition, stationary_density, transfer_matrix

__all__ = [
    "TAU",
    "AffineMap2",
    "PiecewiseAffineMap",
    "Point2",
    "Polygon",
    "UlamPartition",
    "apply_affine",
    "apply_transfer",
    "area",
    "build_partition",
    "clip_convex",
    "comparison_map",
    "condition_constants",
    "eval_map",
    "shared_edge_length",
    "stationary_density",
    "tent_family",
    "transfer_matrix",
]
