"""Capacity, placement and coverage models for satellite uplinks to linear arrays."""
from . import capacity  # the module; the function lives at satcap.capacity.capacity
from .capacity import (
    CapacityStats,
    SnrParams,
    capacity_upper_bound,
    gram,
    gram_eigenvalues,
    monte_carlo,
    rectangular_capacity,
    rotman_monte_carlo,
)
from .channel import (
    ChannelMatrix,
    RotmanParams,
    array_factor,
    build_channel,
    build_rectangular_channel,
    rotman_eta,
    rotman_matrix,
)
from .estimators import CapacityMonteCarlo, SteeringChannel, TammesPacker
from .exceptions import *  # noqa: F401,F403
from .geometry import (
    ArrayAlignment,
    ArrayConfig,
    Direction,
    direction_cosine,
    recover_direction,
    sample_hemisphere,
)
from .placement import OptimalPlacement, PlacementCase, off_diagonal_norm, optimal_nus, realize_constellation
from .sphere import (
    CoverageMode,
    CoverageReport,
    SphericalCode,
    coverage_percentage,
    covering_radius,
    hemisphere_capacity,
    interference_histogram,
    known_table,
    min_pairwise_angle,
    solve_packing,
)

__version__ = "0.1.0"
