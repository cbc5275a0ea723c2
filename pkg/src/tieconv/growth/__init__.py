"""Word growth of groups and geodesic counting."""

from tieconv.growth.fuchsian import (
    orbit_count_hyperbolic,
    orbit_counts,
    orbit_points,
    relator_residual,
    validate_generators,
)
from tieconv.growth.series import (
    GrowthClassification,
    GrowthSeries,
    ball_growth_lattice,
    ball_growth_surface_group,
    classify_growth,
    entropy_estimate,
    flat_torus_series,
    geodesic_count_flat_torus,
    hyperbolic_orbit_series,
    submultiplicativity_violations,
)
from tieconv.growth.words import SurfaceGroup

__all__ = [
    "GrowthClassification",
    "GrowthSeries",
    "SurfaceGroup",
    "ball_growth_lattice",
    "ball_growth_surface_group",
    "classify_growth",
    "entropy_estimate",
    "flat_torus_series",
    "geodesic_count_flat_torus",
    "hyperbolic_orbit_series",
    "orbit_count_hyperbolic",
    "orbit_counts",
    "orbit_points",
    "relator_residual",
    "submultiplicativity_violations",
    "validate_generators",
]
