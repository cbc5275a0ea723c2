"""End-to-end convolution of manifold functions through a flat torus."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from tieconv.conv import convolve
from tieconv.geometry import ScalarField, as_field, estimate_tangents
from tieconv.reach import estimate_reach
from tieconv.torus import (
    BumpProfile,
    TorusGrid,
    build_torus_grid,
    extend_field,
    make_kernel,
    parse_kernel,
)

SNAP_TOL = 1e-12
# tube_mass cells below this fraction of the peak mass are set to zero;
# below it spectral roundoff dominates the ratio
MASS_FLOOR = 1e-6


@dataclass(frozen=True)
class TieConfig:
    """Pipeline settings.

    ``kernel`` is either a grid kernel (a :class:`KernelSpec`, a descriptor
    string such as ``"gaussian:0.25rho"``, or a :class:`TorusGrid`) or a
    :class:`ScalarField` on the samples that is extended like ``f``.
    ``origin`` pins the world position of grid cell 0; by default the samples
    are centred in the box.
    """

    resolution: int = 64
    bump: str = "quintic"
    reach_override: float | None = None
    kernel: object = "delta"
    method: str = "spectral"
    normalize: str | None = None
    origin: tuple | None = None
    k_neighbors: int = 12
    manifold_dim: int | None = None
    neighbor_cap: object = "auto"

    def __post_init__(self):
        if int(self.resolution) < 4:
            raise ValueError("resolution must be at least 4")
        if self.reach_override is not None and not self.reach_override > 0:
            raise ValueError("reach_override must be positive")
        if self.method not in ("spectral", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.normalize not in (None, "tube_mass"):
            raise ValueError(f"unknown normalization {self.normalize!r}")
        BumpProfile(self.bump)  # validates the kind


@dataclass(frozen=True, eq=False)
class TieResult:
    grid_out: TorusGrid
    restricted: ScalarField
    reach_used: float
    side_used: float
    diagnostics: dict = field(default_factory=dict)


def restrict(grid, samples):
    """Multilinear periodic interpolation of the grid at each sample."""
    pts = np.asarray(samples.points if hasattr(samples, "points") else samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != grid.dim:
        raise ValueError(f"samples must have {grid.dim} coordinates")
    res = np.array(grid.resolution)
    u = grid.to_torus(pts) / grid.spacing
    base = np.floor(u)
    frac = u - base
    # snap so that samples sitting on a cell centre read that cell exactly
    frac = np.where(frac < SNAP_TOL, 0.0, frac)
    up = frac > 1.0 - SNAP_TOL
    base = np.where(up, base + 1, base)
    frac = np.where(up, 0.0, frac)
    base = base.astype(np.int64) % res

    # nested per-axis lerps: a + t (b - a) returns a exactly when a == b,
    # so constant grids restrict to the constant without rounding
    d = grid.dim
    corners = {}
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(((base + np.array(corner)) % res).T)
        corners[corner] = grid.values[idx]
    for axis in range(d - 1, -1, -1):
        t = frac[:, axis]
        corners = {
            key: corners[key + (0,)] + t * (corners[key + (1,)] - corners[key + (0,)])
            for key in itertools.product((0, 1), repeat=axis)
        }
    out = corners[()]
    return ScalarField(out)


def resolve_reach(samples, config):
    if config.reach_override is not None:
        return float(config.reach_override), None
    work = samples
    if work.tangents is None:
        work = estimate_tangents(
            work, k_neighbors=config.k_neighbors, manifold_dim=config.manifold_dim, method="jet"
        )
    est = estimate_reach(work, neighbor_cap=config.neighbor_cap)
    if not math.isfinite(est.global_reach):
        raise ValueError("reach estimate is infinite (flat data); pass reach_override")
    return est.global_reach, est


def _grid_kernel(kernel, grid, samples, reach, prof):
    if isinstance(kernel, ScalarField) or (
        isinstance(kernel, np.ndarray) and kernel.ndim == 1 and kernel.size == len(samples)
    ):
        kvals = np.asarray(kernel.values if isinstance(kernel, ScalarField) else kernel)
        if len(kvals) != len(samples):
            raise ValueError("kernel/manifold resolution mismatch: kernel field length differs from samples")
        return extend_field(samples, kvals, grid, reach, prof)
    if isinstance(kernel, TorusGrid):
        if kernel.resolution != grid.resolution:
            raise ValueError(
                f"kernel/manifold resolution mismatch: kernel {kernel.resolution} vs grid {grid.resolution}"
            )
        return grid.with_values(kernel.values)
    spec = parse_kernel(kernel).resolve(reach)
    k = make_kernel(grid.resolution, grid.side, spec)
    return grid.with_values(k.values)


def tie_convolve(samples, field, config=None):
    """Convolve ``field`` with the configured kernel through the torus box.

    Steps: reach, box, tube extension of ``field`` (and of a manifold kernel),
    circular convolution, multilinear restriction back to the samples.
    """
    config = config or TieConfig()
    fld = as_field(field, samples)
    reach, est = resolve_reach(samples, config)
    grid = build_torus_grid(samples, config.resolution, reach, origin=config.origin)
    prof = BumpProfile(config.bump, reach / 2.0)

    f_ext = extend_field(samples, fld, grid, reach, prof)
    k_ext = _grid_kernel(config.kernel, grid, samples, reach, prof)
    out = convolve(f_ext, k_ext, config.method)

    ones = extend_field(samples, np.ones(len(samples)), grid, reach, prof)
    if config.normalize == "tube_mass":
        # kernel-weighted tube mass at each cell; constants pass through unchanged
        mass = convolve(ones, k_ext, config.method).values
        floor = MASS_FLOOR * float(np.abs(mass).max())
        safe = np.abs(mass) > floor
        out = out.with_values(np.where(safe, out.values / np.where(safe, mass, 1.0), 0.0))

    h = float(grid.spacing.max())
    diagnostics = {
        "tube_cell_count": int(np.count_nonzero(ones.values)),
        "resolution_margin": (reach / 2.0) / (math.sqrt(grid.dim) * h),
        "cell_spacing": h,
        "reach_estimated": est is not None,
        "per_point_reach": None if est is None else est.per_point,
    }
    return TieResult(out, restrict(out, samples), reach, grid.side, diagnostics)
