"""
Reach of an embedded sample set.

For a base sample ``x`` with tangent space ``T_x`` and another sample ``y`` the
ball of radius

    r(x, y) = |y - x|^2 / (2 dist(y - x, T_x))

tangent to ``M`` at ``x`` passes through ``y``, so no normal segment at ``x``
longer than ``r(x, y)`` keeps ``x`` as its unique nearest point. Minimising over
``y`` bounds the local reach at ``x``; minimising over ``x`` bounds the reach.
Straight lines are the ambient geodesics here, both in ``R^d`` and in the flat
torus, so the construction needs nothing beyond Euclidean geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tieconv.geometry import knn

SKIP_TOL = 1e-12
FULL_SCAN_LIMIT = 5000
DEFAULT_CAP = 64


@dataclass(frozen=True, eq=False)
class ReachEstimate:
    global_reach: float
    per_point: np.ndarray
    contributing_pair: tuple[int, int] | None
    neighbor_cap: int | None
    excluded: np.ndarray

    def as_record(self):
        return {
            "global_reach": self.global_reach if math.isfinite(self.global_reach) else "inf",
            "argmin_pair": list(self.contributing_pair) if self.contributing_pair else None,
            "n_points": int(len(self.per_point)),
            "estimator": "pairwise-tangent",
            "neighbor_cap": self.neighbor_cap,
        }


def _normal_distance(disp, frame, normal):
    # distance from displacement vectors to the tangent subspace at the base point
    if frame is not None:
        coeff = np.einsum("...nd,...kd->...nk", disp, frame)
        resid = disp - np.einsum("...nk,...kd->...nd", coeff, frame)
        return np.sqrt((resid * resid).sum(axis=-1))
    return np.abs(np.einsum("...nd,...d->...n", disp, normal))


def _pair_bounds(disp, frame, normal):
    dist = _normal_distance(disp, frame, normal)
    sq = (disp * disp).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = sq / (2.0 * dist)
    return np.where(dist < SKIP_TOL, np.inf, r)


def estimate_reach(samples, neighbor_cap="auto", chunk=128):
    """Pairwise tangent-deviation estimate of the reach.

    ``samples`` must carry tangent frames, or unit normals for a hypersurface.
    ``neighbor_cap`` limits the partners of each base point to its nearest
    neighbours: ``"auto"`` scans all pairs below 5000 points and uses 64
    neighbours above, ``None`` always scans all pairs.

    Points flagged degenerate are not used as base points. Pairs whose normal
    offset is below 1e-12 are skipped; if every pair is skipped the reach is
    reported as ``inf``.
    """
    n = len(samples)
    if n < 3:
        raise ValueError("reach estimation needs at least 3 points")
    frames = samples.tangents
    normals = samples.normals
    if frames is None and (normals is None):
        raise ValueError("samples carry no tangent frames or normals; run estimate_tangents first")
    if frames is None and samples.dim < 2:
        raise ValueError("normals alone only define tangent spaces for hypersurfaces")

    if neighbor_cap == "auto":
        neighbor_cap = None if n < FULL_SCAN_LIMIT else DEFAULT_CAP
    if neighbor_cap is not None:
        neighbor_cap = int(neighbor_cap)
        if neighbor_cap < 1:
            raise ValueError("neighbor_cap must be positive")
        if neighbor_cap >= n - 1:
            neighbor_cap = None

    excluded = np.zeros(n, dtype=bool) if samples.degenerate is None else samples.degenerate.copy()
    pts = samples.points
    per_point = np.full(n, np.inf)
    partner = np.full(n, -1, dtype=np.int64)

    if neighbor_cap is None:
        for s in range(0, n, chunk):
            base = pts[s : s + chunk]
            disp = pts[None, :, :] - base[:, None, :]
            fr = frames[s : s + chunk] if frames is not None else None
            nr = normals[s : s + chunk] if frames is None else None
            r = _pair_bounds(disp, fr, nr)
            j = np.argmin(r, axis=1)  # first occurrence = lowest partner index
            per_point[s : s + chunk] = r[np.arange(len(j)), j]
            partner[s : s + chunk] = j
    else:
        idx, _ = knn(pts, neighbor_cap)
        for s in range(0, n, 4096):
            nb = idx[s : s + 4096]
            disp = pts[nb] - pts[s : s + 4096, None, :]
            fr = frames[s : s + 4096] if frames is not None else None
            nr = normals[s : s + 4096] if frames is None else None
            r = _pair_bounds(disp, fr, nr)
            # ties between partners resolved by lowest index
            order = np.lexsort((nb, r), axis=1)
            first = order[:, 0]
            rows = np.arange(len(first))
            per_point[s : s + 4096] = r[rows, first]
            partner[s : s + 4096] = nb[rows, first]

    per_point[excluded] = np.inf
    if np.all(np.isinf(per_point)):
        return ReachEstimate(math.inf, per_point, None, neighbor_cap, excluded)
    i = int(np.argmin(per_point))
    return ReachEstimate(float(per_point[i]), per_point, (i, int(partner[i])), neighbor_cap, excluded)


def analytic_reach(shape, *radii):
    """Closed-form reach of a circle, round sphere or torus of revolution.

    ``analytic_reach("circle", r)``, ``analytic_reach("sphere", r)``,
    ``analytic_reach("torus_of_revolution", R, r)``.
    """
    if any(not r > 0 for r in radii):
        raise ValueError("radii must be positive")
    if shape in ("circle", "sphere"):
        (r,) = radii
        return float(r)
    if shape in ("torus", "torus_of_revolution"):
        big, small = radii
        if not big > small:
            raise ValueError("torus needs major radius > minor radius")
        # medial axis = core circle (distance r) and the axis of revolution (distance R - r)
        return float(min(small, big - small))
    raise ValueError(f"unknown shape {shape!r}")
