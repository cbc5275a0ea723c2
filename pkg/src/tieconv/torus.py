"""
The discretised flat torus ``(R / L Z)^d`` and function extension onto it.

A :class:`TorusGrid` stores one real value per cell. Cell ``i`` (a multi-index)
sits at world position ``origin + i * h`` with spacing ``h = L / N``; all index
arithmetic is modulo ``N`` per axis. World points map to torus coordinates by
``(p - origin) mod L``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from tieconv._parallel import workers
from tieconv.geometry import FormatError, as_field, diameter


@dataclass(frozen=True, eq=False)
class TorusGrid:
    """Periodic grid of real values with side length ``side`` on every axis."""

    values: np.ndarray
    side: float
    origin: np.ndarray | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim < 1 or vals.size == 0:
            raise ValueError("grid must have at least one axis and one cell")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        side = float(self.side)
        if not side > 0 or not math.isfinite(side):
            raise ValueError("side must be positive and finite")
        object.__setattr__(self, "side", side)
        org = np.zeros(vals.ndim) if self.origin is None else np.array(self.origin, dtype=float)
        if org.shape != (vals.ndim,):
            raise ValueError(f"origin must have {vals.ndim} coordinates")
        org.setflags(write=False)
        object.__setattr__(self, "origin", org)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def resolution(self):
        return self.values.shape

    @property
    def spacing(self):
        return np.array([self.side / n for n in self.resolution])

    @property
    def size(self):
        return self.values.size

    def with_values(self, values):
        return replace(self, values=np.asarray(values, dtype=float).reshape(self.resolution))

    def cell_positions(self):
        """Torus coordinates in ``[0, side)`` of every cell, shape ``(size, dim)``, row-major."""
        idx = np.indices(self.resolution).reshape(self.dim, -1).T
        return idx * self.spacing

    def to_torus(self, points):
        """Map world points to torus coordinates in ``[0, side)``."""
        t = np.mod(np.asarray(points, dtype=float) - self.origin, self.side)
        return np.where(t >= self.side, 0.0, t)


def zeros_like(grid):
    return replace(grid, values=np.zeros(grid.resolution))


# ---------------------------------------------------------------------------
# bump profiles

_KIND_ALIASES = {
    "quintic": "quintic_smoothstep",
    "quintic_smoothstep": "quintic_smoothstep",
    "mollifier": "exponential_mollifier",
    "exponential_mollifier": "exponential_mollifier",
}


@dataclass(frozen=True)
class BumpProfile:
    """Radial cutoff equal to 1 at distance 0 and 0 from ``cutoff`` on."""

    kind: str = "quintic_smoothstep"
    cutoff: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", _KIND_ALIASES[self.kind])
        except KeyError:
            raise ValueError(f"unknown bump kind {self.kind!r}") from None
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    def __call__(self, t):
        return bump(self, t)


def bump(profile, t):
    """Evaluate the bump profile at distance(s) ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("bump argument must be nonnegative")
    s = np.clip(t / profile.cutoff, 0.0, 1.0)
    if profile.kind == "quintic_smoothstep":
        # clamp: the polynomial rounds a few ulps below 0 just inside the cutoff
        out = np.clip(1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s)), 0.0, 1.0)
    else:
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(s < 1.0, np.exp(1.0 - 1.0 / (1.0 - s * s)), 0.0)
    out = np.where(s >= 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def bump_deficit_bound(kind, t, cutoff):
    """Upper bound on ``1 - bump(t)``, used to bound restriction error near the samples."""
    kind = _KIND_ALIASES[kind]
    s = min(float(t) / cutoff, 1.0)
    if kind == "quintic_smoothstep":
        return min(1.0, 10.0 * s**3)
    if s >= 1.0:
        return 1.0
    return min(1.0, s * s / (1.0 - s * s))


# ---------------------------------------------------------------------------
# boxing


class GridResolutionError(ValueError):
    def __init__(self, message, min_resolution):
        self.min_resolution = min_resolution
        super().__init__(message)


def torus_side(diam, reach):
    """Side of the periodic box: twice the diameter, widened so the tube cannot wrap onto itself."""
    return max(2.0 * diam, diam + 2.0 * reach)


def check_resolution(dim, resolution, side, reach):
    """Raise :class:`GridResolutionError` if a cell diagonal exceeds half the reach."""
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    if not reach > 0:
        raise ValueError("reach must be positive")
    diag = math.sqrt(dim) * side / resolution
    if diag > reach / 2:
        need = math.ceil(2.0 * math.sqrt(dim) * side / reach)
        while math.sqrt(dim) * side / need > reach / 2:
            need += 1
        raise GridResolutionError(
            f"grid cannot resolve the tube: cell diagonal {diag:.6g} exceeds reach/2 = "
            f"{reach / 2:.6g}; use resolution >= {need}",
            need,
        )


def build_torus_grid(samples, resolution, reach, origin=None):
    """Zeroed grid on a box around the samples, ready for :func:`extend_field`.

    The box side is ``max(2 diam, diam + 2 reach)`` and the samples' bounding box
    is centred in it unless ``origin`` pins the world position of cell 0.
    """
    resolution = int(resolution)
    diam = diameter(samples)
    side = torus_side(diam, reach)
    check_resolution(samples.dim, resolution, side, reach)
    if origin is None:
        lo = samples.points.min(axis=0)
        hi = samples.points.max(axis=0)
        origin = 0.5 * (lo + hi) - 0.5 * side
    return TorusGrid(np.zeros((resolution,) * samples.dim), side, origin)


# ---------------------------------------------------------------------------
# extension


def nearest_periodic(tree_points, side, query, bound=np.inf, chunk=1 << 18):
    """Nearest sample to each query point in the periodic metric, ties to the lowest index.

    Returns ``(index, distance)``; queries with no sample within ``bound`` get
    index ``-1`` and distance ``inf``.
    """
    tree = cKDTree(tree_points, boxsize=side)
    n = len(tree_points)
    k = min(n, 4)
    out_idx = np.full(len(query), -1, dtype=np.int64)
    out_dist = np.full(len(query), np.inf)
    ub = bound * (1.0 + 1e-12) if np.isfinite(bound) else np.inf
    for s in range(0, len(query), chunk):
        q = query[s : s + chunk]
        dist, idx = tree.query(q, k=k, distance_upper_bound=ub, workers=workers())
        dist = np.reshape(dist, (len(q), -1))
        idx = np.reshape(idx, (len(q), -1))
        best = dist.min(axis=1)
        tied = dist == best[:, None]
        cand = np.where(tied & np.isfinite(dist), idx, np.iinfo(np.int64).max)
        pick = cand.min(axis=1)
        hit = np.isfinite(best)
        out_idx[s : s + chunk] = np.where(hit, pick, -1)
        out_dist[s : s + chunk] = best
    return out_idx, out_dist


def extend_field(samples, field, grid, reach, profile="quintic"):
    """Extend a sample field onto the grid through a tube of radius ``reach / 2``.

    Each cell takes ``bump(d) * f(x)`` where ``x`` is its nearest sample in the
    torus metric and ``d`` the distance to it; cells farther than ``reach / 2``
    from every sample are zero.
    """
    fld = as_field(field, samples)
    if samples.dim != grid.dim:
        raise ValueError("sample and grid dimensions differ")
    if not reach > 0:
        raise ValueError("reach must be positive")
    prof = profile if isinstance(profile, BumpProfile) else BumpProfile(profile, reach / 2.0)
    if prof.cutoff != reach / 2.0:
        prof = BumpProfile(prof.kind, reach / 2.0)

    sample_t = grid.to_torus(samples.points)
    cells = grid.cell_positions()
    idx, dist = nearest_periodic(sample_t, grid.side, cells, bound=prof.cutoff)
    inside = (idx >= 0) & (dist <= prof.cutoff)
    vals = np.zeros(grid.size)
    vals[inside] = bump(prof, dist[inside]) * fld.values[idx[inside]]
    return grid.with_values(vals)


# ---------------------------------------------------------------------------
# grid kernels


@dataclass(frozen=True)
class KernelSpec:
    """A kernel defined directly on the grid.

    ``kind`` is one of ``delta``, ``gaussian`` (``size`` = sigma), ``box``
    (``size`` = radius) or ``file`` (``path`` to a TIEG grid). With
    ``per_reach`` the size is a multiple of the reach, resolved at run time.
    """

    kind: str
    size: float | None = None
    path: str | None = None
    per_reach: bool = False

    def resolve(self, reach):
        if not self.per_reach:
            return self
        return replace(self, size=self.size * reach, per_reach=False)


_SIZE_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*(\*?\s*(rho|reach))?\s*$")


def parse_kernel(text):
    """Parse ``delta``, ``gaussian:S``, ``box:R`` or ``file:PATH``; ``S``/``R`` may end in ``rho``."""
    if isinstance(text, KernelSpec):
        return text
    kind, _, arg = str(text).partition(":")
    kind = kind.strip().lower()
    if kind == "delta":
        return KernelSpec("delta")
    if kind == "file":
        if not arg:
            raise ValueError("file kernel needs a path")
        return KernelSpec("file", path=arg)
    if kind in ("gaussian", "box"):
        m = _SIZE_RE.match(arg)
        if not m:
            raise ValueError(f"cannot parse kernel size {arg!r}")
        return KernelSpec(kind, float(m.group(1)), per_reach=m.group(2) is not None)
    raise ValueError(f"unknown kernel {text!r}")


def _periodic_offsets(n, h):
    j = np.arange(n)
    return np.minimum(j, n - j) * h


KERNEL_SIDE_RTOL = 1e-3


def make_kernel(resolution, side, descriptor):
    """Build a grid kernel centred at cell 0."""
    spec = parse_kernel(descriptor)
    if spec.per_reach:
        raise ValueError("kernel size is relative to the reach; call spec.resolve(reach) first")
    resolution = tuple(int(n) for n in np.atleast_1d(resolution))
    dim = len(resolution)
    side = float(side)

    if spec.kind == "delta":
        vals = np.zeros(resolution)
        vals[(0,) * dim] = 1.0
    elif spec.kind == "gaussian":
        sigma = spec.size
        if sigma is None or not sigma > 0:
            raise ValueError("gaussian sigma must be positive")
        if not sigma < side / 6.0:
            raise ValueError(f"gaussian sigma must be below side/6 = {side / 6.0:.6g}")
        profiles = []
        for n in resolution:
            x = np.arange(n) * (side / n)
            images = np.arange(-3, 4)[:, None] * side
            profiles.append(np.exp(-((x[None, :] + images) ** 2) / (2.0 * sigma**2)).sum(axis=0))
        vals = profiles[0]
        for p in profiles[1:]:
            vals = np.multiply.outer(vals, p)
        vals = vals / vals.sum()
    elif spec.kind == "box":
        radius = spec.size
        if radius is None or not radius > 0:
            raise ValueError("box radius must be positive")
        sq = np.zeros(resolution)
        for axis, n in enumerate(resolution):
            off = _periodic_offsets(n, side / n) ** 2
            shape = [1] * dim
            shape[axis] = n
            sq = sq + off.reshape(shape)
        inside = np.sqrt(sq) <= radius * (1.0 + 1e-12)
        vals = inside / inside.sum()
    elif spec.kind == "file":
        loaded = read_tieg(spec.path)
        if loaded.resolution != resolution:
            raise ValueError(
                f"kernel file resolution {loaded.resolution} does not match grid {resolution}"
            )
        # the box side depends on the sampled diameter, so allow small drift
        if not math.isclose(loaded.side, side, rel_tol=KERNEL_SIDE_RTOL):
            raise ValueError(f"kernel file side {loaded.side} does not match grid side {side}")
        return TorusGrid(loaded.values, side, np.zeros(dim))
    else:
        raise ValueError(f"unknown kernel kind {spec.kind!r}")
    return TorusGrid(vals, side, np.zeros(dim))


# ---------------------------------------------------------------------------
# file formats


def write_tieg(path, grid):
    """Write ``TIEG <dim> <N...> <side> <origin...>`` then little-endian float64 values."""
    head = ["TIEG", str(grid.dim)]
    head += [str(n) for n in grid.resolution]
    head += [repr(float(grid.side))] + [repr(float(o)) for o in grid.origin]
    with open(path, "wb") as fh:
        fh.write((" ".join(head) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())


def read_tieg(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(str(exc), path) from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError("missing TIEG header line", path, 1)
    try:
        parts = raw[:nl].decode("ascii").split()
    except UnicodeDecodeError:
        raise FormatError("header is not ASCII", path, 1) from None
    if not parts or parts[0] != "TIEG":
        raise FormatError("not a TIEG file", path, 1)
    try:
        dim = int(parts[1])
        res = tuple(int(x) for x in parts[2 : 2 + dim])
        side = float(parts[2 + dim])
        origin = [float(x) for x in parts[3 + dim : 3 + 2 * dim]]
    except (IndexError, ValueError):
        raise FormatError("malformed TIEG header", path, 1) from None
    if dim < 1 or len(res) != dim or len(origin) != dim or min(res) < 1 or len(parts) != 3 + 2 * dim:
        raise FormatError("malformed TIEG header", path, 1)
    body = raw[nl + 1 :]
    count = int(np.prod(res))
    if len(body) != 8 * count:
        raise FormatError(f"expected {8 * count} data bytes, found {len(body)}", path)
    vals = np.frombuffer(body, dtype="<f8").reshape(res)
    try:
        return TorusGrid(vals.astype(float), side, origin)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def write_grid_csv(path, grid):
    """One row per cell: index tuple then value."""
    idx = np.indices(grid.resolution).reshape(grid.dim, -1).T
    vals = grid.values.reshape(-1)
    cols = ",".join(f"i{k}" for k in range(grid.dim))
    with open(path, "w") as fh:
        fh.write(f"{cols},value\n")
        for row, v in zip(idx, vals):
            fh.write(",".join(str(int(i)) for i in row) + f",{float(v)!r}\n")


def write_pgm_slice(path, grid, axis=None, index=None):
    """Write a 2D slice as ASCII PGM, values mapped affinely onto 0..255.

    For grids of dimension above 2 the slice is taken at ``index`` (default the
    middle) along each leading axis other than the last two; ``axis`` selects
    which axis to cut for 3D grids.
    """
    vals = grid.values
    if grid.dim == 1:
        plane = vals[None, :]
    elif grid.dim == 2:
        plane = vals
    else:
        plane = vals
        cut = 0 if axis is None else axis
        while plane.ndim > 2:
            where = plane.shape[cut] // 2 if index is None else index
            plane = np.take(plane, where, axis=cut)
            cut = 0
    lo, hi = float(plane.min()), float(plane.max())
    scaled = np.zeros(plane.shape, dtype=int) if hi == lo else np.rint(255 * (plane - lo) / (hi - lo)).astype(int)
    rows, cols = scaled.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n{cols} {rows}\n255\n")
        for r in scaled:
            fh.write(" ".join(str(int(v)) for v in r) + "\n")
