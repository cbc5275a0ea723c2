"""Growth series, their classification, and the generators of each series."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from tieconv.growth.fuchsian import MAX_RADIUS, orbit_counts
from tieconv.growth.words import SurfaceGroup

LATTICE_MAX_DIM = 4
LATTICE_MAX_RADIUS = 50
SURFACE_GENERA = (2, 3)
SURFACE_MAX_LENGTH = 8
FLAT_TORUS_MAX_DIM = 3


@dataclass(frozen=True, eq=False)
class GrowthSeries:
    """Counts indexed by an increasing radius.

    ``kind`` is ``"word"`` for word-ball counts (integer radii starting at 0),
    which makes submultiplicativity meaningful, or ``"geodesic"`` otherwise.
    """

    radii: np.ndarray
    counts: np.ndarray
    label: str = ""
    kind: str = "geodesic"

    def __post_init__(self):
        r = np.array(self.radii, dtype=float)
        c = np.array(self.counts, dtype=np.int64)
        if r.ndim != 1 or r.shape != c.shape or len(r) == 0:
            raise ValueError("radii and counts must be equal-length 1-d sequences")
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")
        if c[0] < 1:
            raise ValueError("counts must start at 1 or more")
        if np.any(np.diff(c) < 0):
            raise ValueError("counts must be nondecreasing")
        r.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "counts", c)

    def __len__(self):
        return len(self.radii)

    def rows(self):
        for r, c in zip(self.radii, self.counts):
            yield (int(r) if float(r).is_integer() else float(r)), int(c)


@dataclass(frozen=True)
class GrowthClassification:
    kind: str  # "polynomial", "exponential" or "bounded"
    parameter: float  # degree or rate; 0 when bounded
    fit_residual: float

    @property
    def degree(self):
        return self.parameter if self.kind == "polynomial" else None

    @property
    def rate(self):
        return self.parameter if self.kind == "exponential" else None

    def as_record(self):
        rec = {"kind": self.kind, "fit_residual": self.fit_residual}
        if self.kind == "polynomial":
            rec["degree"] = self.parameter
        elif self.kind == "exponential":
            rec["rate"] = self.parameter
        return rec


# ---------------------------------------------------------------------------
# series producers


def _symmetrize(gens):
    out = []
    for g in gens:
        for v in (tuple(g), tuple(-x for x in g)):
            if any(v) and v not in out:
                out.append(v)
    return out


def ball_growth_lattice(d, m_max, generators=None):
    """Word-ball sizes of ``Z^d`` by breadth-first search on its Cayley graph.

    ``generators`` defaults to the unit vectors; any list of integer vectors is
    accepted and symmetrised.
    """
    d, m_max = int(d), int(m_max)
    if not 1 <= d <= LATTICE_MAX_DIM:
        raise ValueError(f"lattice dimension must be in 1..{LATTICE_MAX_DIM}")
    if not 0 <= m_max <= LATTICE_MAX_RADIUS:
        raise ValueError(f"m_max must be in 0..{LATTICE_MAX_RADIUS}")
    if generators is None:
        generators = np.eye(d, dtype=np.int64)
    gens = np.array(_symmetrize(np.asarray(generators, dtype=np.int64)), dtype=np.int64)
    if gens.ndim != 2 or gens.shape[1] != d:
        raise ValueError(f"generators must be {d}-vectors")

    # mixed-radix code of a lattice point; wide enough that sums never carry
    reach = m_max * int(np.abs(gens).max())
    base = 2 * reach + 1
    weights = base ** np.arange(d, dtype=np.int64)
    origin = int(reach * weights.sum())
    steps = gens @ weights

    prev = np.array([], dtype=np.int64)
    sphere = np.array([origin], dtype=np.int64)
    sizes = [1]
    for _ in range(m_max):
        nb = np.unique((sphere[:, None] + steps[None, :]).ravel())
        # symmetric generators: neighbours of a sphere lie in the adjacent spheres
        new = np.setdiff1d(np.setdiff1d(nb, sphere, assume_unique=True), prev, assume_unique=True)
        prev, sphere = sphere, new
        sizes.append(len(new))
    counts = np.cumsum(sizes)
    return GrowthSeries(np.arange(m_max + 1), counts, f"Z^{d} word balls", kind="word")


def ball_growth_surface_group(genus, m_max):
    """Word-ball sizes of the genus-``g`` surface group under its standard generators."""
    genus, m_max = int(genus), int(m_max)
    if genus not in SURFACE_GENERA:
        raise ValueError(f"genus must be one of {SURFACE_GENERA}")
    if not 0 <= m_max <= SURFACE_MAX_LENGTH:
        raise ValueError(f"m_max must be in 0..{SURFACE_MAX_LENGTH}")
    sizes = SurfaceGroup(genus).sphere_sizes(m_max) if m_max else [1]
    return GrowthSeries(
        np.arange(m_max + 1), np.cumsum(sizes), f"genus-{genus} surface group word balls", kind="word"
    )


def geodesic_count_flat_torus(d, side, x, y, length):
    """Geodesic arcs of length at most ``length`` from ``x`` to ``y`` on ``(R / side Z)^d``.

    Each arc lifts to a straight segment ``y - x + z`` with ``z`` in ``side * Z^d``.
    When ``x == y`` the constant path is not counted.
    """
    d = int(d)
    if not 1 <= d <= FLAT_TORUS_MAX_DIM:
        raise ValueError(f"dimension must be in 1..{FLAT_TORUS_MAX_DIM}")
    if not side > 0:
        raise ValueError("side must be positive")
    if length < 0:
        raise ValueError("length must be nonnegative")
    w = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if w.shape != (d,):
        raise ValueError(f"points must have {d} coordinates")
    ranges = [
        np.arange(math.floor((-length - wi) / side) - 1, math.ceil((length - wi) / side) + 2)
        for wi in w
    ]
    z = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d) * side
    v = w + z
    sq = (v * v).sum(axis=1)
    hit = (sq <= length * length) & (sq > 0)
    return int(np.count_nonzero(hit))


def flat_torus_series(d, side, x, y, radii):
    radii = np.asarray(radii, dtype=float)
    counts = [geodesic_count_flat_torus(d, side, x, y, r) for r in radii]
    return GrowthSeries(radii, counts, f"flat {d}-torus geodesic counts, side {side}")


def hyperbolic_orbit_series(radii):
    radii = np.asarray(radii, dtype=float)
    if radii.max() > MAX_RADIUS:
        raise ValueError(f"radius exceeds the cap {MAX_RADIUS}")
    return GrowthSeries(radii, orbit_counts(radii), "genus-2 Fuchsian orbit counts")


# ---------------------------------------------------------------------------
# analysis


def _fit(x, y):
    """Least-squares slope and RMS residual; shift-invariant so constant data give slope 0."""
    xc = x - x.mean()
    yc = y - y[0]
    yc = yc - yc.mean()
    denom = float(xc @ xc)
    slope = float(xc @ yc) / denom if denom > 0 else 0.0
    resid = yc - slope * xc
    return slope, float(math.sqrt(resid @ resid / len(x)))


def _upper_half(series, minimum=5):
    if len(series) < minimum:
        raise ValueError(f"need at least {minimum} entries, got {len(series)}")
    n = len(series)
    return series.radii[n // 2 :], np.log(series.counts[n // 2 :].astype(float))


def classify_growth(series):
    """Polynomial vs exponential by comparing log-log and log-linear fits over the upper half."""
    radii, logc = _upper_half(series)
    q = max(2, math.ceil(len(series) / 4))
    if np.all(series.counts[-q:] == series.counts[-1]):
        return GrowthClassification("bounded", 0.0, 0.0)
    degree, res_poly = _fit(np.log1p(radii), logc)
    rate, res_exp = _fit(radii, logc)
    if res_poly <= res_exp:
        return GrowthClassification("polynomial", max(degree, 0.0), res_poly)
    return GrowthClassification("exponential", rate, res_exp)


def entropy_estimate(series):
    """Slope of log(count) against radius over the upper half of the series."""
    radii, logc = _upper_half(series)
    return _fit(radii, logc)[0]


def submultiplicativity_violations(series, constant=1):
    """Pairs ``(m, n)`` with ``N(m + n) > constant * N(m) * N(n)`` among tabulated radii."""
    index = {float(r): int(c) for r, c in zip(series.radii, series.counts)}
    bad = []
    for (m, a), (n, b) in itertools.combinations_with_replacement(index.items(), 2):
        s = index.get(m + n)
        if s is not None and s > constant * a * b:
            bad.append((m, n))
    return bad
