"""
The genus-2 surface group acting on the Poincare disk.

Isometries are kept in SU(1,1) as pairs ``(a, b)`` standing for the matrix
``[[a, b], [conj(b), conj(a)]]``, i.e. ``z -> (a z + b) / (conj(b) z + conj(a))``.
The image of the origin is ``b / conj(a)`` and its hyperbolic distance from the
origin is ``2 asinh |b|``, which stays accurate both near the identity and far
out where the disk coordinate crowds against the unit circle.

The fundamental domain is the regular octagon centred at the origin with all
interior angles ``pi / 4``. Its inradius is ``arccosh(1 + sqrt 2)`` and its
circumradius ``arccosh((1 + sqrt 2)^2)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

INRADIUS = math.acosh(1.0 + math.sqrt(2.0))
CIRCUMRADIUS = math.acosh((1.0 + math.sqrt(2.0)) ** 2)
# search slack: any orbit point within l is reached through words whose
# prefixes stay within l + circumradius, and 2 * inradius exceeds that radius
PRUNE_SLACK = 2.0 * INRADIUS
DEDUP_TOL = 1e-6
MAX_RADIUS = 12.0
# order in which the opposite-side pairings compose to the identity
OPPOSITE_RELATOR = (0, 3, 6, 1, 4, 7, 2, 5)


def _rotation(angle):
    return np.array([[np.exp(0.5j * angle), 0], [0, np.exp(-0.5j * angle)]])


def _boost(direction, length):
    # hyperbolic translation by ``length`` along the diameter at angle ``direction``
    c, s = math.cosh(length / 2), math.sinh(length / 2)
    return _rotation(direction) @ np.array([[c, s], [s, c]], dtype=complex) @ _rotation(-direction)


def side_pairing(i, j):
    """Isometry carrying side ``j`` of the octagon onto side ``i`` (outward across side ``i``)."""
    ai, aj = i * math.pi / 4, j * math.pi / 4
    return _boost(ai, 2.0 * INRADIUS) @ _rotation(ai + math.pi - aj)


def opposite_generators():
    """The 8 side pairings ``t_k``: side ``k + 4`` to side ``k``; ``t_{k+4}`` inverts ``t_k``."""
    return np.array([side_pairing(k, (k + 4) % 8) for k in range(8)])


def commutator_generators():
    """``a1, b1, a2, b2`` satisfying ``[a1, b1][a2, b2] = 1`` (adjacent-pattern side pairings)."""
    inv = np.linalg.inv
    return np.array([side_pairing(0, 2), inv(side_pairing(1, 3)), side_pairing(4, 6), inv(side_pairing(5, 7))])


def origin_image(m):
    m = np.asarray(m)
    return m[..., 0, 1] / m[..., 1, 1]


def distance_from_origin(m):
    return 2.0 * np.arcsinh(np.abs(np.asarray(m)[..., 0, 1]))


def disk_distance(z, w):
    """Hyperbolic distance between disk points, accurate for nearby points."""
    z, w = np.asarray(z), np.asarray(w)
    s = np.abs(z - w) / np.sqrt((1 - np.abs(z) ** 2) * (1 - np.abs(w) ** 2))
    return 2.0 * np.arcsinh(s)


def relator_residual(generators=None, order=OPPOSITE_RELATOR):
    """Hyperbolic displacement of the origin under the relator product."""
    gens = opposite_generators() if generators is None else generators
    m = np.eye(2, dtype=complex)
    for k in order:
        m = m @ gens[k]
    return float(distance_from_origin(m))


def validate_generators(tol=1e-6):
    """Check the side pairings: inverse pairs and the relator fixing the origin."""
    gens = opposite_generators()
    for k in range(4):
        prod = gens[k] @ gens[k + 4]
        if min(np.abs(prod - np.eye(2)).max(), np.abs(prod + np.eye(2)).max()) > tol:
            raise RuntimeError(f"side pairings {k} and {k + 4} are not inverse")
    res = relator_residual(gens)
    if res > tol:
        raise RuntimeError(f"relator moves the origin by {res:.3g}")
    return res


def _as_pairs(mats):
    return mats[:, 0, 0].copy(), mats[:, 0, 1].copy()


def orbit_points(radius, generators=None):
    """Distinct orbit points of the origin within hyperbolic ``radius``.

    Breadth-first over words in the generators; a word is dropped once its
    orbit point lies beyond ``radius + PRUNE_SLACK``. Points closer than 1e-6
    (hyperbolic) to an earlier point are duplicates. Returns disk coordinates
    and distances from the origin, in discovery order.
    """
    radius = float(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > MAX_RADIUS:
        raise ValueError(f"radius {radius} exceeds the cap {MAX_RADIUS}")
    gens = opposite_generators() if generators is None else np.asarray(generators)
    if generators is None:
        validate_generators()
    ga, gb = _as_pairs(gens)
    limit = radius + PRUNE_SLACK

    fa = np.array([1.0 + 0j])
    fb = np.array([0j])
    found_z = [np.array([0j])]
    found_d = [np.array([0.0])]
    all_z = np.array([0j])
    while len(fa):
        # every frontier element times every generator
        a = (fa[:, None] * ga[None, :] + fb[:, None] * np.conj(gb)[None, :]).ravel()
        b = (fa[:, None] * gb[None, :] + fb[:, None] * np.conj(ga)[None, :]).ravel()
        d = 2.0 * np.arcsinh(np.abs(b))
        keep = d <= limit
        a, b, d = a[keep], b[keep], d[keep]
        z = b / np.conj(a)
        fresh = _dedup(z, all_z)
        a, b, d, z = a[fresh], b[fresh], d[fresh], z[fresh]
        found_z.append(z)
        found_d.append(d)
        all_z = np.concatenate([all_z, z])
        fa, fb = a, b
    z = np.concatenate(found_z)
    d = np.concatenate(found_d)
    inside = d <= radius
    return z[inside], d[inside]


def _tol_radius(z):
    # Euclidean radius of a hyperbolic DEDUP_TOL ball around z, with margin
    return 2.0 * DEDUP_TOL * (1 - np.abs(z) ** 2)


def _dedup(cand, known):
    """Mask of candidates that are new: not near a known point nor an earlier candidate."""
    n = len(cand)
    if n == 0:
        return np.zeros(0, dtype=bool)
    pts = np.column_stack([cand.real, cand.imag])
    keep = np.ones(n, dtype=bool)
    r = _tol_radius(cand)
    ktree = cKDTree(np.column_stack([known.real, known.imag]))
    for i, hits in enumerate(ktree.query_ball_point(pts, r)):
        if hits and np.any(disk_distance(cand[i], known[hits]) < DEDUP_TOL):
            keep[i] = False
    ctree = cKDTree(pts)
    for i, hits in enumerate(ctree.query_ball_point(pts, r)):
        if not keep[i]:
            continue
        earlier = [j for j in hits if j < i and keep[j]]
        if earlier and np.any(disk_distance(cand[i], cand[earlier]) < DEDUP_TOL):
            keep[i] = False
    return keep


def orbit_count_hyperbolic(length):
    """Number of orbit points of the origin within hyperbolic distance ``length``."""
    _, d = orbit_points(length)
    return int(len(d))


def orbit_counts(radii):
    """Counts for several radii from a single enumeration at the largest one."""
    radii = np.asarray(radii, dtype=float)
    _, d = orbit_points(float(radii.max()))
    d = np.sort(d)
    return np.searchsorted(d, radii, side="right").astype(np.int64)
