"""
Embedded manifold samples: containers, file loaders, samplers and basic metrics.

A sample set is a finite cloud of points of a manifold ``M`` already embedded in
``R^d``, optionally carrying unit normals (hypersurfaces), orthonormal tangent
frames, and triangle faces (meshes).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from tieconv._parallel import workers

UNIT_TOL = 1e-9


class FormatError(ValueError):
    """Raised when an input file cannot be parsed; carries the offending line."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


def _frozen(a, dtype=float):
    if a is None:
        return None
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmbeddedSamples:
    """Finite sample of a manifold embedded in ``R^dim``.

    Attributes:
        points: ``(n, dim)`` coordinates.
        normals: optional ``(n, dim)`` unit normals (hypersurfaces only).
        tangents: optional ``(n, k, dim)`` orthonormal tangent frames of a
            ``k``-manifold.
        faces: optional ``(m, 3)`` vertex indices of triangles.
        degenerate: optional boolean mask of points whose neighbourhood was too
            flat to estimate a frame; such points are skipped by reach estimation.
    """

    points: np.ndarray
    normals: np.ndarray | None = None
    tangents: np.ndarray | None = None
    faces: np.ndarray | None = None
    degenerate: np.ndarray | None = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (n, d) array with d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        n, d = pts.shape

        if self.normals is not None:
            nrm = _frozen(self.normals)
            if nrm.shape != (n, d):
                raise ValueError(f"normals must have shape {(n, d)}, got {nrm.shape}")
            if not np.all(np.isfinite(nrm)):
                raise ValueError("normals must be finite")
            if np.any(np.abs(np.linalg.norm(nrm, axis=1) - 1.0) > UNIT_TOL):
                raise ValueError("normals must have unit length")
            object.__setattr__(self, "normals", nrm)

        if self.tangents is not None:
            tan = _frozen(self.tangents)
            if tan.ndim != 3 or tan.shape[0] != n or tan.shape[2] != d:
                raise ValueError(f"tangents must have shape (n, k, {d})")
            if not np.all(np.isfinite(tan)):
                raise ValueError("tangents must be finite")
            object.__setattr__(self, "tangents", tan)

        if self.faces is not None:
            fc = _frozen(self.faces, dtype=np.int64).reshape(-1, 3)
            if fc.size and (fc.min() < 0 or fc.max() >= n):
                raise ValueError("face index out of range")
            if np.any((fc[:, 0] == fc[:, 1]) | (fc[:, 1] == fc[:, 2]) | (fc[:, 0] == fc[:, 2])):
                raise ValueError("faces must have three distinct vertices")
            object.__setattr__(self, "faces", fc)

        if self.degenerate is not None:
            deg = _frozen(self.degenerate, dtype=bool)
            if deg.shape != (n,):
                raise ValueError("degenerate mask must have one entry per point")
            object.__setattr__(self, "degenerate", deg)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def with_(self, **changes):
        return replace(self, **changes)

    def translated(self, shift):
        return replace(self, points=self.points + np.asarray(shift, dtype=float))

    def scaled(self, factor):
        return replace(self, points=self.points * float(factor))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real value per sample point."""

    values: np.ndarray = field()

    def __post_init__(self):
        vals = _frozen(self.values).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]


def as_field(values, samples=None):
    """Coerce ``values`` to a :class:`ScalarField`, checking the length against ``samples``."""
    fld = values if isinstance(values, ScalarField) else ScalarField(values)
    if samples is not None and len(fld) != len(samples):
        raise ValueError(f"field has {len(fld)} values but there are {len(samples)} samples")
    return fld


# ---------------------------------------------------------------------------
# loaders


def load_point_cloud(path, format=None, dim=None, min_points=2):
    """Read an XYZ (whitespace) or CSV (comma) point file.

    Each line holds ``d`` coordinates, optionally followed by ``d`` normal
    components. Blank lines and ``#`` comments are skipped.

    Without ``dim`` every line must have the same column count. An even count
    ``2d >= 4`` whose trailing half is unit length on every line is read as
    points plus normals; otherwise the column count is the dimension. With
    ``dim`` given, lines may have ``dim`` or ``2*dim`` columns and normals are
    kept only if every line carries them.

    Files with fewer than ``min_points`` points are rejected.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "xyz"
    if format not in ("xyz", "csv"):
        raise ValueError(f"unknown point format {format!r}")
    sep = "," if format == "csv" else None

    rows = []
    linenos = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(str(exc), path) from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in (line.split(sep) if sep else line.split())]
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"cannot parse {raw.strip()!r} as numbers", path, lineno) from None
        if not all(np.isfinite(vals)):
            raise FormatError("non-finite coordinate", path, lineno)
        rows.append(vals)
        linenos.append(lineno)

    if len(rows) < max(min_points, 1):
        raise FormatError(f"need at least {max(min_points, 1)} points, found {len(rows)}", path)

    counts = {len(r) for r in rows}
    if dim is None:
        if len(counts) != 1:
            first = len(rows[0])
            bad = next(i for i, r in enumerate(rows) if len(r) != first)
            raise FormatError(
                f"inconsistent column count: expected {first}, got {len(rows[bad])}",
                path,
                linenos[bad],
            )
        ncol = counts.pop()
        data = np.array(rows)
        if ncol >= 4 and ncol % 2 == 0:
            half = ncol // 2
            norms = np.linalg.norm(data[:, half:], axis=1)
            if np.all(np.abs(norms - 1.0) <= 1e-6):
                nrm = data[:, half:] / norms[:, None]
                return EmbeddedSamples(points=data[:, :half], normals=nrm)
        return EmbeddedSamples(points=data)

    for i, r in enumerate(rows):
        if len(r) not in (dim, 2 * dim):
            raise FormatError(
                f"expected {dim} or {2 * dim} columns, got {len(r)}", path, linenos[i]
            )
    pts = np.array([r[:dim] for r in rows])
    if all(len(r) == 2 * dim for r in rows):
        nrm = np.array([r[dim:] for r in rows])
        norms = np.linalg.norm(nrm, axis=1)
        if np.any(norms == 0):
            bad = int(np.flatnonzero(norms == 0)[0])
            raise FormatError("zero-length normal", path, linenos[bad])
        return EmbeddedSamples(points=pts, normals=nrm / norms[:, None])
    return EmbeddedSamples(points=pts)


def write_point_cloud(path, samples, with_normals=None):
    """Write points (and normals, if present or requested) in XYZ or CSV form by suffix."""
    path = Path(path)
    sep = "," if path.suffix.lower() == ".csv" else " "
    if with_normals is None:
        with_normals = samples.normals is not None
    data = samples.points
    if with_normals:
        data = np.hstack([data, samples.normals])
    with open(path, "w") as fh:
        for row in data:
            fh.write(sep.join(repr(float(v)) for v in row) + "\n")


def read_field_csv(path, n=None):
    """Read a field file: one value per line, or ``index,value`` rows with an optional header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(str(exc), path) from exc
    vals = {}
    order = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            if not vals and not order:
                continue  # header
            raise FormatError(f"cannot parse {raw.strip()!r}", path, lineno) from None
        if len(nums) == 1:
            order.append(nums[0])
        elif len(nums) == 2:
            i = nums[0]
            if not i.is_integer() or i < 0:
                raise FormatError(f"bad index {parts[0]!r}", path, lineno)
            if int(i) in vals:
                raise FormatError(f"duplicate index {int(i)}", path, lineno)
            vals[int(i)] = nums[1]
        else:
            raise FormatError(f"expected 1 or 2 columns, got {len(nums)}", path, lineno)
    if vals and order:
        raise FormatError("mixed single-column and index,value rows", path)
    if vals:
        if sorted(vals) != list(range(len(vals))):
            raise FormatError("indices must cover 0..n-1 exactly once", path)
        order = [vals[i] for i in range(len(vals))]
    if n is not None and len(order) != n:
        raise FormatError(f"field has {len(order)} values, expected {n}", path)
    try:
        return ScalarField(order)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def write_field_csv(path, field):
    fld = as_field(field)
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(fld.values):
            fh.write(f"{i},{float(v)!r}\n")


def _fan(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _parse_off(path, lines):
    it = iter(lines)
    try:
        lineno, head = next(it)
    except StopIteration:
        raise FormatError("empty file", path) from None
    head = head.strip()
    if not head.startswith("OFF"):
        raise FormatError(f"malformed header {head!r}, expected 'OFF'", path, lineno)
    rest = head[3:].split()
    if not rest:
        try:
            lineno, counts_line = next(it)
        except StopIteration:
            raise FormatError("missing vertex/face counts", path) from None
        rest = counts_line.split()
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError):
        raise FormatError("malformed vertex/face counts", path, lineno) from None

    verts = []
    for _ in range(nv):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError(f"expected {nv} vertices, file ended early", path) from None
        parts = line.split()
        try:
            verts.append([float(x) for x in parts[:3]])
        except ValueError:
            raise FormatError(f"bad vertex {line.strip()!r}", path, lineno) from None
        if len(parts) < 3:
            raise FormatError("vertex needs 3 coordinates", path, lineno)

    faces = []
    for _ in range(nf):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError(f"expected {nf} faces, file ended early", path) from None
        try:
            parts = [int(x) for x in line.split()]
        except ValueError:
            raise FormatError(f"bad face {line.strip()!r}", path, lineno) from None
        if not parts or len(parts) < parts[0] + 1 or parts[0] < 3:
            raise FormatError(f"bad face {line.strip()!r}", path, lineno)
        poly = parts[1 : parts[0] + 1]
        for idx in poly:
            if idx < 0 or idx >= nv:
                raise FormatError(f"face index {idx} out of range (0..{nv - 1})", path, lineno)
        faces.extend((lineno, tri) for tri in _fan(poly))
    return verts, faces


def _parse_obj(path, lines):
    verts = []
    faces = []
    for lineno, line in lines:
        parts = line.split()
        if parts[0] == "v":
            try:
                verts.append([float(x) for x in parts[1:4]])
            except ValueError:
                raise FormatError(f"bad vertex {line.strip()!r}", path, lineno) from None
            if len(parts) < 4:
                raise FormatError("vertex needs 3 coordinates", path, lineno)
        elif parts[0] == "f":
            poly = []
            for tok in parts[1:]:
                try:
                    idx = int(tok.split("/")[0])
                except ValueError:
                    raise FormatError(f"bad face index {tok!r}", path, lineno) from None
                idx = idx - 1 if idx > 0 else len(verts) + idx
                poly.append(idx)
            if len(poly) < 3:
                raise FormatError("face needs at least 3 vertices", path, lineno)
            faces.append((lineno, poly))
        # other records (vn, vt, o, g, s, usemtl, ...) are ignored
    nv = len(verts)
    tris = []
    for lineno, poly in faces:
        for idx in poly:
            if idx < 0 or idx >= nv:
                raise FormatError(f"face index out of range (have {nv} vertices)", path, lineno)
        tris.extend((lineno, tri) for tri in _fan(poly))
    return verts, tris


def load_mesh(path, format=None):
    """Read an ASCII OFF or OBJ (``v``/``f`` records) triangle mesh.

    Polygons are fan-triangulated. Zero-area triangles are dropped with a
    warning. Vertex normals are area-weighted averages of incident face normals.
    """
    path = Path(path)
    if format is None:
        format = path.suffix.lower().lstrip(".")
    if format not in ("off", "obj"):
        raise ValueError(f"unknown mesh format {format!r}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(str(exc), path) from exc
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))

    verts, tris = (_parse_off if format == "off" else _parse_obj)(path, lines)
    if len(verts) < 3:
        raise FormatError("mesh needs at least 3 vertices", path)
    pts = np.array(verts, dtype=float)
    if not np.all(np.isfinite(pts)):
        raise FormatError("non-finite vertex coordinate", path)

    kept = []
    for lineno, tri in tris:
        a, b, c = pts[list(tri)]
        if len(set(tri)) < 3 or np.linalg.norm(np.cross(b - a, c - a)) == 0.0:
            warnings.warn(f"{path}:{lineno}: skipping zero-area face {tri}", stacklevel=2)
            continue
        kept.append(tri)
    if not kept:
        raise FormatError("mesh has no non-degenerate faces", path)
    faces = np.array(kept, dtype=np.int64)
    return EmbeddedSamples(points=pts, faces=faces, normals=vertex_normals(pts, faces))


def vertex_normals(points, faces):
    """Area-weighted vertex normals, or ``None`` if some vertex has no incident face."""
    a, b, c = (points[faces[:, i]] for i in range(3))
    cr = np.cross(b - a, c - a)  # length = 2 * area
    acc = np.zeros_like(points)
    for i in range(3):
        np.add.at(acc, faces[:, i], cr)
    norms = np.linalg.norm(acc, axis=1)
    if np.any(norms == 0):
        return None
    return acc / norms[:, None]


def face_areas(mesh):
    a, b, c = (mesh.points[mesh.faces[:, i]] for i in range(3))
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def sample_surface(mesh, n, seed=0):
    """Draw ``n`` area-uniform points from a triangle mesh.

    Faces are chosen with probability proportional to area and points are
    barycentric-uniform inside each face; each point carries its face normal.
    """
    if mesh.faces is None or len(mesh.faces) == 0:
        raise ValueError("mesh has no faces")
    if n < 1:
        raise ValueError("n must be positive")
    areas = face_areas(mesh)
    total = areas.sum()
    if not total > 0:
        raise ValueError("all faces are degenerate")
    rng = np.random.default_rng(seed)
    fidx = rng.choice(len(areas), size=n, p=areas / total)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    w = np.stack([1.0 - r1, r1 * (1.0 - r2), r1 * r2], axis=1)
    tri = mesh.points[mesh.faces[fidx]]  # (n, 3, 3)
    pts = np.einsum("nk,nkd->nd", w, tri)
    nrm = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    return EmbeddedSamples(points=pts, normals=nrm)


# ---------------------------------------------------------------------------
# analytic samplers (each returns exact normals and tangent frames)


def sample_circle(n, radius=1.0, center=(0.0, 0.0)):
    """``n`` equispaced points on a circle, starting at angle 0."""
    t = 2.0 * np.pi * np.arange(n) / n
    c, s = np.cos(t), np.sin(t)
    pts = np.asarray(center, dtype=float) + radius * np.stack([c, s], axis=1)
    tangent = np.stack([-s, c], axis=1)[:, None, :]
    return EmbeddedSamples(points=pts, normals=np.stack([c, s], axis=1), tangents=tangent)


def _complete_frame(normals):
    # two tangent vectors orthogonal to each unit normal in R^3
    ref = np.where(np.abs(normals[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = np.cross(normals, ref)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(normals, e1)
    return np.stack([e1, e2], axis=1)


def sample_sphere(n, radius=1.0):
    """Fibonacci (quasi-uniform) points on a round 2-sphere in ``R^3``."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + 5.0**0.5) * i
    nrm = np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)
    return EmbeddedSamples(points=radius * nrm, normals=nrm, tangents=_complete_frame(nrm))


def sample_torus(major, minor, n_major, n_minor):
    """Grid of ``n_major * n_minor`` points on a torus of revolution about the z axis."""
    u = 2.0 * np.pi * np.arange(n_major) / n_major
    v = 2.0 * np.pi * np.arange(n_minor) / n_minor
    u, v = (a.ravel() for a in np.meshgrid(u, v, indexing="ij"))
    cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
    ring = major + minor * cv
    pts = np.stack([ring * cu, ring * su, minor * sv], axis=1)
    nrm = np.stack([cv * cu, cv * su, sv], axis=1)
    tu = np.stack([-su, cu, np.zeros_like(u)], axis=1)
    tv = np.stack([-sv * cu, -sv * su, cv], axis=1)
    return EmbeddedSamples(points=pts, normals=nrm, tangents=np.stack([tu, tv], axis=1))


# ---------------------------------------------------------------------------
# metrics


def diameter(samples, chunk=1024):
    """Largest pairwise Euclidean distance (exact scan over all pairs)."""
    pts = samples.points if isinstance(samples, EmbeddedSamples) else np.asarray(samples, float)
    n = len(pts)
    if n < 2:
        raise ValueError("diameter needs at least 2 points")
    best = 0.0
    for s in range(0, n, chunk):
        diff = pts[s : s + chunk, None, :] - pts[None, :, :]
        best = max(best, float((diff * diff).sum(axis=-1).max()))
    return float(np.sqrt(best))


def knn(points, k, query=None):
    """Indices and distances of the ``k`` nearest points, ties broken by lower index.

    When ``query`` is omitted the points query themselves and the point itself is
    excluded from its own neighbour list.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    self_query = query is None
    q = points if self_query else np.atleast_2d(np.asarray(query, dtype=float))
    extra = 1 if self_query else 0
    want = min(n, k + extra + 4)
    dist, idx = cKDTree(points).query(q, k=want, workers=workers())
    dist = np.reshape(dist, (len(q), -1))
    idx = np.reshape(idx, (len(q), -1))
    if self_query:
        # push self to the end so it is dropped
        is_self = idx == np.arange(len(q))[:, None]
        dist = np.where(is_self, np.inf, dist)
    order = np.lexsort((idx, dist), axis=1)
    idx = np.take_along_axis(idx, order, axis=1)[:, :k]
    dist = np.take_along_axis(dist, order, axis=1)[:, :k]
    return idx, dist


def _jet_refine(nb_disp, frames, manifold_dim):
    # Fit each normal coordinate as a quadratic in the tangent coordinates
    # (through the base point) and tilt the frame by the fitted gradient.
    n, k, d = nb_disp.shape
    m = manifold_dim
    tan = frames[:, :m, :]
    nor = frames[:, m:, :]
    a = np.einsum("nkd,nmd->nkm", nb_disp, tan)
    h = np.einsum("nkd,ncd->nkc", nb_disp, nor)
    iu = np.triu_indices(m)
    quad = (a[:, :, :, None] * a[:, :, None, :])[:, :, iu[0], iu[1]]
    design = np.concatenate([a, quad], axis=2)
    out = np.empty_like(tan)
    for i in range(n):
        coef, *_ = np.linalg.lstsq(design[i], h[i], rcond=None)
        grad = coef[:m]  # (m, codim): d h_c / d a_j
        tilted = tan[i] + grad @ nor[i]
        q, _ = np.linalg.qr(tilted.T)
        # keep the orientation of the PCA frame
        signs = np.sign(np.einsum("dm,md->m", q, tan[i]))
        signs[signs == 0] = 1.0
        out[i] = (q * signs).T
    return out


def estimate_tangents(samples, k_neighbors=12, manifold_dim=None, method="pca", rel_tol=1e-10):
    """Per-point tangent frames by local principal component analysis.

    The frame at each point is spanned by the top ``manifold_dim`` principal
    directions of the centred cloud formed by the point and its ``k_neighbors``
    nearest neighbours. For hypersurfaces the last principal direction is also
    returned as the unit normal, sign-aligned with any existing normal.

    ``method="jet"`` additionally fits a quadratic height function over the PCA
    frame and tilts the frame by its gradient at the base point, which removes
    the first-order bias of PCA on curved, asymmetric neighbourhoods.

    Points whose ``manifold_dim``-th principal variance is below ``rel_tol``
    times the largest are flagged in ``degenerate``.
    """
    d = samples.dim
    if manifold_dim is None:
        manifold_dim = d - 1
    if not 1 <= manifold_dim <= d:
        raise ValueError(f"manifold_dim must be in 1..{d}")
    if k_neighbors < manifold_dim + 1:
        raise ValueError("k_neighbors must be at least manifold_dim + 1")
    n = len(samples)
    if n <= k_neighbors:
        raise ValueError(f"need more than {k_neighbors} points, have {n}")
    if method not in ("pca", "jet"):
        raise ValueError(f"unknown method {method!r}")

    pts = samples.points
    idx, _ = knn(pts, k_neighbors)
    cloud = np.concatenate([pts[:, None, :], pts[idx]], axis=1)
    centred = cloud - cloud.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centred, centred) / cloud.shape[1]
    evals, evecs = np.linalg.eigh(cov)  # ascending
    evals = evals[:, ::-1]
    frames = np.transpose(evecs[:, :, ::-1], (0, 2, 1))  # rows = principal directions

    # deterministic orientation: largest-magnitude component positive
    big = np.argmax(np.abs(frames), axis=2)
    sgn = np.sign(np.take_along_axis(frames, big[:, :, None], axis=2))
    frames = frames * sgn

    top = evals[:, 0]
    degenerate = (top <= 0) | (evals[:, manifold_dim - 1] <= rel_tol * np.maximum(top, 1e-300))

    if method == "jet" and manifold_dim < d:
        disp = pts[idx] - pts[:, None, :]
        ok = ~degenerate
        tan = frames[:, :manifold_dim, :].copy()
        if ok.any():
            tan[ok] = _jet_refine(disp[ok], frames[ok], manifold_dim)
    else:
        tan = frames[:, :manifold_dim, :].copy()

    normals = samples.normals
    if manifold_dim == d - 1:
        # unit normal = orthogonal complement of the tangent frame
        full = np.concatenate([tan, frames[:, -1:, :]], axis=1)
        q, _ = np.linalg.qr(np.transpose(full, (0, 2, 1)))
        nrm = q[:, :, -1]
        nrm = nrm * np.where(np.einsum("nd,nd->n", nrm, frames[:, -1, :]) < 0, -1.0, 1.0)[:, None]
        if samples.normals is not None:
            flip = np.einsum("nd,nd->n", nrm, samples.normals) < 0
            nrm = np.where(flip[:, None], -nrm, nrm)
        nrm = nrm / np.linalg.norm(nrm, axis=1)[:, None]
        normals = nrm

    tan[degenerate] = 0.0
    return replace(samples, tangents=tan, normals=normals, degenerate=degenerate)
