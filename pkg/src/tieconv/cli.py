"""Command-line front end: ``tieconv <command> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data or validation
errors. Each command prints its result as one JSON line on stdout followed by a
run manifest line (or writes the manifest to ``--manifest``). Output files are
written to a temporary name and renamed into place only on success.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from tieconv import __version__
from tieconv.conv import convolve, dft, write_spectrum_csv
from tieconv.geometry import (
    FormatError,
    estimate_tangents,
    load_mesh,
    load_point_cloud,
    read_field_csv,
    write_field_csv,
)
from tieconv.growth import (
    ball_growth_lattice,
    ball_growth_surface_group,
    classify_growth,
    entropy_estimate,
    flat_torus_series,
    hyperbolic_orbit_series,
)
from tieconv.pipeline import TieConfig, resolve_reach, tie_convolve
from tieconv.reach import estimate_reach
from tieconv.torus import build_torus_grid, extend_field, read_tieg, write_tieg


class UsageError(Exception):
    def __init__(self, message, parser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}", self)


# ---------------------------------------------------------------------------
# helpers


def _atomic_write(*targets):
    """Write each ``(path, writer)`` pair via ``writer(tmp_path)``; rename only after all succeed."""
    staged = []
    try:
        for path, writer in targets:
            path = Path(path)
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
            os.close(fd)
            staged.append((tmp, path))
            writer(tmp)
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _dumps(obj):
    def fix(v):
        if isinstance(v, float) and not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        return v

    return json.dumps(fix(obj), default=_json_default, sort_keys=True)


def _load_samples(path, fmt, dim=None):
    path = Path(path)
    fmt = fmt or path.suffix.lower().lstrip(".")
    if fmt in ("off", "obj"):
        return load_mesh(path, fmt)
    if fmt not in ("xyz", "csv"):
        fmt = "xyz"
    return load_point_cloud(path, fmt, dim=dim)


def _with_frames(samples, args):
    """Attach tangent frames according to ``--tangents``."""
    mode = args.tangents
    md = args.manifold_dim
    hypersurface = md is None or md == samples.dim - 1
    if mode == "normals" or (mode == "auto" and samples.normals is not None and hypersurface):
        if samples.normals is None:
            raise ValueError("--tangents normals needs normals in the input file")
        return samples
    method = "pca" if mode == "pca" else "jet"
    return estimate_tangents(samples, k_neighbors=args.k, manifold_dim=md, method=method)


def _neighbor_cap(text):
    if text in ("auto", None):
        return "auto"
    if text == "all":
        return None
    return int(text)


def _add_sample_options(p):
    p.add_argument("--input", required=True, help="point cloud (xyz/csv) or mesh (off/obj)")
    p.add_argument("--format", choices=["xyz", "csv", "off", "obj"])
    p.add_argument("--k", type=int, default=12, help="neighbours for tangent estimation")
    p.add_argument("--manifold-dim", type=int, help="intrinsic dimension (default: ambient - 1)")
    p.add_argument(
        "--tangents",
        choices=["auto", "jet", "pca", "normals"],
        default="auto",
        help="frame source; auto uses file normals for hypersurfaces, else jet-refined PCA",
    )
    p.add_argument("--neighbor-cap", default="auto", help="reach pair-scan cap: auto, all or an integer")


def _config_from(args, kernel="delta"):
    return TieConfig(
        resolution=args.resolution,
        bump=args.bump,
        reach_override=args.reach,
        kernel=kernel,
        method=getattr(args, "method", "spectral"),
        normalize=getattr(args, "normalize", None),
        k_neighbors=args.k,
        manifold_dim=args.manifold_dim,
        neighbor_cap=_neighbor_cap(args.neighbor_cap),
    )


def _prepared(samples, args):
    # frames are only needed when the reach is estimated
    if args.reach is None and samples.tangents is None:
        return _with_frames(samples, args)
    return samples


# ---------------------------------------------------------------------------
# commands


def cmd_reach(args):
    samples = _with_frames(_load_samples(args.input, args.format), args)
    est = estimate_reach(samples, neighbor_cap=_neighbor_cap(args.neighbor_cap))
    return est.as_record(), [args.input]


def cmd_extend(args):
    samples = _load_samples(args.input, args.format)
    field = read_field_csv(args.field, len(samples))
    config = _config_from(args)
    samples = _prepared(samples, args)
    reach, _ = resolve_reach(samples, config)
    grid = build_torus_grid(samples, args.resolution, reach)
    out = extend_field(samples, field, grid, reach, args.bump)
    _atomic_write((args.out, lambda p: write_tieg(p, out)))
    record = {
        "reach_used": reach,
        "side": out.side,
        "resolution": list(out.resolution),
        "tube_cell_count": int(np.count_nonzero(out.values)),
        "out": args.out,
    }
    return record, [args.input, args.field]


def cmd_conv(args):
    f = read_tieg(args.f)
    k = read_tieg(args.k)
    out = convolve(f, k, args.method)
    _atomic_write((args.out, lambda p: write_tieg(p, out)))
    return {"resolution": list(out.resolution), "side": out.side, "method": args.method, "out": args.out}, [
        args.f,
        args.k,
    ]


def cmd_spectrum(args):
    grid = read_tieg(args.input)
    spec = dft(grid)
    _atomic_write((args.out, lambda p: write_spectrum_csv(p, spec)))
    return {"resolution": list(grid.resolution), "frequencies": grid.size, "out": args.out}, [args.input]


def cmd_pipeline(args):
    samples = _load_samples(args.input, args.format)
    field = read_field_csv(args.field, len(samples))
    inputs = [args.input, args.field]
    kernel = args.kernel
    if kernel.startswith("field:"):
        path = kernel.split(":", 1)[1]
        kernel = read_field_csv(path, len(samples))
        inputs.append(path)
    elif kernel.startswith("file:"):
        inputs.append(kernel.split(":", 1)[1])
    config = _config_from(args, kernel)
    result = tie_convolve(_prepared(samples, args), field, config)
    _atomic_write(
        (args.out_grid, lambda p: write_tieg(p, result.grid_out)),
        (args.out_field, lambda p: write_field_csv(p, result.restricted)),
    )
    diag = {k: v for k, v in result.diagnostics.items() if k != "per_point_reach"}
    record = {
        "reach_used": result.reach_used,
        "side_used": result.side_used,
        "resolution": list(result.grid_out.resolution),
        "diagnostics": diag,
        "out_grid": args.out_grid,
        "out_field": args.out_field,
    }
    return record, inputs


_GROWTH_DEFAULT_MAX = {"lattice": 30, "surface": 6, "flat-torus": 30, "hyperbolic": 8}
_GROWTH_DEFAULT_STEP = {"flat-torus": 1.0, "hyperbolic": 0.5}


def _growth_series(args):
    top = _GROWTH_DEFAULT_MAX[args.model] if args.max is None else args.max
    if args.model == "lattice":
        return ball_growth_lattice(args.d, _whole(top))
    if args.model == "surface":
        return ball_growth_surface_group(args.genus, _whole(top))
    step = args.step or _GROWTH_DEFAULT_STEP[args.model]
    if not step > 0:
        raise ValueError("--step must be positive")
    radii = np.arange(1, int(math.floor(top / step + 1e-9)) + 1) * step
    if len(radii) == 0:
        raise ValueError("--max is smaller than --step")
    if args.model == "hyperbolic":
        return hyperbolic_orbit_series(radii)
    offset = [float(x) for x in args.offset.split(",")]
    d = args.d
    if len(offset) == 1:
        offset = offset + [0.0] * (d - 1)
    if len(offset) != d:
        raise ValueError(f"--offset needs {d} components")
    return flat_torus_series(d, args.side, np.zeros(d), offset, radii)


def _whole(x):
    if not float(x).is_integer():
        raise ValueError("--max must be a whole number for word growth")
    return int(x)


def cmd_growth(args):
    series = _growth_series(args)

    def write(p):
        with open(p, "w") as fh:
            fh.write("radius,count\n")
            for r, c in series.rows():
                fh.write(f"{r},{c}\n")

    _atomic_write((args.out, write))
    record = {"model": args.model, "label": series.label, "entries": len(series), "out": args.out}
    record["last"] = {"radius": float(series.radii[-1]), "count": int(series.counts[-1])}
    if args.classify:
        record["classification"] = classify_growth(series).as_record()
    if args.entropy:
        record["entropy"] = entropy_estimate(series)
    return record, []


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = _Parser(prog="tieconv", description="Convolution of manifold functions through a flat torus.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--manifest", help="write the run manifest here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reach", help="estimate the reach of a sample set")
    _add_sample_options(p)
    p.set_defaults(func=cmd_reach)

    for name, func, help_ in (
        ("extend", cmd_extend, "extend a field onto the torus grid"),
        ("pipeline", cmd_pipeline, "full convolution through the torus"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_sample_options(p)
        p.add_argument("--field", required=True, help="field CSV (value or index,value rows)")
        p.add_argument("--resolution", type=int, default=64)
        p.add_argument("--reach", type=float, help="skip estimation and use this reach")
        p.add_argument("--bump", choices=["quintic", "mollifier"], default="quintic")
        p.set_defaults(func=func)
        if name == "extend":
            p.add_argument("--out", required=True)
        else:
            p.add_argument(
                "--kernel",
                required=True,
                help="delta | gaussian:S | box:R (S, R may end in 'rho') | file:GRID.tieg | field:CSV",
            )
            p.add_argument("--method", choices=["spectral", "direct"], default="spectral")
            p.add_argument("--normalize", choices=["tube_mass"])
            p.add_argument("--out-grid", required=True)
            p.add_argument("--out-field", required=True)

    p = sub.add_parser("conv", help="circular convolution of two grids")
    p.add_argument("--f", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--method", choices=["spectral", "direct"], default="spectral")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_conv)

    p = sub.add_parser("spectrum", help="unnormalised DFT of a grid as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("growth", help="growth series of groups and geodesic counts")
    p.add_argument("--model", required=True, choices=["lattice", "surface", "flat-torus", "hyperbolic"])
    p.add_argument("--d", type=int, default=2, help="lattice or flat-torus dimension")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--max", type=float, help="largest radius or word length")
    p.add_argument("--step", type=float, help="radius step for geodesic counts")
    p.add_argument("--side", type=float, default=1.0, help="flat-torus side")
    p.add_argument("--offset", default="0.5,0.25", help="flat-torus displacement y - x")
    p.add_argument("--classify", action="store_true")
    p.add_argument("--entropy", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_growth)
    return parser


def _params(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        exc.parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    start = time.perf_counter()
    try:
        record, inputs = args.func(args)
    except (FormatError, ValueError, OSError, RuntimeError) as exc:
        print(f"tieconv {args.command}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "command": args.command,
        "parameters": _params(args),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "version": __version__,
        "duration_s": time.perf_counter() - start,
    }
    print(_dumps(record))
    if args.manifest:
        try:
            _atomic_write((args.manifest, lambda p: Path(p).write_text(_dumps(manifest) + "\n")))
        except OSError as exc:
            print(f"tieconv: cannot write manifest: {exc}", file=sys.stderr)
            return 2
    else:
        print(_dumps({"manifest": manifest}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
