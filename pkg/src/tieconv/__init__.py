"""Convolution of functions on embedded manifolds through a flat torus, plus growth experiments."""

__version__ = "0.1.0"

from tieconv.conv import (
    SpectralGrid,
    convolve,
    convolve_direct,
    convolve_spectral,
    dft,
    dft_direct,
    idft,
    idft_complex,
    modulation_check,
    norms,
    translate,
)
from tieconv.geometry import (
    EmbeddedSamples,
    FormatError,
    ScalarField,
    diameter,
    estimate_tangents,
    load_mesh,
    load_point_cloud,
    read_field_csv,
    sample_circle,
    sample_sphere,
    sample_surface,
    sample_torus,
    write_field_csv,
    write_point_cloud,
)
from tieconv.pipeline import TieConfig, TieResult, restrict, tie_convolve
from tieconv.reach import ReachEstimate, analytic_reach, estimate_reach
from tieconv.torus import (
    BumpProfile,
    GridResolutionError,
    KernelSpec,
    TorusGrid,
    build_torus_grid,
    bump,
    extend_field,
    make_kernel,
    read_tieg,
    write_tieg,
)

__all__ = [
    "BumpProfile",
    "EmbeddedSamples",
    "FormatError",
    "GridResolutionError",
    "KernelSpec",
    "ReachEstimate",
    "ScalarField",
    "SpectralGrid",
    "TieConfig",
    "TieResult",
    "TorusGrid",
    "analytic_reach",
    "build_torus_grid",
    "bump",
    "convolve",
    "convolve_direct",
    "convolve_spectral",
    "dft",
    "dft_direct",
    "diameter",
    "estimate_reach",
    "estimate_tangents",
    "extend_field",
    "idft",
    "idft_complex",
    "load_mesh",
    "load_point_cloud",
    "make_kernel",
    "modulation_check",
    "norms",
    "read_field_csv",
    "read_tieg",
    "restrict",
    "sample_circle",
    "sample_sphere",
    "sample_surface",
    "sample_torus",
    "tie_convolve",
    "translate",
    "write_field_csv",
    "write_point_cloud",
    "write_tieg",
]
