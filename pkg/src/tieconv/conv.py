"""
Convolution and Fourier analysis on the discrete torus ``Z_N1 x ... x Z_Nd``.

Conventions:
    convolution     (f * k)(x) = sum_y f(y) k(x - y)          (plain sum)
    forward DFT     F(xi) = sum_x f(x) exp(-2 pi i xi.x / N)   (unnormalised)
    inverse DFT     f(x) = 1/|G| sum_xi F(xi) exp(+2 pi i xi.x / N)

With this pairing ``dft(f * k) = dft(f) * dft(k)`` holds with no extra factors.
Statements about the Haar probability measure use the ``*_mean`` quantities
of :func:`norms`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tieconv.torus import TorusGrid


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Fourier coefficients indexed by frequency tuples modulo the resolution."""

    coefficients: np.ndarray
    side: float = 1.0
    origin: np.ndarray | None = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex, copy=True)
        if not np.all(np.isfinite(c)):
            raise ValueError("spectral coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def dim(self):
        return self.coefficients.ndim

    @property
    def resolution(self):
        return self.coefficients.shape


def _check_same(f, k):
    if f.resolution != k.resolution:
        raise ValueError(f"shape mismatch: {f.resolution} vs {k.resolution}")
    if f.side != k.side:
        raise ValueError(f"side mismatch: {f.side} vs {k.side}")


def _phase_table(shape, sign):
    # exp(sign * 2 pi i * m / N) for m in 0..N-1, one table per axis
    return [np.exp(sign * 2j * np.pi * np.arange(n) / n) for n in shape]


def dft_direct(values, inverse=False, chunk=256):
    """Reference transform by explicit summation over all (frequency, position) pairs.

    Costs ``O(|G|^2)``; exponents are reduced modulo ``N`` per axis before
    evaluation so large products do not lose phase accuracy.
    """
    a = np.asarray(values, dtype=complex)
    shape = a.shape
    total = a.size
    idx = np.indices(shape).reshape(a.ndim, -1)  # (d, |G|)
    flat = a.reshape(-1)
    sign = 1.0 if inverse else -1.0
    tables = _phase_table(shape, sign)
    out = np.empty(total, dtype=complex)
    for s in range(0, total, chunk):
        xi = idx[:, s : s + chunk]
        kern = np.ones((xi.shape[1], total), dtype=complex)
        for ax, n in enumerate(shape):
            m = np.mod(np.multiply.outer(xi[ax], idx[ax]), n)
            kern *= tables[ax][m]
        out[s : s + chunk] = kern @ flat
    if inverse:
        out /= total
    return out.reshape(shape)


def dft(grid, method="fast"):
    """Unnormalised forward transform of a grid."""
    if method == "fast":
        coeffs = np.fft.fftn(grid.values)
    elif method == "direct":
        coeffs = dft_direct(grid.values)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectralGrid(coeffs, grid.side, grid.origin)


def idft(spec, method="fast"):
    """Inverse transform; returns the real part as a grid.

    Use :func:`idft_complex` when the spectrum is not Hermitian.
    """
    vals = idft_complex(spec, method)
    return TorusGrid(vals.real, spec.side, spec.origin)


def idft_complex(spec, method="fast"):
    coeffs = spec.coefficients if isinstance(spec, SpectralGrid) else np.asarray(spec, complex)
    if method == "fast":
        return np.fft.ifftn(coeffs)
    if method == "direct":
        return dft_direct(coeffs, inverse=True)
    raise ValueError(f"unknown method {method!r}")


def convolve_direct(f, k):
    """Circular convolution by explicit summation over the support of the sparser factor."""
    _check_same(f, k)
    a, b = f.values, k.values
    # commutativity lets us loop over whichever input has fewer nonzeros
    if np.count_nonzero(b) < np.count_nonzero(a):
        a, b = b, a
    out = np.zeros(a.shape)
    axes = tuple(range(a.ndim))
    for y in zip(*np.nonzero(a)):
        out += a[y] * np.roll(b, y, axis=axes)
    return f.with_values(out)


def convolve_spectral(f, k):
    """Circular convolution through the convolution theorem (fast transforms)."""
    _check_same(f, k)
    prod = np.fft.fftn(f.values) * np.fft.fftn(k.values)
    return f.with_values(np.fft.ifftn(prod).real)


def convolve(f, k, method="spectral"):
    if method == "spectral":
        return convolve_spectral(f, k)
    if method == "direct":
        return convolve_direct(f, k)
    raise ValueError(f"unknown method {method!r}")


def translate(grid, shift):
    """``out(y) = in(y - shift)`` with indices taken modulo the resolution."""
    shift = tuple(int(s) for s in np.atleast_1d(shift))
    if len(shift) != grid.dim:
        raise ValueError(f"shift has {len(shift)} components, grid has {grid.dim} axes")
    return grid.with_values(np.roll(grid.values, shift, axis=tuple(range(grid.dim))))


def modulation_phase(shape, shift):
    """``exp(-2 pi i xi.v / N)`` on the full frequency grid."""
    phase = np.ones(shape, dtype=complex)
    for ax, (n, v) in enumerate(zip(shape, shift)):
        m = np.mod(np.arange(n) * int(v), n)
        p = np.exp(-2j * np.pi * m / n)
        sh = [1] * len(shape)
        sh[ax] = n
        phase = phase * p.reshape(sh)
    return phase


def modulation_check(grid, shift, method="fast"):
    """Largest deviation from the translation-modulation identity of the DFT."""
    shift = tuple(int(s) for s in np.atleast_1d(shift))
    lhs = dft(translate(grid, shift), method).coefficients
    rhs = modulation_phase(grid.resolution, shift) * dft(grid, method).coefficients
    return float(np.max(np.abs(lhs - rhs)))


def norms(grid):
    """Mean-normalised L1 and L2 norms (Haar probability measure) and the sup norm."""
    v = grid.values
    n = v.size
    return {
        "l1_mean": float(np.abs(v).sum() / n),
        "l2_mean": float(np.sqrt((v * v).sum() / n)),
        "linf": float(np.abs(v).max()),
    }


def write_spectrum_csv(path, spec):
    """One row per frequency: index tuple, real part, imaginary part."""
    c = spec.coefficients
    idx = np.indices(c.shape).reshape(c.ndim, -1).T
    cols = ",".join(f"xi{k}" for k in range(c.ndim))
    with open(path, "w") as fh:
        fh.write(f"{cols},real,imag\n")
        for row, z in zip(idx, c.reshape(-1)):
            fh.write(",".join(str(int(i)) for i in row) + f",{float(z.real)!r},{float(z.imag)!r}\n")
