"""Flat versus hyperbolic: word growth and geodesic counts side by side.

    python3 demos/growth_dichotomy.py
"""

import time

import numpy as np

from tieconv.growth import (
    SurfaceGroup,
    ball_growth_lattice,
    ball_growth_surface_group,
    classify_growth,
    entropy_estimate,
    flat_torus_series,
    hyperbolic_orbit_series,
    relator_residual,
)


def table(rows, header):
    print("  " + "  ".join(f"{h:>10}" for h in header))
    for row in rows:
        print("  " + "  ".join(f"{v:>10}" for v in row))


def main():
    print("Word balls in Z^2 (generators +-e1, +-e2):")
    z2 = ball_growth_lattice(2, 30)
    table([(m, int(z2.counts[m]), 2 * m * m + 2 * m + 1) for m in (0, 1, 2, 5, 10, 30)], ["m", "N(m)", "2m^2+2m+1"])
    print(f"  classified as {classify_growth(z2).as_record()}\n")

    g = SurfaceGroup(2)
    print(f"Genus-2 surface group, relator {g.format(g.relator)}.")
    t = time.perf_counter()
    sg = ball_growth_surface_group(2, 7)
    c = sg.counts
    table([(m, int(c[m]), f"{c[m] / c[m - 1]:.3f}" if m else "-") for m in range(8)], ["m", "N(m)", "ratio"])
    print(f"  ({time.perf_counter() - t:.1f}s) classified as {classify_growth(sg).as_record()}")
    w = g.parse("a1 b1 A1 B1 a2")
    print(f"  Dehn reduction: {g.format(w)} -> {g.format(g.dehn_reduce(w))}\n")

    print("Geodesics between two points of the unit flat 2-torus, offset (0.5, 0.25):")
    flat = flat_torus_series(2, 1.0, (0, 0), (0.5, 0.25), np.arange(1, 31))
    table([(int(r), int(n), f"{n / (np.pi * r * r):.3f}") for r, n in zip(flat.radii[4::5], flat.counts[4::5])], ["length", "count", "count/pi l^2"])
    print(f"  entropy estimate {entropy_estimate(flat):.4f} (tends to 0 as the range grows)\n")

    print(f"Orbit of the octagon centre under the genus-2 Fuchsian group (relator residual {relator_residual():.1e}):")
    hyp = hyperbolic_orbit_series(np.arange(0.5, 8.01, 0.5))
    table([(r, int(n)) for r, n in zip(hyp.radii[3::2], hyp.counts[3::2])], ["radius", "orbit pts"])
    print(f"  entropy estimate {entropy_estimate(hyp):.4f} (the area of a hyperbolic disc grows like e^r)")


if __name__ == "__main__":
    main()
