import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tieconv.geometry import EmbeddedSamples, FormatError, sample_circle
from tieconv.torus import (
    BumpProfile,
    GridResolutionError,
    KernelSpec,
    TorusGrid,
    build_torus_grid,
    bump,
    bump_deficit_bound,
    check_resolution,
    extend_field,
    make_kernel,
    nearest_periodic,
    parse_kernel,
    read_tieg,
    write_grid_csv,
    write_pgm_slice,
    write_tieg,
)


def _periodic_dist_oracle(cells, samples, side):
    """Minimal-image distance from each cell to each sample, by explicit loops."""
    out = np.empty((len(cells), len(samples)))
    for i, c in enumerate(cells):
        for j, s in enumerate(samples):
            diff = np.abs(c - s) % side
            diff = np.minimum(diff, side - diff)
            out[i, j] = math.sqrt(float(diff @ diff))
    return out


# -- grid type ---------------------------------------------------------------


def test_grid_validates():
    with pytest.raises(ValueError, match="finite"):
        TorusGrid([np.nan, 0.0], 1.0)
    with pytest.raises(ValueError, match="side"):
        TorusGrid([0.0], 0.0)
    with pytest.raises(ValueError, match="origin"):
        TorusGrid(np.zeros((2, 2)), 1.0, [0.0])


def test_to_torus_wraps_into_box():
    g = TorusGrid(np.zeros((4, 4)), 2.0, [-1.0, -1.0])
    np.testing.assert_allclose(g.to_torus([[1.0, -1.0], [1.5, 3.0]]), [[0.0, 0.0], [0.5, 0.0]])


# -- boxing --------------------------------------------------------------------


def test_circle_box():
    g = build_torus_grid(sample_circle(100), 64, 1.0)
    assert g.side == 4.0 and g.spacing[0] == 0.0625
    assert g.resolution == (64, 64) and not g.values.any()


def test_bbox_centred():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.5]])
    g = build_torus_grid(EmbeddedSamples(points=pts), 64, 0.2)
    lo, hi = g.origin, g.origin + g.side
    np.testing.assert_allclose(pts.min(0) - lo, hi - pts.max(0))


def test_tube_safety_branch_and_no_self_overlap():
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    s = EmbeddedSamples(points=pts)
    rho = 2.0
    g = build_torus_grid(s, 32, rho)
    assert g.side == 5.0
    # every cell within rho/2 of a sample sees that sample through one image only
    t = g.to_torus(pts)
    cells = g.cell_positions()
    for j in range(len(pts)):
        count = np.zeros(len(cells), dtype=int)
        for shift in itertools.product((-1, 0, 1), repeat=2):
            d = np.linalg.norm(cells - (t[j] + g.side * np.array(shift)), axis=1)
            count += d <= rho / 2
        assert count.max() <= 1


def test_coarse_grid_rejected_with_minimum():
    with pytest.raises(GridResolutionError, match="cannot resolve") as info:
        check_resolution(3, 4, 4.0, 0.1)
    need = info.value.min_resolution
    assert math.sqrt(3) * 4.0 / need <= 0.05 < math.sqrt(3) * 4.0 / (need - 1)
    check_resolution(3, need, 4.0, 0.1)


def test_box_preconditions():
    with pytest.raises(ValueError, match="at least 4"):
        check_resolution(2, 3, 1.0, 1.0)
    with pytest.raises(ValueError, match="positive"):
        check_resolution(2, 8, 1.0, 0.0)


# -- bump profiles ---------------------------------------------------------------


def test_quintic_values():
    b = BumpProfile("quintic", 0.5)
    assert bump(b, 0.0) == 1.0
    assert bump(b, 0.5) == 0.0
    assert bump(b, 0.25) == 0.5
    assert bump(b, 7.0) == 0.0


def test_mollifier_values():
    b = BumpProfile("mollifier", 1.0)
    assert bump(b, 0.0) == 1.0
    assert bump(b, 1.0) == 0.0
    assert bump(b, 0.5) == pytest.approx(math.exp(1 - 1 / 0.75))


def test_bump_rejects_negative_and_unknown():
    with pytest.raises(ValueError):
        bump(BumpProfile(), -1e-9)
    with pytest.raises(ValueError):
        BumpProfile("cosine")
    with pytest.raises(ValueError):
        BumpProfile("quintic", 0.0)


@pytest.mark.parametrize("kind", ["quintic", "mollifier"])
def test_bump_shape(kind):
    b = BumpProfile(kind, 0.7)
    t = np.linspace(0, 0.7, 2001)
    v = bump(b, t)
    assert v[0] == 1.0 and v[-1] == 0.0
    assert np.all(np.diff(v) <= 0) and v.min() >= 0 and v.max() <= 1
    # flat at both ends
    eps = 1e-5
    assert abs(bump(b, eps) - 1.0) / eps < 1e-3
    assert abs(bump(b, 0.7 - eps)) / eps < 1e-3


@given(st.floats(0, 1))
def test_quintic_deficit_bound(s):
    assert 1.0 - bump(BumpProfile("quintic", 1.0), s) <= bump_deficit_bound("quintic", s, 1.0) + 1e-15


@pytest.mark.parametrize("kind", ["quintic", "mollifier"])
def test_bump_stays_in_unit_interval_near_cutoff(kind):
    t = np.nextafter(1.0, 0.0) - np.arange(64) * 2.0**-53
    v = bump(BumpProfile(kind, 1.0), t)
    assert v.min() >= 0.0 and v.max() <= 1.0


@given(st.floats(0, 0.999))
def test_mollifier_deficit_bound(s):
    assert 1.0 - bump(BumpProfile("mollifier", 1.0), s) <= bump_deficit_bound("mollifier", s, 1.0) + 1e-15


# -- extension -------------------------------------------------------------------


def _two_point_setup():
    s = EmbeddedSamples(points=[[0.0, 0.0], [1.0, 0.0]])
    g = build_torus_grid(s, 32, 0.5)
    return s, g


def test_extension_at_sample_is_exact():
    s, g = _two_point_setup()
    out = extend_field(s, [3.0, 2.0], g, 0.5)
    idx = tuple(np.rint(g.to_torus(s.points[0]) / g.spacing).astype(int))
    assert out.values[idx] == 3.0


def test_extension_quarter_reach():
    s, g = _two_point_setup()
    out = extend_field(s, [3.0, 2.0], g, 0.5)
    i, j = np.rint(g.to_torus(s.points[1]) / g.spacing).astype(int)
    # two cells (0.125 = reach/4) along +x from the second sample
    assert out.values[i + 2, j] == pytest.approx(1.0, abs=1e-12)


def test_extension_zero_outside_tube():
    s, g = _two_point_setup()
    out = extend_field(s, [3.0, 2.0], g, 0.5)
    d = _periodic_dist_oracle(g.cell_positions(), g.to_torus(s.points), g.side).min(axis=1)
    far = d > 0.25
    assert far.any() and np.all(out.values.reshape(-1)[far] == 0.0)
    near = d < 0.25
    assert np.all(out.values.reshape(-1)[near] != 0.0)


def test_extension_ties_go_to_lowest_index():
    g = TorusGrid(np.zeros((16, 16)), 1.0, [0.0, 0.0])
    s = EmbeddedSamples(points=[[0.125, 0.0], [0.0, 0.0]])
    out = extend_field(s, [5.0, 7.0], g, 0.5)
    # cell 1 at x = 0.0625 is equidistant from both samples
    assert out.values[1, 0] == 5.0 * bump(BumpProfile("quintic", 0.25), 0.0625)


def test_extension_mismatched_field():
    s, g = _two_point_setup()
    with pytest.raises(ValueError, match="2 samples"):
        extend_field(s, [1.0], g, 0.5)


@given(arrays(np.float64, 2, elements=st.floats(-50, 50)))
def test_extension_bounded_and_sign_preserving(f):
    s, g = _two_point_setup()
    out = extend_field(s, f, g, 0.5)
    assert np.abs(out.values).max() <= np.abs(f).max()
    if (f >= 0).all():
        assert (out.values >= 0).all()


def test_extension_of_zero_is_zero():
    s, g = _two_point_setup()
    assert not extend_field(s, [0.0, 0.0], g, 0.5).values.any()


@given(
    arrays(np.float64, (6, 2), elements=st.floats(0, 1, exclude_max=True)),
    arrays(np.float64, (20, 2), elements=st.floats(0, 1, exclude_max=True)),
)
def test_nearest_periodic_matches_brute_force(samples, queries):
    idx, dist = nearest_periodic(samples, 1.0, queries)
    ref = _periodic_dist_oracle(queries, samples, 1.0)
    np.testing.assert_allclose(dist, ref.min(axis=1), atol=1e-12)
    for i in range(len(queries)):
        assert ref[i, idx[i]] <= ref[i].min() + 1e-12


# -- kernels --------------------------------------------------------------------


def test_delta_kernel():
    k = make_kernel((8, 8, 8), 2.0, "delta")
    assert np.count_nonzero(k.values) == 1 and k.values[0, 0, 0] == 1.0


def test_gaussian_kernel_normalised():
    k = make_kernel((32, 32), 4.0, KernelSpec("gaussian", 0.4))
    assert abs(k.values.sum() - 1.0) <= 1e-12


def test_gaussian_wrapping_is_converged():
    side, n, sigma = 1.0, 64, 1.0 / 6.0 - 1e-9
    k = make_kernel((n,), side, KernelSpec("gaussian", sigma))
    x = np.arange(n) * side / n
    ref = sum(np.exp(-((x + m * side) ** 2) / (2 * sigma**2)) for m in range(-20, 21))
    assert np.abs(k.values - ref / ref.sum()).max() < 1e-8


def test_box_kernel_1d():
    h = 1.0 / 8
    k = make_kernel((8,), 1.0, KernelSpec("box", 1.5 * h))
    np.testing.assert_allclose(k.values, [1 / 3, 1 / 3, 0, 0, 0, 0, 0, 1 / 3], rtol=0, atol=1e-15)


def test_kernel_errors(tmp_path):
    with pytest.raises(ValueError, match="side/6"):
        make_kernel((16,), 1.0, KernelSpec("gaussian", 1.0 / 6.0))
    with pytest.raises(ValueError, match="positive"):
        make_kernel((16,), 1.0, KernelSpec("gaussian", -1.0))
    with pytest.raises(ValueError, match="positive"):
        make_kernel((16,), 1.0, KernelSpec("box", 0.0))
    write_tieg(tmp_path / "k.tieg", TorusGrid(np.zeros(8), 1.0))
    with pytest.raises(ValueError, match="resolution"):
        make_kernel((16,), 1.0, f"file:{tmp_path / 'k.tieg'}")
    with pytest.raises(ValueError, match="unknown"):
        parse_kernel("laplace:1")


def test_kernel_file_loaded_verbatim(tmp_path):
    vals = np.random.default_rng(1).random((4, 4))
    write_tieg(tmp_path / "k.tieg", TorusGrid(vals, 2.0))
    np.testing.assert_array_equal(make_kernel((4, 4), 2.0, f"file:{tmp_path / 'k.tieg'}").values, vals)


def test_parse_kernel_relative_size():
    spec = parse_kernel("gaussian:0.25rho")
    assert spec.per_reach and spec.resolve(2.0).size == 0.5
    assert parse_kernel("box:0.3") == KernelSpec("box", 0.3)


# -- file formats -------------------------------------------------------------------


@given(
    vals=arrays(
        np.float64,
        st.tuples(st.integers(1, 5), st.integers(1, 5)),
        elements=st.floats(allow_nan=False, allow_infinity=False),
    ),
    side=st.floats(1e-3, 1e3),
)
def test_tieg_round_trip_bit_identical(vals, side, tmp_path_factory):
    path = tmp_path_factory.mktemp("g") / "g.tieg"
    g = TorusGrid(vals, side, [0.1, -0.2])
    write_tieg(path, g)
    back = read_tieg(path)
    assert back.values.tobytes() == g.values.tobytes()
    assert back.side == g.side and back.origin.tobytes() == g.origin.tobytes()


def test_tieg_header_layout(tmp_path):
    write_tieg(tmp_path / "g.tieg", TorusGrid(np.arange(6.0).reshape(2, 3), 1.5, [0.0, 1.0]))
    raw = (tmp_path / "g.tieg").read_bytes()
    head, body = raw.split(b"\n", 1)
    assert head.split() == [b"TIEG", b"2", b"2", b"3", b"1.5", b"0.0", b"1.0"]
    assert np.frombuffer(body, "<f8").tolist() == list(range(6))


def test_tieg_rejects_malformed(tmp_path):
    p = tmp_path / "bad.tieg"
    p.write_bytes(b"TIEX 1 2 1.0 0.0\n" + bytes(16))
    with pytest.raises(FormatError, match="not a TIEG"):
        read_tieg(p)
    p.write_bytes(b"TIEG 1 2 1.0 0.0\n" + bytes(8))
    with pytest.raises(FormatError, match="bytes"):
        read_tieg(p)
    p.write_bytes(b"TIEG 2 2 1.0 0.0\n" + bytes(32))
    with pytest.raises(FormatError, match="header"):
        read_tieg(p)


def test_csv_and_pgm_export(tmp_path):
    g = TorusGrid(np.arange(8.0).reshape(2, 2, 2), 1.0)
    write_grid_csv(tmp_path / "g.csv", g)
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "i0,i1,i2,value" and lines[-1] == "1,1,1,7.0" and len(lines) == 9
    write_pgm_slice(tmp_path / "g.pgm", TorusGrid(np.array([[0.0, 1.0], [2.0, 4.0]]), 1.0))
    assert (tmp_path / "g.pgm").read_text().split() == ["P2", "2", "2", "255", "0", "64", "128", "255"]
