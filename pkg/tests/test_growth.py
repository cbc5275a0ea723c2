import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tieconv.growth import (
    GrowthSeries,
    SurfaceGroup,
    ball_growth_lattice,
    ball_growth_surface_group,
    classify_growth,
    entropy_estimate,
    flat_torus_series,
    geodesic_count_flat_torus,
    hyperbolic_orbit_series,
    orbit_count_hyperbolic,
    orbit_counts,
    orbit_points,
    relator_residual,
    submultiplicativity_violations,
    validate_generators,
)
from tieconv.growth.fuchsian import (
    INRADIUS,
    commutator_generators,
    disk_distance,
    opposite_generators,
)


@pytest.fixture(scope="module")
def genus2():
    return ball_growth_surface_group(2, 8)


# -- numeric SU(1,1) oracle for the surface group ------------------------------------
# letters: 2k is generator k, 2k+1 its inverse; generators ordered a1, b1, a2, b2


def _letter_matrices():
    gens = commutator_generators()
    mats = []
    for g in gens:
        mats += [g, np.linalg.inv(g)]
    return mats


LETTERS = _letter_matrices()


def _word_matrix(word):
    m = np.eye(2, dtype=complex)
    for x in word:
        m = m @ LETTERS[x]
    return m


def _mp_letters(dps=50):
    """The same generators rebuilt at 50 digits, so long words keep full accuracy."""
    with mpmath.workdps(dps):
        inr = mpmath.acosh(1 + mpmath.sqrt(2))

        def rot(t):
            return mpmath.matrix([[mpmath.expj(t / 2), 0], [0, mpmath.expj(-t / 2)]])

        def boost(t, length):
            c, s = mpmath.cosh(length / 2), mpmath.sinh(length / 2)
            return rot(t) * mpmath.matrix([[c, s], [s, c]]) * rot(-t)

        def pair(i, j):
            ai, aj = i * mpmath.pi / 4, j * mpmath.pi / 4
            return boost(ai, 2 * inr) * rot(ai + mpmath.pi - aj)

        gens = [pair(0, 2), pair(1, 3) ** -1, pair(4, 6), pair(5, 7) ** -1]
        out = []
        for g in gens:
            out += [g, g**-1]
        return out


MP_LETTERS = _mp_letters()


def _is_identity_numeric(word):
    with mpmath.workdps(50):
        m = mpmath.eye(2)
        for x in word:
            m = m * MP_LETTERS[x]
        i2 = mpmath.eye(2)
        gap = min(mpmath.mnorm(m - i2, 1), mpmath.mnorm(m + i2, 1))
        return gap < mpmath.mpf(10) ** -20


def _element_key(m):
    # projective: fix the sign of a, then round
    if m[0, 0].real < 0:
        m = -m
    return tuple(np.round([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag], 6))


def _numeric_ball_sizes(m_max):
    """Distinct group elements reachable by freely reduced words of length <= m."""
    seen = {_element_key(np.eye(2, dtype=complex))}
    frontier = [((), np.eye(2, dtype=complex))]
    sizes = [1]
    for _ in range(m_max):
        nxt = []
        for word, m in frontier:
            for x in range(8):
                if word and word[-1] == x ^ 1:
                    continue
                nxt.append((word + (x,), m @ LETTERS[x]))
        frontier = nxt
        for _, m in nxt:
            seen.add(_element_key(m))
        sizes.append(len(seen))
    return sizes


def test_commutator_generators_satisfy_relator():
    g = SurfaceGroup(2)
    assert _is_identity_numeric(g.relator)


def test_surface_counts_match_numeric_representation(genus2):
    assert genus2.counts[:5].tolist() == _numeric_ball_sizes(4)


words = st.lists(st.integers(0, 7), min_size=0, max_size=14).map(tuple)


@settings(max_examples=200)
@given(words)
def test_word_problem_agrees_with_matrices(w):
    assert SurfaceGroup(2).is_identity(w) == _is_identity_numeric(w)


@settings(max_examples=100)
@given(words, st.integers(0, 7), st.integers(0, 10))
def test_inserting_relator_conjugates_gives_identity(w, k, cut):
    g = SurfaceGroup(2)
    r = g.relator[k:] + g.relator[:k]
    cut = min(cut, len(w))
    padded = w[:cut] + r + w[cut:]
    assert g.equal(padded, w)
    assert g.is_identity(w + g.inverse(w))


@settings(max_examples=100)
@given(words)
def test_dehn_reduce_preserves_element(w):
    g = SurfaceGroup(2)
    red = g.dehn_reduce(w)
    assert len(red) <= len(w)
    assert _is_identity_numeric(tuple(w) + g.inverse(red))


def test_canonical_is_a_class_function():
    g = SurfaceGroup(2)
    # the relator splits into halves u w = 1, so u and w^-1 spell one element
    u = g.relator[:4]
    v = g.inverse(g.relator[4:])
    assert g.equal(u, v)
    assert g.canonical(u) == g.canonical(v)


def test_parse_and_format_round_trip():
    g = SurfaceGroup(2)
    w = g.parse("a1 B1 b2 A2")
    assert w == (0, 3, 6, 5)
    assert g.parse(g.format(w)) == w
    with pytest.raises(ValueError):
        g.parse("c1")


def test_surface_group_small_counts(genus2):
    assert genus2.counts[0] == 1
    assert genus2.counts[1] == 9
    sizes = np.diff(genus2.counts).tolist()
    assert sizes == [8, 56, 392, 2736, 19096, 133288, 930328, 6493536]


def test_surface_ratio_at_least_one_and_a_half(genus2):
    c = genus2.counts
    assert all(c[m + 1] / c[m] >= 1.5 for m in range(2, 8))


def test_genus_three_first_terms():
    s = ball_growth_surface_group(3, 3)
    assert s.counts.tolist() == [1, 13, 145, 1597]


def test_surface_limits():
    with pytest.raises(ValueError):
        ball_growth_surface_group(4, 3)
    with pytest.raises(ValueError):
        ball_growth_surface_group(2, 9)
    with pytest.raises(ValueError):
        SurfaceGroup(1)


# -- lattices -------------------------------------------------------------------------


def _l1_ball_oracle(d, m):
    return sum(1 for z in itertools.product(range(-m, m + 1), repeat=d) if sum(map(abs, z)) <= m)


def test_lattice_d1_closed_form():
    s = ball_growth_lattice(1, 50)
    assert s.counts.tolist() == [2 * m + 1 for m in range(51)]


def test_lattice_d2_closed_form():
    s = ball_growth_lattice(2, 30)
    assert s.counts[0] == 1 and s.counts[1] == 5
    assert s.counts.tolist() == [2 * m * m + 2 * m + 1 for m in range(31)]
    assert all(_l1_ball_oracle(2, m) == 2 * m * m + 2 * m + 1 for m in range(0, 31, 5))


@pytest.mark.parametrize("d,m", [(3, 8), (4, 5)])
def test_lattice_matches_enumeration(d, m):
    assert ball_growth_lattice(d, m).counts.tolist() == [_l1_ball_oracle(d, k) for k in range(m + 1)]


@settings(max_examples=30)
@given(st.permutations(range(3)), st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3))
def test_lattice_generator_symmetries(perm, signs):
    gens = np.eye(3, dtype=int)[list(perm)] * np.array(signs)[:, None]
    assert ball_growth_lattice(3, 10, gens).counts.tolist() == ball_growth_lattice(3, 10).counts.tolist()


def test_lattice_other_generators():
    # {e1, e2, e1 + e2}: hexagonal word metric, N(m) = 3m^2 + 3m + 1
    s = ball_growth_lattice(2, 12, [[1, 0], [0, 1], [1, 1]])
    assert s.counts.tolist() == [3 * m * m + 3 * m + 1 for m in range(13)]


def test_lattice_limits():
    with pytest.raises(ValueError):
        ball_growth_lattice(5, 3)
    with pytest.raises(ValueError):
        ball_growth_lattice(2, 51)
    assert ball_growth_lattice(2, 0).counts.tolist() == [1]


@pytest.mark.parametrize("d,m", [(1, 50), (2, 30), (3, 20)])
def test_lattice_submultiplicative(d, m):
    assert submultiplicativity_violations(ball_growth_lattice(d, m)) == []


def test_surface_submultiplicative(genus2):
    assert submultiplicativity_violations(genus2) == []


def test_submultiplicativity_detects_violation():
    s = GrowthSeries([0, 1, 2], [1, 2, 5], kind="word")
    assert submultiplicativity_violations(s) == [(1.0, 1.0)]
    assert submultiplicativity_violations(s, constant=2) == []


# -- flat torus geodesics ------------------------------------------------------------


def _flat_oracle(w, length, k, side=1.0):
    n = 0
    for z in itertools.product(range(-k, k + 1), repeat=len(w)):
        sq = sum((wi + side * zi) ** 2 for wi, zi in zip(w, z))
        if 0 < sq <= length * length:
            n += 1
    return n


def test_flat_torus_short_lengths():
    assert geodesic_count_flat_torus(2, 1.0, (0, 0), (0.5, 0), 0.4) == 0
    assert geodesic_count_flat_torus(2, 1.0, (0, 0), (0.5, 0), 0.5) == 2
    assert _flat_oracle((0.5, 0.0), 0.5, 2) == 2


def test_flat_torus_area_asymptotics():
    n = geodesic_count_flat_torus(2, 1.0, (0, 0), (0.5, 0.25), 20.0)
    assert n == _flat_oracle((0.5, 0.25), 20.0, 22)
    assert abs(n / (math.pi * 400) - 1) <= 0.05


def test_flat_torus_same_point_excludes_constant_path():
    assert geodesic_count_flat_torus(2, 1.0, (0.3, 0.3), (0.3, 0.3), 1.0) == 4
    assert geodesic_count_flat_torus(1, 2.0, (0.0,), (0.0,), 4.0) == 4


coords = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60)
@given(st.tuples(coords, coords), st.tuples(coords, coords), st.floats(0, 6), st.floats(0.5, 2))
def test_flat_torus_symmetric_and_matches_oracle(x, y, length, side):
    a = geodesic_count_flat_torus(2, side, x, y, length)
    assert a == geodesic_count_flat_torus(2, side, y, x, length)
    w = tuple(yi - xi for xi, yi in zip(x, y))
    assert a == _flat_oracle(w, length, int((length + max(map(abs, w))) / side) + 2, side)


@given(st.tuples(coords, coords, coords), st.floats(0, 4), st.floats(0, 2))
def test_flat_torus_monotone(x, length, extra):
    y = (0.1, 0.2, 0.3)
    assert geodesic_count_flat_torus(3, 1.0, x, y, length) <= geodesic_count_flat_torus(3, 1.0, x, y, length + extra)


def test_flat_torus_errors():
    with pytest.raises(ValueError):
        geodesic_count_flat_torus(2, 1.0, (0, 0), (0.5, 0), -1)
    with pytest.raises(ValueError):
        geodesic_count_flat_torus(4, 1.0, (0,) * 4, (0.5,) * 4, 1)
    with pytest.raises(ValueError):
        geodesic_count_flat_torus(2, 1.0, (0, 0, 0), (0.5, 0), 1)


# -- hyperbolic orbit counting -------------------------------------------------------


def test_generators_validate():
    assert validate_generators() <= 1e-6
    assert relator_residual() <= 1e-6
    g = opposite_generators()
    dets = np.linalg.det(g)
    np.testing.assert_allclose(dets, 1.0, atol=1e-12)
    trans = np.arccosh(np.abs(np.trace(g, axis1=1, axis2=2).real) / 2) * 2
    np.testing.assert_allclose(trans, 2 * INRADIUS, rtol=1e-12)


def test_orbit_identity_only_below_translation_length():
    assert orbit_count_hyperbolic(0.1) == 1
    assert orbit_count_hyperbolic(0.0) == 1
    assert orbit_count_hyperbolic(2 * INRADIUS - 1e-9) == 1
    assert orbit_count_hyperbolic(2 * INRADIUS + 1e-9) == 9


def test_orbit_counts_from_two_to_eight():
    c = orbit_counts(np.arange(2, 9)).tolist()
    # the shortest translation is 2 * arccosh(1 + sqrt 2) ~ 3.057, so radii 2 and 3 both see only o
    assert c[:2] == [1, 1]
    assert all(b > a for a, b in zip(c[1:], c[2:]))
    assert all(b >= a for a, b in zip(c, c[1:]))


def test_orbit_counts_match_single_radius_runs():
    radii = [3.5, 5.0, 6.5]
    assert orbit_counts(radii).tolist() == [orbit_count_hyperbolic(r) for r in radii]


def test_orbit_points_are_separated_and_within_radius():
    z, d = orbit_points(6.0)
    assert (d <= 6.0).all()
    np.testing.assert_allclose(d, disk_distance(0, z), atol=1e-9)
    pair = disk_distance(z[:, None], z[None, :])
    np.fill_diagonal(pair, np.inf)
    # distinct orbit points sit at least one translation length apart
    assert pair.min() >= 2 * INRADIUS - 1e-6


def _brute_orbit_count(radius, max_word):
    gens = opposite_generators()
    pts = [0j]
    frontier = [np.eye(2, dtype=complex)]
    for _ in range(max_word):
        frontier = [m @ g for m in frontier for g in gens]
        for m in frontier:
            pts.append(m[0, 1] / m[1, 1])
    pts = np.array(pts)
    pts = pts[disk_distance(0, pts) <= radius]
    keep = []
    for p in pts:
        if not keep or disk_distance(p, np.array(keep)).min() >= 1e-6:
            keep.append(p)
    return len(keep)


def test_orbit_count_matches_unpruned_enumeration():
    assert orbit_count_hyperbolic(5.0) == _brute_orbit_count(5.0, 5)


def test_orbit_slope_four_to_eight():
    radii = np.arange(4.0, 8.01, 0.5)
    slope = np.polyfit(radii, np.log(orbit_counts(radii)), 1)[0]
    assert 0.7 <= slope <= 1.3


def test_orbit_cap():
    with pytest.raises(ValueError):
        orbit_count_hyperbolic(12.5)
    with pytest.raises(ValueError):
        hyperbolic_orbit_series([1.0, 13.0])


# -- classification and entropy -------------------------------------------------------


def test_classify_quadratic_closed_form():
    m = np.arange(31)
    c = classify_growth(GrowthSeries(m, 2 * m * m + 2 * m + 1))
    assert c.kind == "polynomial" and 1.9 <= c.degree <= 2.1


def test_classify_powers_of_three():
    m = np.arange(11)
    c = classify_growth(GrowthSeries(m, 3**m))
    assert c.kind == "exponential" and 1.08 <= c.rate <= 1.12
    assert c.fit_residual <= 1e-12


def test_classify_constant_bounded():
    c = classify_growth(GrowthSeries(np.arange(5), [1] * 5))
    assert c.kind == "bounded" and c.as_record() == {"kind": "bounded", "fit_residual": 0.0}


@pytest.mark.parametrize("d,m", [(1, 50), (2, 30), (3, 30)])
def test_classify_lattices_polynomial(d, m):
    c = classify_growth(ball_growth_lattice(d, m))
    assert c.kind == "polynomial" and abs(c.degree - d) <= 0.15


def test_classify_surface_group_exponential(genus2):
    c = classify_growth(genus2)
    assert c.kind == "exponential" and c.rate > 0
    assert c.as_record()["rate"] == c.rate


def test_classify_needs_five_points():
    with pytest.raises(ValueError, match="5"):
        classify_growth(GrowthSeries(np.arange(4), [1, 2, 3, 4]))
    with pytest.raises(ValueError):
        entropy_estimate(GrowthSeries(np.arange(4), [1, 2, 3, 4]))


def test_entropy_constant_exactly_zero():
    assert entropy_estimate(GrowthSeries(np.arange(6), [7] * 6)) == 0.0


def test_entropy_flat_torus_near_zero():
    s = flat_torus_series(2, 1.0, (0, 0), (0.5, 0.25), np.arange(1, 31))
    assert -0.1 <= entropy_estimate(s) <= 0.1


def test_entropy_hyperbolic_orbit():
    s = hyperbolic_orbit_series(np.arange(0.5, 8.01, 0.5))
    assert 0.7 <= entropy_estimate(s) <= 1.3


def test_entropy_exact_exponential():
    r = np.linspace(0, 5, 11)
    s = GrowthSeries(r, np.round(np.exp(2 * r) * 1e3).astype(np.int64))
    assert entropy_estimate(s) == pytest.approx(2.0, rel=1e-5)


# -- series validation ------------------------------------------------------------------


@pytest.mark.parametrize(
    "radii,counts",
    [([0, 1, 1], [1, 2, 3]), ([0, 1], [0, 1]), ([0, 1, 2], [1, 3, 2]), ([0, 1], [1])],
)
def test_series_rejects_invalid(radii, counts):
    with pytest.raises(ValueError):
        GrowthSeries(radii, counts)


def test_series_rows():
    s = GrowthSeries([0, 0.5, 1], [1, 2, 4])
    assert list(s.rows()) == [(0, 1), (0.5, 2), (1, 4)]
