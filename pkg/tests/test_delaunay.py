import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichcount.delaunay import (DelaunayError, _incircle, check_delaunay_lemma,
                                 circumradius_sq_sum, delaunayize, euclidean_distance, incircle,
                                 is_delaunay, period_coordinates)
from teichcount.generators import perturb, random_genus2, random_quadratic
from teichcount.saddle import edge_keys, enumerate_saddle_connections, systole
from teichcount.surface import (SurfaceError, geodesic_flow, l_origami, rotate, unit_torus)


def sheared_torus(t):
    """Square torus rotated so its diagonal is horizontal, then flowed."""
    return geodesic_flow(rotate(unit_torus(), -math.pi / 4), t)


def test_incircle_oracle_points():
    Q, R = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert _incircle(Q, R, np.array([0.9, 0.9])) > 0          # inside the unit-square circle
    assert _incircle(Q, R, np.array([2.0, 2.0])) < 0
    assert abs(_incircle(Q, R, np.array([1.0, 1.0]))) < 1e-12  # cocircular


def test_square_torus_is_delaunay_with_ties():
    s = unit_torus()
    assert is_delaunay(s)
    d, st_ = delaunayize(s, with_stats=True)
    assert st_.flips == 0 and d is s


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_diagonally_flowed_square_torus_stays_delaunay(t):
    # a flowed square is a rectangle, whose four corners are always cocircular
    s = geodesic_flow(unit_torus(), t)
    assert abs(incircle(s, 2)) < 1e-12
    assert is_delaunay(s)


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_sheared_torus_fails_incircle_then_flips(t):
    s = sheared_torus(t)
    assert not is_delaunay(s)
    d, st_ = delaunayize(s, with_stats=True)
    assert st_.flips >= 1
    assert is_delaunay(d)
    assert st_.monotone
    assert d.area() == pytest.approx(s.area())


def test_certificate_decreases(rng):
    for _ in range(10):
        s = geodesic_flow(random_genus2(rng), 1.5)
        d, st_ = delaunayize(s, with_stats=True)
        assert st_.monotone
        assert circumradius_sq_sum(d.hol) <= circumradius_sq_sum(s.hol) * (1 + 1e-12)


@given(st.integers(0, 10 ** 6), st.sampled_from([0.0, 0.5, 1.0, 2.0]))
def test_delaunay_lemma_random(seed, t):
    s = delaunayize(geodesic_flow(random_genus2(np.random.default_rng(seed)), t))
    rep = check_delaunay_lemma(s)
    assert rep.passed and rep.violations == 0


def test_lemma_flags_ties_on_l_origami():
    rep = check_delaunay_lemma(l_origami())
    assert rep.passed
    ties = [c for c in rep.connections if c[2]]
    assert ties and all(c[0] == pytest.approx(math.sqrt(2)) for c in ties)


def test_lemma_detects_non_delaunay_triangulation():
    # a long thin triangulation of a torus: the short diagonal is not an edge
    s = sheared_torus(2.0)
    ell = systole(s)
    ek = edge_keys(s)
    short = [sc for sc in enumerate_saddle_connections(s, math.sqrt(2) * ell) if sc.key not in ek]
    assert short
    assert not check_delaunay_lemma(s).passed


def test_quadratic_delaunay(rng):
    q = geodesic_flow(perturb(random_quadratic(rng), rng, 0.2), 1.0)
    d = delaunayize(q)
    assert is_delaunay(d)
    assert check_delaunay_lemma(d).passed


def test_period_coordinates_and_distance():
    s = l_origami()
    p = period_coordinates(s)
    assert len(p.basis) == 4
    assert np.allclose(p.periods, np.rint(p.periods))
    f = geodesic_flow(s, 0.1)
    d = euclidean_distance(s, f)
    q = period_coordinates(f)
    assert d == pytest.approx(np.linalg.norm(q.flat() - p.flat()))
    assert euclidean_distance(s, s) == 0


def test_distance_needs_same_triangulation(rng):
    s = geodesic_flow(random_genus2(rng), 2.0)
    d = delaunayize(s)
    if np.array_equal(d.partner, s.partner):
        pytest.skip("no flip happened")
    with pytest.raises(SurfaceError):
        euclidean_distance(s, d)


def test_quadratic_period_coordinates_use_odd_basis(rng):
    q = random_quadratic(rng)
    p = period_coordinates(q)
    assert p.odd
    odd = sum(1 for a in q.vertex_angles if round(a / math.pi) % 2)
    assert len(p.basis) == 2 * q.genus - 2 + odd
