import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichcount.saddle import (detect_cylinders, enumerate_saddle_connections, systole,
                               trace_segment)
from teichcount.surface import SurfaceError, geodesic_flow, l_origami, unit_torus
from teichcount.generators import random_genus2


def brute_torus_count(L):
    """Primitive integer vectors of length <= L, up to sign."""
    n = 0
    R = int(L) + 1
    for a in range(-R, R + 1):
        for b in range(-R, R + 1):
            if (a, b) != (0, 0) and math.gcd(a, b) == 1 and a * a + b * b <= L * L + 1e-9:
                n += 1
    return n // 2


@pytest.mark.parametrize("L", [1.0, 1.5, 2.3, 3.7, 5.0])
def test_torus_saddle_connections_are_primitive_vectors(L):
    scs = enumerate_saddle_connections(unit_torus(), L)
    assert len(scs) == brute_torus_count(L)
    for sc in scs:
        x, y = sc.holonomy
        assert math.gcd(int(round(x)), int(round(y))) == 1


def test_torus_unit_length_connections():
    scs = enumerate_saddle_connections(unit_torus(), 1.0)
    assert len(scs) == 2
    assert all(sc.length == pytest.approx(1) for sc in scs)
    assert all(sc.is_edge for sc in scs)


def test_sorted_by_length():
    scs = enumerate_saddle_connections(l_origami(), 3.0)
    lens = [sc.length for sc in scs]
    assert lens == sorted(lens)


def test_l_origami_short_connections():
    assert len(enumerate_saddle_connections(l_origami(), 1.0)) == 6


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 2.0])
def test_systole_of_flowed_torus(t):
    assert systole(geodesic_flow(unit_torus(), t)) == pytest.approx(math.exp(-t))


@given(st.integers(0, 10 ** 6))
def test_systole_no_longer_than_shortest_edge(seed):
    s = random_genus2(np.random.default_rng(seed))
    ell = systole(s)
    assert 0 < ell <= s.shortest_edge() + 1e-12


def test_connections_end_at_vertices():
    s = l_origami()
    for sc in enumerate_saddle_connections(s, 2.5):
        tr = trace_segment(s, sc.start_vertex, sc.start_position, sc.length)
        assert tr.end_vertex == sc.end_vertex
        total = sum((np.asarray(v) for _, v in tr.pieces), np.zeros(2))
        assert np.linalg.norm(total) == pytest.approx(sc.length)


def test_trace_rejects_interior_endpoint():
    with pytest.raises(SurfaceError):
        trace_segment(unit_torus(), 0, 0.3, 0.5)


def test_torus_cylinders():
    cyl = detect_cylinders(unit_torus(), 1.0)
    cores = sorted(tuple(round(abs(c), 9) for c in x.core_holonomy) for x in cyl)
    assert cores == [(0.0, 1.0), (1.0, 0.0)]
    for c in cyl:
        assert c.circumference == pytest.approx(1)
        assert c.height == pytest.approx(1)
        assert c.area == pytest.approx(1)


def test_l_origami_cylinders_grow_with_L():
    c1 = detect_cylinders(l_origami(), 1.0)
    c2 = detect_cylinders(l_origami(), 2.0)
    assert {round(c.circumference, 9) for c in c1} == {1.0}
    assert {round(c.circumference, 9) for c in c2} >= {1.0, 2.0}
    for c in c2:
        assert c.area <= l_origami().area() + 1e-9


def test_thin_cylinder_after_flow():
    s = geodesic_flow(unit_torus(), 2.0)
    cyl = detect_cylinders(s, 1.0)
    thin = [c for c in cyl if c.circumference < 0.5]
    assert thin and thin[0].modulus == pytest.approx(math.exp(4))
