import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichcount import dehn_thurston as dt

Y = dt.MarkedPoint(2, (1, 1, 1))


def brute_E(y, L):
    """Direct box enumeration, independent of the per-curve tables."""
    n = y.n_curves
    R = int(math.ceil(L * max(max(s, 1 / s) for s in y.s))) + 1
    count = 0
    rng = range(-R, R + 1)
    for v in itertools.product(range(R + 1), rng, repeat=1):
        pass
    axes = [[(m, t) for m in range(R + 1) for t in rng if not (m == 0 and t < 0)]] * n
    for combo in itertools.product(*axes):
        m = tuple(c[0] for c in combo)
        t = tuple(c[1] for c in combo)
        if not any(m) and not any(t):
            continue
        if not dt.parity_ok(m, y.pants):
            continue
        if dt.quasi_sqrt_ext(dt.DTCoordinate(m, t), y) <= L * (1 + 1e-12):
            count += 1
    return count


def test_coordinate_validation():
    with pytest.raises(ValueError):
        dt.DTCoordinate((-1, 0, 0), (0, 0, 0))
    with pytest.raises(ValueError):
        dt.DTCoordinate((0, 0, 0), (-1, 0, 0))
    dt.DTCoordinate((1, 0, 0), (-3, 0, 0))


def test_marked_point_validation():
    with pytest.raises(ValueError):
        dt.MarkedPoint(2, (1, 1))
    with pytest.raises(ValueError):
        dt.MarkedPoint(2, (1, 0, 1))
    with pytest.raises(ValueError):
        dt.MarkedPoint(1, ())
    assert Y.dimension == 6


def test_norm_examples():
    assert dt.quasi_sqrt_ext(dt.DTCoordinate((1, 0, 1), (0, 0, 0)), Y) == pytest.approx(1)
    y = dt.MarkedPoint(2, (2, 1, 1))
    assert dt.quasi_sqrt_ext(dt.DTCoordinate((2, 0, 0), (0, 0, 0)), y) == pytest.approx(1)
    assert dt.quasi_sqrt_ext(dt.DTCoordinate((0, 0, 0), (1, 0, 0)), y) == pytest.approx(2)


def test_dehn_twist_shifts_twist():
    b = dt.DTCoordinate((2, 1, 1), (0, 3, 0))
    assert dt.dehn_twist(b, 0, 2).t == (4, 3, 0)
    # twisting the point and the curve together leaves the norm unchanged
    y = Y.twisted((1, 0, 0))
    assert dt.quasi_sqrt_ext(dt.dehn_twist(b, 0, 1), y) == pytest.approx(dt.quasi_sqrt_ext(b, Y))


@pytest.mark.parametrize("L, expected", [(1, 13), (2, 171)])
def test_small_counts(L, expected):
    assert dt.count_multicurves(Y, L) == expected


@pytest.mark.parametrize("s", [(1, 1, 1), (2, 0.5, 1), (0.7, 1.3, 3)])
@pytest.mark.parametrize("L", [1.0, 1.7, 2.5])
def test_count_matches_box_enumeration(s, L):
    y = dt.MarkedPoint(2, s)
    assert dt.count_multicurves(y, L) == brute_E(y, L)


def test_generators_agree():
    y = dt.MarkedPoint(2, (1.3, 0.8, 1))
    L = 3.0
    lex = list(dt.enumerate_multicurves(y, L))
    blocks = np.concatenate([rows for _, rows in dt.multicurve_blocks(y, L)])
    assert len(lex) == len(blocks) == dt.count_multicurves(y, L)
    assert [b.as_tuple() for b in lex] == [tuple(r) for r in blocks.tolist()]


def test_count_below_smallest_curve_is_zero():
    assert dt.count_multicurves(Y, 0.5) == 0


def test_E_monotone_in_L():
    vals = [dt.count_multicurves(Y, L) for L in (1, 2, 4, 8)]
    assert vals == sorted(vals)


def test_lambda_converges_to_limit():
    lim = dt.lambda_limit(Y)
    assert lim == pytest.approx((math.pi / 2) ** 3 / 2)
    seq = dt.lambda_sequence(Y, 8, 3)
    assert abs(seq[-1][1] - lim) / lim < 0.01


def test_growth_exponent_is_dimension():
    assert abs(dt.growth_exponent(Y, [8, 16, 32, 64]) - 6) < 0.1


@pytest.mark.parametrize("s", [0.25, 0.5, 1, 2, 4])
@pytest.mark.parametrize("L", [1, 3, 10, 33])
def test_As_bound(s, L):
    r = dt.count_As(s, L)
    assert r.passed
    assert r.count <= 4 * max(s, 1 / s) * L * L


def test_As_examples():
    assert dt.count_As(1, 2).count == 6
    assert dt.count_As(2, 10).count == 66


def test_G_examples():
    assert dt.G(Y, 0.25) == 2
    assert dt.G(dt.MarkedPoint(2, (0.1, 1, 0.2)), 0.25) == pytest.approx(1 + 50)


def test_esst_constant_bounded(rng):
    for _ in range(20):
        y = dt.random_bounded_point(rng)
        C = y.bounded_constant()
        for b in dt.enumerate_multicurves(y, 3):
            assert dt.lemma_esst_constant(b, y) <= C * (1 + 1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_kerckhoff_exact_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    x = dt.random_bounded_point(rng)
    y = dt.random_bounded_point(rng)
    assert dt.kerckhoff_distance(x, y, 4) == pytest.approx(dt.kerckhoff_distance_bruteforce(x, y, 4))


def test_kerckhoff_scaling():
    assert dt.kerckhoff_distance(Y, Y, 4) == pytest.approx(0)
    assert dt.kerckhoff_distance(Y, dt.MarkedPoint(2, (2, 2, 2)), 4) >= math.log(2) - 1e-12


@given(st.integers(0, 10 ** 6))
def test_busemann_additive_and_chain_rule(seed):
    rng = np.random.default_rng(seed)
    x, y, z = (dt.random_bounded_point(rng) for _ in range(3))
    xi = dt.DTCoordinate(tuple(int(v) for v in rng.integers(0, 5, 3) * 2),
                         tuple(int(v) for v in rng.integers(0, 5, 3)))
    if xi.is_empty:
        return
    b = dt.busemann_cocycle
    assert b(xi, x, y) + b(xi, y, z) == pytest.approx(b(xi, x, z), abs=1e-12)
    r = dt.ps_density_ratio
    assert r(xi, x, y) * r(xi, y, z) == pytest.approx(r(xi, x, z), rel=1e-12)
    assert r(xi.scaled(3), x, y) == r(xi, x, y)


def test_busemann_rejects_empty():
    with pytest.raises(ValueError):
        dt.busemann_cocycle(dt.DTCoordinate((0, 0, 0), (0, 0, 0)), Y, Y)


@pytest.mark.parametrize("R", [0.3, 0.7, 1.0])
def test_twist_orbit_matches_bruteforce(R, rng):
    x = dt.random_bounded_point(rng)
    y0 = x.twisted((0, 0, 0))
    fast = dt.twist_orbit_count(x, y0, R)
    assert fast.count == dt.twist_orbit_bruteforce(x, y0, R, box=4)


def test_twist_orbit_other_base(rng):
    x = dt.random_bounded_point(rng)
    y0 = dt.random_bounded_point(rng)
    for R in (0.5, 1.0):
        assert dt.twist_orbit_count(x, y0, R).count == dt.twist_orbit_bruteforce(x, y0, R, box=5)


def test_twist_distance_consistent_with_count(rng):
    x = dt.random_bounded_point(rng)
    rep = dt.twist_orbit_count(x, x, 1.0)
    (a0, b0), _, _ = rep.per_curve
    inside = x.twisted((b0, 0, 0))
    outside = x.twisted((b0 + 1, 0, 0))
    assert dt.twist_distance(x, inside) <= 1.0 + 1e-9
    assert dt.twist_distance(x, outside) > 1.0
