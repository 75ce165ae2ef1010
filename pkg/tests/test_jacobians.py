import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teichcount import jacobians as jc


def test_config_validation():
    with pytest.raises(jc.JacobianError):
        jc.ZeroConfig((1, 2))
    with pytest.raises(jc.JacobianError):
        jc.ZeroConfig((1,))
    with pytest.raises(jc.JacobianError):
        jc.ZeroConfig((2, -2), radius=1)
    assert jc.ZeroConfig.centered([1, 2, 6]).z == (-2, -1, 3)


def test_coefficients_examples():
    assert np.allclose(jc.coefficients([1, -1]), [-1, 0])
    assert np.allclose(jc.zeros_to_coeffs(jc.ZeroConfig((1, -1))), [-1])
    assert np.allclose(jc.coefficients([0, 0, 0]), [0, 0, 0])


@given(st.integers(0, 10 ** 6), st.integers(2, 7))
def test_coeff_roundtrip(seed, m):
    cfg = jc.random_config(np.random.default_rng(seed), m)
    a = jc.coefficients(cfg.z)
    assert abs(a[-1]) < 1e-12
    assert jc.same_multiset(jc.coeffs_to_zeros(a), cfg.z, tol=1e-6)


def test_vandermonde_examples():
    assert jc.vandermonde_product([1, -1]) == pytest.approx(2)
    assert abs(jc.vandermonde_product([1, -1, 0])) == pytest.approx(2)
    assert jc.vandermonde_product([0.5, 0.5, -1]) == 0


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_signed_fd_vandermonde(m, rng):
    for _ in range(5):
        chk = jc.vandermonde_check(jc.random_config(rng, m))
        assert chk.signed_rel_err < 1e-6
        # the unsigned identity only holds for even m
        assert (chk.rel_err < 1e-6) == (m % 2 == 0)


def test_tree_examples():
    cfg = jc.ZeroConfig((-2, -1, 3))
    tree = jc.build_zero_tree(cfg)
    assert sorted(tuple(sorted(e)) for e in tree.edges) == [(0, 1), (1, 2)]
    assert tree.comparability == pytest.approx(1.0)
    z = cfg.array
    for (t, h), v in zip(tree.edges, tree.vectors):
        assert v == pytest.approx(z[h] - z[t])


def test_tree_rejects_repeated_zero():
    with pytest.raises(jc.JacobianError):
        jc.build_zero_tree(jc.ZeroConfig((1, 1, -2)))


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.integers(2, 7))
def test_tree_comparability_and_reconstruction(seed, m):
    cfg = jc.random_config(np.random.default_rng(seed), m)
    tree = jc.build_zero_tree(cfg)
    assert 1 - 1e-12 <= tree.comparability <= m - 1 + 1e-9
    z = jc.zeros_from_edges(tree, tree.vectors, cfg.array.mean())
    assert np.allclose(z, cfg.array)


def test_strange_comb_two_zeros():
    assert jc.strange_comb_ratio(jc.ZeroConfig((1, -1))) == pytest.approx(1)


def test_strange_comb_bounded(rng):
    for m in (3, 4, 5):
        worst = max(jc.strange_comb_ratio(jc.random_config(rng, m)) for _ in range(50))
        assert worst <= m


def test_gk_quadrature():
    r = jc.adaptive_gk(np.sin, 0, math.pi)
    assert r.value == pytest.approx(2, abs=1e-13)
    r = jc.adaptive_gk(lambda x: np.sqrt(x), 0, 1, tol=1e-10)
    assert r.value == pytest.approx(2 / 3, abs=1e-9)
    assert r.halving_change < 1e-8


def test_period_oracle_m2():
    cfg = jc.ZeroConfig((-1, 1))
    om = jc.period_integrals(cfg).omegas[0]
    assert abs(om) == pytest.approx(math.pi / 2, rel=1e-12)
    assert om.real == pytest.approx(0, abs=1e-12)


def test_period_scaling_and_conjugation(rng):
    cfg = jc.random_config(rng, 4)
    tree = jc.build_zero_tree(cfg)
    base = np.array(jc.period_integrals(cfg, tree).omegas)
    big = np.array(jc.period_integrals(cfg.scaled(2), tree).omegas)
    # weight (m + 2) / 2 = 3 for four zeros
    assert np.allclose(np.abs(big), 8 * np.abs(base), rtol=1e-9)
    m2 = jc.ZeroConfig((-1, 1))
    assert abs(jc.period_integrals(m2.scaled(2)).omegas[0]) == pytest.approx(4 * math.pi / 2)
    conj = np.array(jc.period_integrals(cfg.conjugate(), tree).omegas)
    for a, b in zip(conj, base):
        assert min(abs(a - b.conjugate()), abs(a + b.conjugate())) < 1e-9 * abs(b)


def test_period_rejects_zero_on_edge():
    with pytest.raises(jc.JacobianError):
        jc.period_integral([-1, 0, 1], -1, 1)


@pytest.mark.parametrize("m, const", [(2, math.pi / 4), (3, math.pi / 6), (4, math.pi ** 2 / 32)])
def test_period_jacobian_ratio_constant(m, const, rng):
    for _ in range(2):
        rep = jc.period_jacobian_report(jc.random_config(rng, m))
        assert rep.ratio == pytest.approx(const, rel=1e-4)
        assert rep.self_convergence < 1e-8


def test_period_jacobian_through_collision(rng):
    base = jc.random_config(rng, 3)
    for gap in (1e-1, 1e-2, 1e-3):
        rep = jc.period_jacobian_report(jc.collision_config(base, gap))
        assert rep.ratio == pytest.approx(math.pi / 6, rel=1e-3)
        assert rep.entry_ratio < 10


@pytest.mark.parametrize("a", [[0.3], [0.2 + 0.1j, 0, 0.1], [0.05, 0.02, 0.1, 0, 0.03j]])
def test_residue_exact(a):
    assert jc.residue_b(a, 2.0) == pytest.approx(jc.residue_exact(a), abs=1e-10)


def test_residue_zero_and_leading():
    assert abs(jc.residue_b([0, 0, 0], 1.0)) < 1e-12
    assert jc.residue_leading([0.5]) == pytest.approx(0.5j * math.pi)
    with pytest.raises(jc.JacobianError):
        jc.residue_exact([0.1] * 7)


def test_residue_small_contour_raises():
    with pytest.raises(jc.BranchError):
        jc.residue_b([-4.0], 1.0)


def test_chain_rule_m2():
    rep = jc.jacobian_chain_check(jc.ZeroConfig((-1, 1)))
    assert rep.chain_constant == pytest.approx(-0.5)
    assert rep.rel_err < 1e-8


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_chain_rule(m, rng):
    for _ in range(3):
        assert jc.jacobian_chain_check(jc.random_config(rng, m)).rel_err < 1e-6


def test_relabel_invariance(rng):
    cfg = jc.random_config(rng, 4)
    tree = jc.build_zero_tree(cfg)
    perm = [2, 0, 1]
    a = jc.period_jacobian_report(cfg, tree)
    b = jc.period_jacobian_report(cfg, tree.relabel(perm))
    assert a.det_abs == pytest.approx(b.det_abs, rel=1e-6)


def test_cluster_sweep_bounded():
    ratios = [jc.period_jacobian_report(jc.cluster_config(sep, 0.2)).ratio for sep in (1, 10, 100)]
    assert np.allclose(ratios, math.pi ** 2 / 32, rtol=1e-3)
