import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichcount.generators import perturb, random_genus2, random_quadratic
from teichcount.surface import (ABELIAN, QUADRATIC, SurfaceError, build_surface, builtin_origami,
                                dumps_surface, from_arrays, geodesic_flow, glue_squares,
                                l_origami, load_surface, origami, rotate, save_surface,
                                surface_from_dict, surface_to_dict, unit_torus)


def torus_doc():
    return {
        "kind": "abelian",
        "triangles": [["a", "b", "c"], ["d", "e", "f"]],
        "holonomies": {"a": [1, 0], "b": [0, 1], "c": [-1, -1],
                       "d": [1, 1], "e": [-1, 0], "f": [0, -1]},
        "gluings": [["a", "e", 1], ["b", "f", 1], ["c", "d", 1]],
    }


def test_unit_torus_invariants():
    s = unit_torus()
    assert s.genus == 1
    assert s.area() == pytest.approx(1.0)
    assert s.n_vertices == 1
    assert s.vertex_angles[0] == pytest.approx(2 * math.pi)


def test_l_origami_is_genus_two_with_one_6pi_point():
    s = l_origami()
    assert s.genus == 2
    assert s.area() == pytest.approx(3.0)
    assert [round(a / math.pi, 9) for a in s.vertex_angles] == [6.0]


def test_h11_builtin():
    s = builtin_origami("H11")
    assert s.genus == 2
    assert sorted(round(a / math.pi) for a in s.vertex_angles) == [2, 6]
    assert s.marked_points == (1,)


def test_unknown_builtin():
    with pytest.raises(SurfaceError, match="unknown origami"):
        builtin_origami("nope")


def test_build_from_labels_and_roundtrip(tmp_path):
    s = build_surface(**torus_doc())
    assert s.genus == 1
    p = tmp_path / "t.json"
    save_surface(s, p)
    s2 = load_surface(p)
    assert np.array_equal(s2.hol, s.hol)
    assert np.array_equal(s2.partner, s.partner)
    assert dumps_surface(s2) == dumps_surface(s)


def test_dump_is_canonical():
    text = dumps_surface(l_origami())
    assert list(json.loads(text)) == ["version", "kind", "triangles", "holonomies", "gluings"]
    assert text.endswith("\n") and "\r" not in text


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["gluings"].pop(), "not glued"),
    (lambda d: d["holonomies"].update(c=[-1, -1.5]), "does not close"),
    (lambda d: d["holonomies"].pop("a"), "missing vector"),
    (lambda d: d["gluings"].append(["a", "b", 1]), "more than once"),
    (lambda d: d["gluings"][0].__setitem__(2, 2), "sign"),
    (lambda d: d.pop("kind"), "missing field"),
])
def test_malformed_documents(mutate, message):
    doc = torus_doc()
    mutate(doc)
    with pytest.raises(SurfaceError, match=message):
        surface_from_dict(doc)


def test_gluing_mismatch_detected():
    doc = torus_doc()
    doc["gluings"] = [["a", "b", 1], ["e", "f", 1], ["c", "d", 1]]
    with pytest.raises(SurfaceError):
        surface_from_dict(doc)


def test_negative_area_rejected():
    doc = torus_doc()
    doc["holonomies"] = {"a": [1, 0], "b": [0, -1], "c": [-1, 1],
                         "d": [1, -1], "e": [-1, 0], "f": [0, 1]}
    with pytest.raises(SurfaceError, match="area"):
        surface_from_dict(doc)


def test_abelian_rejects_half_translation_gluing():
    with pytest.raises(SurfaceError):
        glue_squares(1, [((0, 0), (0, 0)), ((0, 1), (0, 3))], ABELIAN)


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "kind": "abelian",\n oops\n}\n')
    with pytest.raises(SurfaceError, match="line 3"):
        load_surface(p)


def test_pillowcase_quadratic():
    # a circumference-2 cylinder with both boundary circles folded: the pillowcase
    pairs = [((0, 1), (1, 3)), ((1, 1), (0, 3)), ((0, 2), (1, 2)), ((0, 0), (1, 0))]
    s = glue_squares(2, pairs, QUADRATIC)
    assert s.genus == 0
    assert sorted(round(a / math.pi) for a in s.vertex_angles) == [1, 1, 1, 1]


def test_random_quadratic_gauss_bonnet(rng):
    for _ in range(10):
        s = random_quadratic(rng)
        orders = [round(a / math.pi) - 2 for a in s.vertex_angles]
        assert sum(orders) == 4 * s.genus - 4


def test_flow_scales_holonomy_and_keeps_area():
    s = l_origami()
    f = geodesic_flow(s, 0.7)
    assert np.allclose(f.hol[:, 0], s.hol[:, 0] * math.exp(0.7))
    assert np.allclose(f.hol[:, 1], s.hol[:, 1] * math.exp(-0.7))
    assert f.area() == pytest.approx(s.area())
    assert geodesic_flow(s, 0) is s


def test_flow_group_law():
    s = l_origami()
    a = geodesic_flow(geodesic_flow(s, 0.3), 0.4)
    b = geodesic_flow(s, 0.7)
    assert np.allclose(a.hol, b.hol)


def test_rotation_preserves_lengths():
    s = l_origami()
    r = rotate(s, 0.3)
    assert np.allclose(r.edge_lengths(), s.edge_lengths())


@given(st.integers(0, 10 ** 6), st.floats(-2, 2))
def test_random_surfaces_valid_under_flow(seed, t):
    s = random_genus2(np.random.default_rng(seed))
    assert s.area() == pytest.approx(1.0)
    f = geodesic_flow(s, t)
    assert f.area() == pytest.approx(1.0)
    assert f.genus == 2


def test_perturb_keeps_combinatorics(rng):
    s = l_origami()
    p = perturb(s, rng, 0.2)
    assert np.array_equal(p.partner, s.partner)
    assert not np.allclose(p.hol, s.hol)


def test_origami_rejects_non_permutation():
    with pytest.raises(SurfaceError):
        origami([0, 0], [0, 1])


def test_apply_matrix_rejects_orientation_reversal():
    with pytest.raises(SurfaceError):
        unit_torus().apply_matrix([[1, 0], [0, -1]])


def test_from_arrays_partner_involution():
    s = unit_torus()
    bad = s.partner.copy()
    bad[0], bad[1] = bad[1], bad[0]
    with pytest.raises(SurfaceError):
        from_arrays(s.hol, bad)


def test_to_dict_contains_every_half_edge():
    d = surface_to_dict(l_origami())
    assert len(d["holonomies"]) == 18
    assert len(d["gluings"]) == 9
