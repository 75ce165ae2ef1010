import math

import numpy as np
import pytest

from teichcount.cover import orientation_double_cover
from teichcount.generators import random_quadratic
from teichcount.surface import ABELIAN, QUADRATIC, glue_squares, l_origami


def test_random_quadratic_cover(rng):
    for _ in range(5):
        q = random_quadratic(rng)
        cov = orientation_double_cover(q)
        assert cov.connected
        up = cov.surface
        assert up.kind == ABELIAN
        assert up.area() == pytest.approx(2 * q.area())
        # odd-angle points lift to one point with double angle, even ones to two points
        odd = sum(1 for a in q.vertex_angles if round(a / math.pi) % 2)
        assert up.n_vertices == odd + 2 * (q.n_vertices - odd)
        assert up.genus == 2 * q.genus - 1 + odd // 2


def test_involution_negates_holonomy(rng):
    q = random_quadratic(rng)
    cov = orientation_double_cover(q)
    inv = cov.involution
    assert np.array_equal(inv[inv], np.arange(len(inv)))
    assert np.allclose(cov.surface.hol[inv], -cov.surface.hol)


def test_translation_surface_gives_two_sheets():
    s = l_origami()
    q = type(s)(s.hol.copy(), s.partner.copy(), s.sign.copy(), QUADRATIC)
    cov = orientation_double_cover(q)
    assert not cov.connected
    assert len(cov.surfaces) == 2
    with pytest.raises(ValueError):
        cov.surface


def test_pillowcase_cover_is_torus():
    pairs = [((0, 1), (1, 3)), ((1, 1), (0, 3)), ((0, 2), (1, 2)), ((0, 0), (1, 0))]
    cov = orientation_double_cover(glue_squares(2, pairs, QUADRATIC))
    assert cov.connected and cov.surface.genus == 1
