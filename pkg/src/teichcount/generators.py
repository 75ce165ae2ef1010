"""Random surfaces for property tests and sweeps."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import null_space

from .surface import (ABELIAN, QUADRATIC, FlatSurface, SurfaceError, builtin_origami, glue_squares,
                      validate_surface)


def deformation_space(s: FlatSurface) -> np.ndarray:
    """Basis (columns) of per-half-edge increments that keep closure and gluings."""
    n = s.n_half_edges
    rows = []
    for k in range(s.n_triangles):
        r = np.zeros(n)
        r[3 * k:3 * k + 3] = 1
        rows.append(r)
    for h in s.edges:
        r = np.zeros(n)
        r[int(s.partner[h])] = 1
        r[h] = s.sign[h]
        rows.append(r)
    return null_space(np.array(rows))


def perturb(s: FlatSurface, rng: np.random.Generator, scale: float = 0.25,
            tries: int = 30) -> FlatSurface:
    """Random period perturbation inside the same combinatorial chart."""
    basis = deformation_space(s)
    min_area = float(s.triangle_areas().min())
    for _ in range(tries):
        coef = rng.normal(size=(basis.shape[1], 2))
        inc = basis @ coef
        inc *= scale / max(1e-300, float(np.abs(inc).max()))
        hol = s.hol + inc
        cand = FlatSurface(hol, s.partner.copy(), s.sign.copy(), s.kind, s.labels, dict(s.meta))
        if float(cand.triangle_areas().min()) > 0.2 * min_area:
            try:
                return validate_surface(cand)
            except SurfaceError:
                pass
        scale *= 0.5
    return s


def random_sl2(rng: np.random.Generator, spread: float = 0.6) -> np.ndarray:
    a = rng.uniform(0, 2 * math.pi)
    b = rng.uniform(0, 2 * math.pi)
    t = rng.uniform(-spread, spread)
    ra = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    rb = np.array([[math.cos(b), -math.sin(b)], [math.sin(b), math.cos(b)]])
    return ra @ np.diag([math.exp(t), math.exp(-t)]) @ rb


def random_genus2(rng: np.random.Generator, scale: float = 0.3) -> FlatSurface:
    """Random genus-2 translation surface near a 3- or 4-square origami."""
    name = ("L3", "H11")[int(rng.integers(2))]
    s = perturb(builtin_origami(name), rng, scale)
    s = s.apply_matrix(random_sl2(rng))
    area = s.area()
    return s.with_holonomy(s.hol / math.sqrt(area))


def random_square_gluing(rng: np.random.Generator, n: int) -> FlatSurface | None:
    """Random half-translation square gluing; None when the pairing is not connected."""
    horiz = [(i, 0) for i in range(n)] + [(i, 2) for i in range(n)]
    vert = [(i, 1) for i in range(n)] + [(i, 3) for i in range(n)]
    pairs = []
    for sides in (horiz, vert):
        idx = rng.permutation(len(sides))
        pairs += [(sides[idx[2 * j]], sides[idx[2 * j + 1]]) for j in range(len(sides) // 2)]
    try:
        return glue_squares(n, pairs, QUADRATIC)
    except SurfaceError:
        return None


def random_quadratic(rng: np.random.Generator, genus: int = 2, max_squares: int = 8,
                     nontrivial: bool = True) -> FlatSurface:
    """Random half-translation surface of the given genus built from squares."""
    for _ in range(100000):
        n = int(rng.integers(2, max_squares + 1))
        s = random_square_gluing(rng, n)
        if s is None or s.genus != genus:
            continue
        if nontrivial and np.all(s.sign == 1):
            continue
        if nontrivial and not _has_odd_cycle(s):
            continue
        return s
    raise RuntimeError("no surface found")


def _has_odd_cycle(s: FlatSurface) -> bool:
    from .cover import orientation_double_cover
    return orientation_double_cover(s).connected


def random_surface(rng: np.random.Generator) -> FlatSurface:
    """Mixed random valid surface (genus 1..3, either kind)."""
    r = rng.random()
    if r < 0.5:
        return random_genus2(rng)
    if r < 0.7:
        return perturb(builtin_origami("torus"), rng, 0.2).apply_matrix(random_sl2(rng))
    s = random_quadratic(rng, genus=int(rng.integers(0, 3)), max_squares=6, nontrivial=False)
    return perturb(s, rng, 0.2)


__all__ = ["perturb", "random_genus2", "random_quadratic", "random_surface", "random_sl2",
           "deformation_space", "ABELIAN"]
