"""Orientation double cover of a half-translation surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import ABELIAN, FlatSurface, from_arrays


@dataclass(frozen=True)
class DoubleCover:
    connected: bool
    surfaces: tuple                 # one surface if connected, else the two sheets
    involution: np.ndarray          # half-edge map of the deck involution (connected case)
    sheet: np.ndarray               # for every cover half-edge: (base half-edge, +-1)

    @property
    def surface(self) -> FlatSurface:
        if not self.connected:
            raise ValueError("the double cover is disconnected; use .surfaces")
        return self.surfaces[0]


def orientation_double_cover(s: FlatSurface) -> DoubleCover:
    """Cover half-edge ``h + 3F*j`` is the lift of ``h`` to sheet ``(+1, -1)[j]``.

    The lift of triangle k to sheet e carries holonomy e * hol, and half-edge
    (h, e) is glued to (partner h, e * sign h) by a translation.
    """
    n = s.n_half_edges
    hol = np.vstack([s.hol, -s.hol])
    partner = np.empty(2 * n, dtype=int)
    for j, e in enumerate((1, -1)):
        for h in range(n):
            e2 = e * int(s.sign[h])
            partner[h + j * n] = int(s.partner[h]) + (0 if e2 == 1 else n)
    inv = np.concatenate([np.arange(n) + n, np.arange(n)])
    sheet = np.array([(h % n, 1 if h < n else -1) for h in range(2 * n)])
    # connectivity of the cover
    F = 2 * s.n_triangles
    seen = {0}
    stack = [0]
    while stack:
        k = stack.pop()
        for h in range(3 * k, 3 * k + 3):
            k2 = int(partner[h]) // 3
            if k2 not in seen:
                seen.add(k2)
                stack.append(k2)
    if len(seen) == F:
        cov = from_arrays(hol, partner, None, ABELIAN, meta={"double_cover": True})
        return DoubleCover(True, (cov,), inv, sheet)
    comps = []
    for start in (0, s.n_triangles):
        comp = sorted(_component(partner, start))
        comps.append(comp)
    sheets = []
    for comp in comps:
        hs = [3 * k + i for k in comp for i in range(3)]
        idx = {h: i for i, h in enumerate(hs)}
        sheets.append(from_arrays(hol[hs], [idx[int(partner[h])] for h in hs], None, ABELIAN))
    return DoubleCover(False, tuple(sheets), inv, sheet)


def _component(partner, start):
    seen = {start}
    stack = [start]
    while stack:
        k = stack.pop()
        for h in range(3 * k, 3 * k + 3):
            k2 = int(partner[h]) // 3
            if k2 not in seen:
                seen.add(k2)
                stack.append(k2)
    return seen
