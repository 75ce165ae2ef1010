"""Saddle connections, systole, cylinders and straight-line tracing.

Enumeration unfolds triangles from every corner inside a visibility wedge.
Each time a developed vertex is met strictly inside the wedge it is recorded
(if close enough) and the wedge is split there, since nothing behind a vertex
is visible.  Branches whose crossed edge lies farther than L from the start
are pruned, which makes the search complete at fixed L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .surface import FlatSurface, SurfaceError, ccw_angle, cross, nxt, prv

LENGTH_TOL = 1e-9
POS_TOL = 1e-9


@dataclass(frozen=True)
class SaddleConnection:
    start_vertex: int
    end_vertex: int
    holonomy: tuple
    length: float
    start_corner: int
    end_corner: int
    crossings: tuple
    start_position: float
    end_position: float
    key: tuple

    @property
    def is_edge(self) -> bool:
        return self.key[0] == "e"

    @property
    def angle(self) -> float:
        return math.atan2(self.holonomy[1], self.holonomy[0]) % math.pi


def _dist_origin_segment(a, b) -> float:
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0 else min(1.0, max(0.0, -float(a @ d) / dd))
    p = a + t * d
    return math.hypot(p[0], p[1])


def _canonical(s: FlatSurface, c: int, crossings: tuple, e: int) -> tuple:
    fwd = (c, crossings, e)
    rev = (e, tuple(int(s.partner[g]) for g in reversed(crossings)), c)
    return ("s",) + min(fwd, rev)


def oriented_connections(s: FlatSurface, L: float, corners=None) -> list:
    """All oriented saddle connections of length <= L leaving the given corners."""
    out = []
    lim = L + LENGTH_TOL
    off = s.corner_offsets
    hol = s.hol
    cv = s.corner_vertex
    if corners is None:
        corners = range(s.n_half_edges)
    for c in corners:
        c = int(c)
        v0 = int(cv[c])
        ln = float(np.hypot(*hol[c]))
        if ln <= lim:
            p = int(s.partner[c])
            out.append(SaddleConnection(v0, int(cv[p]), (float(hol[c][0]), float(hol[c][1])), ln,
                                        c, p, (), float(off[c]), float(off[p]),
                                        ("e", min(c, p))))
        P1 = hol[c].copy()
        P2 = -hol[prv(c)]
        stack = [(nxt(c), P1, P2, P1, P2, 1, ())]
        while stack:
            g, A, B, wr, wl, f, path = stack.pop()
            if _dist_origin_segment(A, B) > lim:
                continue
            g2 = int(s.partner[g])
            f2 = f * int(s.sign[g])
            C = A + f2 * hol[nxt(g2)]
            path2 = path + (g,)
            nc = math.hypot(C[0], C[1])
            eps_r = 1e-12 * math.hypot(*wr) * nc
            eps_l = 1e-12 * math.hypot(*wl) * nc
            right_of = cross(wr, C) <= eps_r      # C not strictly left of wr
            left_of = cross(C, wl) <= eps_l       # C not strictly right of wl
            if right_of:
                stack.append((prv(g2), C, B, wr, wl, f2, path2))
            elif left_of:
                stack.append((nxt(g2), A, C, wr, wl, f2, path2))
            else:
                if nc <= lim:
                    e = prv(g2)
                    back = -f2 * C
                    out.append(SaddleConnection(
                        v0, int(cv[e]), (float(C[0]), float(C[1])), nc, c, e, path2,
                        float(off[c] + ccw_angle(hol[c], C)),
                        float(off[e] + ccw_angle(hol[e], back)),
                        _canonical(s, c, path2, e)))
                stack.append((prv(g2), C, B, C, wl, f2, path2))
                stack.append((nxt(g2), A, C, wr, C, f2, path2))
    return out


def enumerate_saddle_connections(s: FlatSurface, L: float) -> list:
    """Every unoriented saddle connection of length <= L, sorted by (length, angle)."""
    if L <= 0:
        raise ValueError("L must be positive")
    best = {}
    for sc in oriented_connections(s, L):
        cur = best.get(sc.key)
        if cur is None or (sc.start_corner, sc.crossings) < (cur.start_corner, cur.crossings):
            best[sc.key] = sc
    return sorted(best.values(), key=lambda x: (round(x.length, 12), round(x.angle, 12), x.key))


def systole(s: FlatSurface) -> float:
    scs = oriented_connections(s, s.shortest_edge())
    return min(sc.length for sc in scs)


def edge_keys(s: FlatSurface) -> set:
    return {("e", h) for h in s.edges}


# --------------------------------------------------------------- positions
def _wrap(s: FlatSurface, v: int, pos: float) -> float:
    base = float(s.vertex_base[v])
    tot = float(s.vertex_angles[v])
    x = (pos - base) % tot
    if tot - x < POS_TOL:
        x = 0.0
    return base + x


def _pos_close(s: FlatSurface, v: int, a: float, b: float) -> bool:
    tot = float(s.vertex_angles[v])
    d = (a - b) % tot
    return min(d, tot - d) < POS_TOL


def corner_at(s: FlatSurface, v: int, pos: float) -> tuple:
    """Corner of vertex v containing angular position pos and the offset into it."""
    pos = _wrap(s, v, pos)
    for c in s.vertex_corners[v]:
        rel = pos - float(s.corner_offsets[c])
        if -POS_TOL <= rel < float(s.corner_angles[c]) - POS_TOL:
            return c, max(rel, 0.0)
    # pos sits within tolerance of the end of the last corner
    c = s.vertex_corners[v][0]
    return c, 0.0


# ----------------------------------------------------------------- tracing
@dataclass(frozen=True)
class Trace:
    end_vertex: int
    end_position: float
    pieces: tuple          # (triangle, local vector) per traversed triangle


def trace_segment(s: FlatSurface, v: int, pos: float, length: float) -> Trace:
    """Follow the straight segment leaving vertex v at angular position pos.

    The segment must end exactly at a vertex and meet no vertex before that,
    otherwise SurfaceError is raised.
    """
    tol = 1e-8 * max(1.0, length)
    c, rel = corner_at(s, v, pos)
    hol = s.hol
    k = c // 3
    h0 = hol[c]
    ca, sa = math.cos(rel), math.sin(rel)
    d = np.array([ca * h0[0] - sa * h0[1], ca * h0[1] + sa * h0[0]])
    d /= math.hypot(*d)
    w = length * d
    if rel < POS_TOL:
        if abs(length - math.hypot(*h0)) < tol:
            p = int(s.partner[c])
            return Trace(int(s.corner_vertex[p]), float(s.corner_offsets[p]), ((k, h0.copy()),))
        raise SurfaceError("segment runs along an edge but does not end at its endpoint")
    A = h0.copy()
    B = -hol[prv(c)]
    g = nxt(c)
    f = 1
    prev_pt = np.zeros(2)
    pieces = []
    for _ in range(100000):
        # exit point of the ray through segment AB
        den = cross(d, B - A)
        tpar = cross(A, B - A) / den
        X = tpar * d
        if length < tpar - tol:
            raise SurfaceError("segment ends in the interior of a triangle, not at a vertex")
        if abs(length - tpar) <= tol:
            raise SurfaceError("segment ends in the interior of an edge, not at a vertex")
        pieces.append((k, f * (X - prev_pt)))
        prev_pt = X
        g2 = int(s.partner[g])
        f2 = f * int(s.sign[g])
        C = A + f2 * hol[nxt(g2)]
        k = g2 // 3
        side = cross(d, C)
        nc = math.hypot(*C)
        if abs(side) <= 1e-10 * nc:
            if abs(nc - length) <= tol:
                pieces.append((k, f2 * (C - prev_pt)))
                e = prv(g2)
                back = -f2 * C
                return Trace(int(s.corner_vertex[e]),
                             float(s.corner_offsets[e] + ccw_angle(hol[e], back)), tuple(pieces))
            if nc < length:
                raise SurfaceError("segment passes through a vertex")
            raise SurfaceError("segment ends in the interior of a triangle, not at a vertex")
        if side > 0:
            g, B = nxt(g2), C
        else:
            g, A = prv(g2), C
        f = f2
    raise SurfaceError("segment tracing did not terminate")


# --------------------------------------------------------------- cylinders
@dataclass(frozen=True)
class CylinderRecord:
    core_holonomy: tuple
    circumference: float
    height: float
    bottom: tuple      # oriented saddle connections, cylinder on their left
    top: tuple

    @property
    def area(self) -> float:
        return self.circumference * self.height

    @property
    def modulus(self) -> float:
        return self.height / self.circumference


def _port_index(scs) -> dict:
    ports = {}
    for sc in scs:
        ports.setdefault(sc.start_vertex, []).append(sc)
    return ports


def _find_port(s, ports, v, pos):
    for sc in ports.get(v, ()):
        if _pos_close(s, v, sc.start_position, pos):
            return sc
    return None


def _chain(s, ports, first, limit, max_len):
    chain = [first]
    total = first.length
    cur = first
    while True:
        v = cur.end_vertex
        nxt_sc = _find_port(s, ports, v, cur.end_position - math.pi)
        if nxt_sc is None:
            return None
        if nxt_sc.start_vertex == first.start_vertex and _pos_close(
                s, v, nxt_sc.start_position, first.start_position):
            return chain, total
        total += nxt_sc.length
        if total > limit + LENGTH_TOL or len(chain) > max_len:
            return None
        chain.append(nxt_sc)
        cur = nxt_sc


def _chain_id(chain) -> tuple:
    ids = [(sc.start_vertex, round(sc.start_position, 7)) for sc in chain]
    return min(tuple(ids[i:] + ids[:i]) for i in range(len(ids)))


def detect_cylinders(s: FlatSurface, L: float) -> list:
    """Maximal flat cylinders whose core curve has length <= L."""
    scs = oriented_connections(s, L)
    ports = _port_index(scs)
    A = s.area()
    found = {}
    seen_bottoms = set()
    for sc in sorted(scs, key=lambda x: (x.start_vertex, x.start_position)):
        res = _chain(s, ports, sc, L, len(scs))
        if res is None:
            continue
        chain, circ = res
        cid = _chain_id(chain)
        if cid in seen_bottoms:
            continue
        seen_bottoms.add(cid)
        rh = math.sqrt((A / circ) ** 2 + circ * circ / 4) + LENGTH_TOL
        corners = set()
        for x in chain:
            corners.update(s.vertex_corners[x.start_vertex])
        cand = oriented_connections(s, rh, sorted(corners))
        best = None
        for x in chain:
            v = x.start_vertex
            tot = float(s.vertex_angles[v])
            for y in cand:
                if y.start_vertex != v:
                    continue
                a = (y.start_position - x.start_position) % tot
                if POS_TOL < a < math.pi - POS_TOL:
                    hgt = y.length * math.sin(a)
                    if best is None or hgt < best[0] - 1e-12:
                        best = (hgt, y, a)
        if best is None:
            continue
        hgt, y, a = best
        if hgt <= LENGTH_TOL:
            continue
        top_first = _find_port(s, ports, y.end_vertex, y.end_position - a)
        if top_first is None:
            continue
        r2 = _chain(s, ports, top_first, L, len(scs))
        if r2 is None:
            continue
        top = tuple(r2[0])
        key = frozenset([cid, _chain_id(top)])
        if key in found:
            continue
        u = np.array(chain[0].holonomy) / chain[0].length
        found[key] = CylinderRecord((float(u[0] * circ), float(u[1] * circ)), circ, hgt,
                                    tuple(chain), top)
    return sorted(found.values(), key=lambda c: (round(c.circumference, 9),
                                                  round(math.atan2(c.core_holonomy[1], c.core_holonomy[0]) % math.pi, 9)))
