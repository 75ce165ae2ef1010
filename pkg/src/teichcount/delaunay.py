"""Delaunay triangulations by edge flips, the sqrt(2)-systole edge lemma,
period coordinates and the Euclidean distance between nearby surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import homology as hom
from .cover import orientation_double_cover
from .saddle import edge_keys, enumerate_saddle_connections, systole
from .surface import ABELIAN, FlatSurface, SurfaceError, cross, nxt, prv

INCIRCLE_TOL = 1e-10
MAX_FLIPS = 10 ** 6


class DelaunayError(RuntimeError):
    pass


def incircle(s: FlatSurface, h: int) -> float:
    """Normalised incircle determinant of the quad around edge h.

    Positive when the far vertex of the neighbouring triangle lies strictly
    inside the circumcircle of the triangle of h.
    """
    hol = s.hol
    Q = hol[h]
    R = -hol[prv(h)]
    p = int(s.partner[h])
    S = s.sign[h] * hol[nxt(p)]
    return _incircle(Q, R, S)


def _incircle(Q, R, S) -> float:
    rows = []
    for X in (np.zeros(2), Q, R):
        D = X - S
        rows.append((D[0], D[1], D[0] * D[0] + D[1] * D[1]))
    scale = max(math.hypot(*Q), math.hypot(*R), math.hypot(*S), math.hypot(*(Q - S)),
                math.hypot(*(R - S))) ** 4
    return float(np.linalg.det(np.array(rows))) / scale


def is_delaunay(s: FlatSurface, tol: float = INCIRCLE_TOL) -> bool:
    return all(incircle(s, h) <= tol for h in s.edges)


def circumradius_sq_sum(hol: np.ndarray) -> float:
    u = hol[0::3]
    v = -hol[2::3]
    w = u - v
    a2 = (u * u).sum(1)
    b2 = (v * v).sum(1)
    c2 = (w * w).sum(1)
    ar = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    return float((a2 * b2 * c2 / (16 * ar * ar)).sum())


class _Mutable:
    def __init__(self, s: FlatSurface):
        self.hol = s.hol.copy()
        self.partner = s.partner.copy()
        self.sign = s.sign.copy()
        self.kind = s.kind

    def view(self):
        return FlatSurface(self.hol.copy(), self.partner.copy(), self.sign.copy(), self.kind)

    def incircle(self, h):
        hol = self.hol
        Q = hol[h]
        R = -hol[prv(h)]
        S = self.sign[h] * hol[nxt(int(self.partner[h]))]
        return _incircle(Q, R, S)

    def flip(self, h):
        """Flip the edge of half-edge h; returns the four outer half-edges."""
        hol, partner, sign = self.hol, self.partner, self.sign
        hp = int(partner[h])
        sg = int(sign[h])
        k, k2 = h // 3, hp // 3
        a, b = nxt(h), prv(h)
        c, d = nxt(hp), prv(hp)
        va, vb = hol[a].copy(), hol[b].copy()
        vc, vd = sg * hol[c], sg * hol[d]
        g = -(vb + vc)
        old = {a: 1, b: 1, c: sg, d: sg}
        new_id = {b: 3 * k, c: 3 * k + 1, d: 3 * k2, a: 3 * k2 + 1}
        new_vec = {b: vb, c: vc, d: vd, a: va}
        ext = {x: (int(partner[x]), int(sign[x])) for x in (a, b, c, d)}
        for x in (a, b, c, d):
            hol[new_id[x]] = new_vec[x]
        hol[3 * k + 2] = g
        hol[3 * k2 + 2] = -g
        partner[3 * k + 2], partner[3 * k2 + 2] = 3 * k2 + 2, 3 * k + 2
        sign[3 * k + 2] = sign[3 * k2 + 2] = 1
        for x in (a, b, c, d):
            px, sx = ext[x]
            nx = new_id[x]
            if px in new_id:
                partner[nx] = new_id[px]
                sign[nx] = sx * old[x] * old[px]
            else:
                partner[nx] = px
                partner[px] = nx
                sign[nx] = sign[px] = sx * old[x]
        for kk in (k, k2):
            t = hol[3 * kk:3 * kk + 3]
            if cross(t[0], t[1]) <= 0:
                raise DelaunayError("flip produced a degenerate triangle")
        return [3 * k, 3 * k + 1, 3 * k2, 3 * k2 + 1]


@dataclass(frozen=True)
class DelaunayStats:
    flips: int
    certificate: tuple          # sum of squared circumradii after each flip
    monotone: bool


def delaunayize(s: FlatSurface, tol: float = INCIRCLE_TOL, with_stats: bool = False):
    """Flip non-Delaunay edges until every edge passes the incircle test.

    Cocircular quads (normalised determinant within tol of 0) are left alone.
    """
    m = _Mutable(s)
    queue = list(range(s.n_half_edges))
    inq = set(queue)
    flips = 0
    cert = [circumradius_sq_sum(m.hol)]
    while queue:
        h = queue.pop()
        inq.discard(h)
        if m.incircle(h) > tol:
            outer = m.flip(h)
            flips += 1
            if flips > MAX_FLIPS:
                raise DelaunayError(f"aborted after {MAX_FLIPS} flips (last certificate {cert[-1]:.6g})")
            cert.append(circumradius_sq_sum(m.hol))
            for x in outer:
                for y in (x, int(m.partner[x])):
                    if y not in inq:
                        queue.append(y)
                        inq.add(y)
    out = m.view()
    out = FlatSurface(out.hol, out.partner, out.sign, s.kind, None, dict(s.meta))
    out.meta.pop("squares", None)
    if not flips:
        out = s
    c = np.array(cert)
    stats = DelaunayStats(flips, tuple(cert), bool(np.all(np.diff(c) <= 1e-9 * c[:-1])))
    return (out, stats) if with_stats else out


# ---------------------------------------------------------- lemma check
@dataclass(frozen=True)
class LemmaReport:
    systole: float
    threshold: float
    connections: tuple          # (length, is_edge, on_threshold)
    passed: bool

    @property
    def violations(self) -> int:
        return sum(1 for _, e, tie in self.connections if not e and not tie)

    def as_dict(self):
        return {"systole": self.systole, "threshold": self.threshold,
                "connections": [{"length": l, "is_edge": e, "on_threshold": tie}
                                for l, e, tie in self.connections],
                "pass": self.passed}


def check_delaunay_lemma(s: FlatSurface, tol: float = 1e-9) -> LemmaReport:
    """Every saddle connection shorter than sqrt(2) * systole must be an edge.

    Connections whose length equals the threshold within ``tol`` are listed
    with ``on_threshold`` set; a non-edge is possible there (cocircular
    quads, e.g. the second diagonal of a unit square) and is not a violation.
    """
    ell = systole(s)
    thr = math.sqrt(2) * ell
    scs = enumerate_saddle_connections(s, thr + tol)
    ek = edge_keys(s)
    conns = tuple((sc.length, sc.key in ek, abs(sc.length - thr) <= tol) for sc in scs)
    return LemmaReport(ell, thr, conns, all(e or tie for _, e, tie in conns))


# ------------------------------------------------------ period coordinates
@dataclass(frozen=True)
class PeriodVector:
    basis: tuple
    periods: np.ndarray         # (n, 2)
    combinatorics: int
    odd: bool

    def flat(self) -> np.ndarray:
        return self.periods.reshape(-1)


def period_basis(s: FlatSurface):
    """(surface carrying the periods, basis) for abelian or quadratic s."""
    if s.kind == ABELIAN:
        return s, tuple(hom.homology_basis(s)), False
    cov = orientation_double_cover(s)
    if not cov.connected:
        raise SurfaceError("quadratic surface with trivial holonomy: use its abelian form")
    up = cov.surface
    return up, tuple(hom.odd_basis(up, cov.involution, s.genus)), True


def period_coordinates(s: FlatSurface, basis=None) -> PeriodVector:
    surf, default, odd = period_basis(s)
    basis = tuple(default if basis is None else basis)
    per = np.array([hom.period(surf, c) for c in basis])
    return PeriodVector(basis, per, hom.fingerprint(s), odd)


def euclidean_distance(s1: FlatSurface, s2: FlatSurface) -> float:
    if s1.kind != s2.kind or hom.fingerprint(s1) != hom.fingerprint(s2):
        raise SurfaceError("surfaces have different triangulation combinatorics; "
                           "pass intermediate points that share a triangulation")
    p1 = period_coordinates(s1)
    p2 = period_coordinates(s2)
    return float(np.linalg.norm(p1.flat() - p2.flat()))
