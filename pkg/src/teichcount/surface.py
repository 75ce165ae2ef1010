"""Triangulated flat surfaces (translation and half-translation).

A surface with F triangles has 3F half-edges.  Triangle ``k`` owns half-edges
``3k, 3k+1, 3k+2`` listed counter-clockwise; the holonomy of every half-edge
is stored in the frame of its own triangle.  ``partner[h]`` is the half-edge
glued to ``h`` and ``sign[h]`` records the gluing: ``hol[partner[h]] ==
-sign[h] * hol[h]``, so ``+1`` is a translation gluing and ``-1`` a
half-translation gluing (translation composed with ``v -> -v``).

The corner of a triangle at the origin of half-edge ``h`` is identified with
``h`` itself.  Vertices are equivalence classes of corners.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

ABELIAN = "abelian"
QUADRATIC = "quadratic"
FORMAT_VERSION = 1

CLOSURE_TOL = 1e-9
ANGLE_TOL = 1e-6


class SurfaceError(ValueError):
    """Raised for malformed or geometrically invalid surface data."""


def nxt(h: int) -> int:
    return 3 * (h // 3) + (h + 1) % 3


def prv(h: int) -> int:
    return 3 * (h // 3) + (h + 2) % 3


def cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def ccw_angle(u, v) -> float:
    """Counter-clockwise angle from u to v in [0, 2*pi)."""
    a = math.atan2(cross(u, v), float(u[0] * v[0] + u[1] * v[1]))
    return a if a >= 0 else a + 2 * math.pi


@dataclass(frozen=True, eq=False)
class FlatSurface:
    hol: np.ndarray
    partner: np.ndarray
    sign: np.ndarray
    kind: str = ABELIAN
    labels: tuple | None = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for name in ("hol", "partner", "sign"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    # ----------------------------------------------------------- combinatorics
    @property
    def n_half_edges(self) -> int:
        return len(self.partner)

    @property
    def n_triangles(self) -> int:
        return len(self.partner) // 3

    @cached_property
    def edges(self) -> tuple:
        """Representative half-edge (the smaller id) of every edge."""
        return tuple(h for h in range(self.n_half_edges) if h < self.partner[h])

    @cached_property
    def _vertex_data(self):
        n = self.n_half_edges
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for h in range(n):
            a, b = find(int(self.partner[h])), find(nxt(h))
            if a != b:
                parent[max(a, b)] = min(a, b)
        roots = sorted({find(h) for h in range(n)})
        index = {r: i for i, r in enumerate(roots)}
        corner_vertex = np.array([index[find(h)] for h in range(n)], dtype=int)
        # ccw ordering of corners around each vertex: c -> partner[prev(c)]
        order = []
        for r in roots:
            start = r
            seq = [start]
            c = int(self.partner[prv(start)])
            while c != start:
                seq.append(c)
                c = int(self.partner[prv(c)])
            order.append(tuple(seq))
        return corner_vertex, tuple(order)

    @property
    def corner_vertex(self) -> np.ndarray:
        return self._vertex_data[0]

    @property
    def vertex_corners(self) -> tuple:
        return self._vertex_data[1]

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_corners)

    @cached_property
    def corner_angles(self) -> np.ndarray:
        out = np.empty(self.n_half_edges)
        for h in range(self.n_half_edges):
            out[h] = ccw_angle(self.hol[h], -self.hol[prv(h)])
        return out

    @cached_property
    def corner_offsets(self) -> np.ndarray:
        """Angular position of each corner's first edge at its vertex.

        Positions at a vertex run over [base, base + cone angle).  For
        translation surfaces the base is the direction angle of the first
        corner, so positions agree with direction angles modulo 2*pi.
        """
        off = np.empty(self.n_half_edges)
        for seq in self.vertex_corners:
            c0 = seq[0]
            base = 0.0
            if self.kind == ABELIAN:
                base = math.atan2(self.hol[c0][1], self.hol[c0][0]) % (2 * math.pi)
            acc = base
            for c in seq:
                off[c] = acc
                acc += self.corner_angles[c]
        return off

    @cached_property
    def vertex_angles(self) -> np.ndarray:
        return np.array([sum(self.corner_angles[c] for c in seq) for seq in self.vertex_corners])

    @cached_property
    def vertex_base(self) -> np.ndarray:
        return np.array([self.corner_offsets[seq[0]] for seq in self.vertex_corners])

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + self.n_triangles

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @cached_property
    def cone_points(self) -> tuple:
        """(vertex, angle / pi) for every vertex whose angle differs from 2*pi."""
        out = []
        for v, a in enumerate(self.vertex_angles):
            k = int(round(a / math.pi))
            if k != 2:
                out.append((v, k))
        return tuple(out)

    @cached_property
    def marked_points(self) -> tuple:
        return tuple(v for v, a in enumerate(self.vertex_angles) if int(round(a / math.pi)) == 2)

    # ------------------------------------------------------------- geometry
    def triangle_areas(self) -> np.ndarray:
        a = self.hol[0::3]
        b = self.hol[1::3]
        return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])

    def area(self) -> float:
        return float(self.triangle_areas().sum())

    def edge_lengths(self) -> np.ndarray:
        return np.hypot(self.hol[:, 0], self.hol[:, 1])

    def shortest_edge(self) -> float:
        return float(self.edge_lengths().min())

    def apply_matrix(self, M) -> "FlatSurface":
        M = np.asarray(M, dtype=float)
        if np.linalg.det(M) <= 0:
            raise SurfaceError("linear map must preserve orientation")
        return self.with_holonomy(self.hol @ M.T)

    def with_holonomy(self, hol, validate: bool = True) -> "FlatSurface":
        s = FlatSurface(np.array(hol, dtype=float), self.partner.copy(), self.sign.copy(),
                        self.kind, self.labels, dict(self.meta))
        if validate:
            validate_surface(s)
        return s

    def half_edge_label(self, h: int) -> str:
        return str(self.labels[h]) if self.labels is not None else f"e{h}"


# ---------------------------------------------------------------- validation
def validate_surface(s: FlatSurface) -> FlatSurface:
    n = s.n_half_edges
    if n == 0 or n % 3:
        raise SurfaceError("number of half-edges must be a positive multiple of 3")
    if s.hol.shape != (n, 2) or s.sign.shape != (n,):
        raise SurfaceError("holonomy/sign arrays have the wrong shape")
    if s.kind not in (ABELIAN, QUADRATIC):
        raise SurfaceError(f"unknown kind {s.kind!r}")
    if not np.all(np.isfinite(s.hol)):
        raise SurfaceError("non-finite holonomy")
    p = s.partner
    for h in range(n):
        q = int(p[h])
        if not 0 <= q < n or q == h or int(p[q]) != h:
            raise SurfaceError(f"unmatched gluing at half-edge {s.half_edge_label(h)}")
        if s.sign[h] not in (1, -1) or s.sign[q] != s.sign[h]:
            raise SurfaceError(f"bad gluing sign at half-edge {s.half_edge_label(h)}")
    if s.kind == ABELIAN and np.any(s.sign != 1):
        raise SurfaceError("half-translation gluing in an abelian surface")
    scale = max(1.0, float(np.abs(s.hol).max()))
    tri = s.hol.reshape(-1, 3, 2)
    resid = np.abs(tri.sum(axis=1)).max(axis=1)
    bad = np.nonzero(resid > CLOSURE_TOL * scale)[0]
    if len(bad):
        raise SurfaceError(f"triangle {int(bad[0])} does not close (edges do not sum to 0)")
    for h in range(n):
        q = int(p[h])
        if np.abs(s.hol[q] + s.sign[h] * s.hol[h]).max() > CLOSURE_TOL * scale:
            raise SurfaceError(
                f"glued holonomies disagree on {s.half_edge_label(h)} / {s.half_edge_label(q)}")
    areas = s.triangle_areas()
    bad = np.nonzero(areas <= 1e-14 * scale * scale)[0]
    if len(bad):
        raise SurfaceError(f"triangle {int(bad[0])} has zero or negative area")
    # connectivity
    seen = {0}
    stack = [0]
    while stack:
        k = stack.pop()
        for h in range(3 * k, 3 * k + 3):
            k2 = int(p[h]) // 3
            if k2 not in seen:
                seen.add(k2)
                stack.append(k2)
    if len(seen) != s.n_triangles:
        raise SurfaceError("surface is not connected")
    unit = math.pi if s.kind == QUADRATIC else 2 * math.pi
    orders = []
    for v, a in enumerate(s.vertex_angles):
        k = a / unit
        if abs(k - round(k)) > ANGLE_TOL or round(k) < 1:
            raise SurfaceError(f"vertex {v} has cone angle {a:.9g}, not a positive multiple of {unit:.6g}")
        orders.append(int(round(k)))
    chi = s.euler_characteristic
    if chi % 2:
        raise SurfaceError("odd Euler characteristic")
    g = (2 - chi) // 2
    if s.kind == QUADRATIC:
        total = sum(k - 2 for k in orders)
        if total != 4 * g - 4:
            raise SurfaceError(f"Gauss-Bonnet violated: sum of orders {total} != {4 * g - 4}")
    else:
        total = sum(k - 1 for k in orders)
        if total != 2 * g - 2:
            raise SurfaceError(f"Gauss-Bonnet violated: sum of orders {total} != {2 * g - 2}")
    return s


def from_arrays(hol, partner, sign=None, kind=ABELIAN, labels=None, meta=None) -> FlatSurface:
    hol = np.array(hol, dtype=float)
    partner = np.array(partner, dtype=int)
    sign = np.ones(len(partner), dtype=int) if sign is None else np.array(sign, dtype=int)
    s = FlatSurface(hol, partner, sign, kind, None if labels is None else tuple(labels), dict(meta or {}))
    return validate_surface(s)


def build_surface(triangles: Sequence[Sequence], holonomies: Mapping, gluings: Iterable,
                  kind: str = ABELIAN) -> FlatSurface:
    """Build a surface from labelled triangles.

    ``triangles`` lists triples of half-edge labels in counter-clockwise order,
    ``holonomies`` maps every label to its (x, y) vector and ``gluings`` lists
    ``(label, label, sign)`` triples.
    """
    labels = []
    for t, tri in enumerate(triangles):
        if len(tri) != 3:
            raise SurfaceError(f"triangles[{t}] does not have three edges")
        labels.extend(tri)
    index = {}
    for i, lab in enumerate(labels):
        if lab in index:
            raise SurfaceError(f"edge label {lab!r} used twice")
        index[lab] = i
    hol = np.zeros((len(labels), 2))
    for lab, i in index.items():
        if lab not in holonomies:
            raise SurfaceError(f"holonomies: missing vector for edge {lab!r}")
        v = holonomies[lab]
        if len(v) != 2:
            raise SurfaceError(f"holonomies[{lab!r}] must have two components")
        hol[i] = [float(v[0]), float(v[1])]
    partner = -np.ones(len(labels), dtype=int)
    sign = np.zeros(len(labels), dtype=int)
    for j, gl in enumerate(gluings):
        if len(gl) == 2:
            a, b, sg = gl[0], gl[1], 1
        elif len(gl) == 3:
            a, b, sg = gl
        else:
            raise SurfaceError(f"gluings[{j}] must be [edge, edge, sign]")
        if a not in index or b not in index:
            raise SurfaceError(f"gluings[{j}] refers to an unknown edge")
        ia, ib = index[a], index[b]
        if partner[ia] >= 0 or partner[ib] >= 0:
            raise SurfaceError(f"gluings[{j}]: edge glued more than once")
        if int(sg) not in (1, -1):
            raise SurfaceError(f"gluings[{j}]: sign must be +1 or -1")
        partner[ia], partner[ib] = ib, ia
        sign[ia] = sign[ib] = int(sg)
    unglued = np.nonzero(partner < 0)[0]
    if len(unglued):
        raise SurfaceError(f"unmatched gluing: edge {labels[int(unglued[0])]!r} is not glued")
    return from_arrays(hol, partner, sign, kind, labels)


# ------------------------------------------------------------------ flow etc.
def area(s: FlatSurface) -> float:
    return s.area()


def geodesic_flow(s: FlatSurface, t: float) -> FlatSurface:
    if t == 0:
        return s
    hol = s.hol * np.array([math.exp(t), math.exp(-t)])
    return FlatSurface(hol, s.partner.copy(), s.sign.copy(), s.kind, s.labels, dict(s.meta))


def rotate(s: FlatSurface, theta: float) -> FlatSurface:
    c, si = math.cos(theta), math.sin(theta)
    hol = s.hol @ np.array([[c, -si], [si, c]]).T
    return FlatSurface(hol, s.partner.copy(), s.sign.copy(), s.kind, s.labels, dict(s.meta))


# ------------------------------------------------------------------ origamis
def origami(r: Sequence[int], u: Sequence[int], meta: Mapping | None = None) -> FlatSurface:
    """Square-tiled translation surface from right/up permutations.

    Square i is cut along its lower-left to upper-right diagonal into triangle
    2i (bottom, right, diagonal) and triangle 2i+1 (diagonal, top, left).
    Half-edge ids: bottom 6i, right 6i+1, top 6i+4, left 6i+5.
    """
    n = len(r)
    if sorted(r) != list(range(n)) or sorted(u) != list(range(n)):
        raise SurfaceError("r and u must be permutations of 0..n-1")
    hol = np.zeros((6 * n, 2))
    partner = np.zeros(6 * n, dtype=int)
    uinv = [0] * n
    for i in range(n):
        uinv[u[i]] = i
    for i in range(n):
        b = 6 * i
        hol[b:b + 6] = [(1, 0), (0, 1), (-1, -1), (1, 1), (-1, 0), (0, -1)]
        partner[b + 2], partner[b + 3] = b + 3, b + 2
        partner[b] = 6 * uinv[i] + 4          # bottom of i <-> top of square below
        partner[6 * uinv[i] + 4] = b
        partner[b + 1] = 6 * r[i] + 5         # right of i <-> left of right neighbour
        partner[6 * r[i] + 5] = b + 1
    m = {"squares": n, "r": list(map(int, r)), "u": list(map(int, u))}
    m.update(meta or {})
    return from_arrays(hol, partner, None, ABELIAN, meta=m)


def square_half_edge(square: int, side: int) -> int:
    """Half-edge id of side (0 bottom, 1 right, 2 top, 3 left) of a square."""
    return 6 * square + (0, 1, 4, 5)[side]


def unit_torus() -> FlatSurface:
    return origami([0], [0], {"id": "torus"})


def l_origami() -> FlatSurface:
    return origami([1, 0, 2], [2, 1, 0], {"id": "L3"})


BUILTIN_ORIGAMIS = {
    "torus": ([0], [0]),
    "L3": ([1, 0, 2], [2, 1, 0]),
    # four squares: one cone point of angle 6*pi plus a regular (marked) vertex
    "H11": ([0, 1, 3, 2], [1, 2, 0, 3]),
}


def builtin_origami(name: str) -> FlatSurface:
    if name not in BUILTIN_ORIGAMIS:
        raise SurfaceError(f"unknown origami {name!r}; known: {sorted(BUILTIN_ORIGAMIS)}")
    r, u = BUILTIN_ORIGAMIS[name]
    return origami(r, u, {"id": name})


def glue_squares(n: int, pairs: Sequence, kind: str = QUADRATIC) -> FlatSurface:
    """Unit squares glued side to side.

    ``pairs`` lists ``((square, side), (square, side))``.  Opposite sides
    (bottom/top or left/right) are glued by translation, equal sides by the
    half-turn.
    """
    hol = np.zeros((6 * n, 2))
    partner = -np.ones(6 * n, dtype=int)
    sign = np.ones(6 * n, dtype=int)
    for i in range(n):
        b = 6 * i
        hol[b:b + 6] = [(1, 0), (0, 1), (-1, -1), (1, 1), (-1, 0), (0, -1)]
        partner[b + 2], partner[b + 3] = b + 3, b + 2
    for (sa, a), (sb, b) in pairs:
        if (a - b) % 2:
            raise SurfaceError("a horizontal side cannot be glued to a vertical side")
        ha, hb = square_half_edge(sa, a), square_half_edge(sb, b)
        if partner[ha] >= 0 or partner[hb] >= 0 or ha == hb:
            raise SurfaceError("square side glued twice")
        partner[ha], partner[hb] = hb, ha
        sg = 1 if a != b else -1
        sign[ha] = sign[hb] = sg
    if np.any(partner < 0):
        raise SurfaceError("unmatched gluing: some square side is free")
    return from_arrays(hol, partner, sign, kind, meta={"squares": n})


# ---------------------------------------------------------------------- I/O
def surface_to_dict(s: FlatSurface) -> dict:
    labels = [s.half_edge_label(h) for h in range(s.n_half_edges)]
    tris = [[labels[3 * k], labels[3 * k + 1], labels[3 * k + 2]] for k in range(s.n_triangles)]
    hols = {labels[h]: [float(s.hol[h][0]), float(s.hol[h][1])] for h in range(s.n_half_edges)}
    glu = [[labels[h], labels[int(s.partner[h])], int(s.sign[h])] for h in s.edges]
    return {"version": FORMAT_VERSION, "kind": s.kind, "triangles": tris,
            "holonomies": hols, "gluings": glu}


def surface_from_dict(doc: Mapping) -> FlatSurface:
    if not isinstance(doc, Mapping):
        raise SurfaceError("surface document must be an object")
    for key in ("kind", "triangles", "holonomies", "gluings"):
        if key not in doc:
            raise SurfaceError(f"missing field {key!r}")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise SurfaceError(f"unsupported version {doc.get('version')!r}")
    return build_surface(doc["triangles"], doc["holonomies"], doc["gluings"], doc["kind"])


def dumps_surface(s: FlatSurface) -> str:
    d = surface_to_dict(s)
    ordered = {k: d[k] for k in ("version", "kind", "triangles", "holonomies", "gluings")}
    return json.dumps(ordered, indent=1) + "\n"


def save_surface(s: FlatSurface, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_surface(s))


def load_surface(path) -> FlatSurface:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SurfaceError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return surface_from_dict(doc)
