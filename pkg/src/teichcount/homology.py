"""Integral homology, the intersection form and cocycle matrices.

A tree-cotree decomposition of the triangulation gives 2g leftover edges;
each closes a loop through the spanning tree and these loops form the basis.
The dual cocycles take the value 1 on their own leftover edge and 0 on the
tree and the other leftover edges; closure on triangles fixes the rest.

The cup-product pairing W of the dual cocycles is evaluated with the Whitney
formula, and the intersection matrix of the basis is J = W^{-T}.  Everything
is computed in exact rational arithmetic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .saddle import _wrap, trace_segment
from .surface import FlatSurface, SurfaceError


class HomologyError(ValueError):
    pass


@dataclass(frozen=True)
class HomologyClass:
    """Integer weights on the edges of a reference triangulation.

    ``weights[i]`` is the coefficient of edge ``s.edges[i]`` oriented along
    its representative half-edge.  ``path`` optionally records a closed
    half-edge path representing the class.
    """
    fingerprint: int
    weights: tuple
    path: tuple = ()

    def __add__(self, other):
        _same(self, other)
        return HomologyClass(self.fingerprint, tuple(a + b for a, b in zip(self.weights, other.weights)))

    def __neg__(self):
        return HomologyClass(self.fingerprint, tuple(-a for a in self.weights))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int):
        return HomologyClass(self.fingerprint, tuple(k * a for a in self.weights))


def _same(a: HomologyClass, b: HomologyClass):
    if a.fingerprint != b.fingerprint or len(a.weights) != len(b.weights):
        raise HomologyError("homology classes live on different triangulations")


def fingerprint(s: FlatSurface) -> int:
    return hash((tuple(int(x) for x in s.partner), tuple(int(x) for x in s.sign)))


def edge_index(s: FlatSurface) -> dict:
    """Half-edge -> (edge index, orientation sign)."""
    out = {}
    for i, h in enumerate(s.edges):
        out[h] = (i, 1)
        out[int(s.partner[h])] = (i, -1)
    return out


def class_from_path(s: FlatSurface, path) -> HomologyClass:
    idx = edge_index(s)
    w = [0] * len(s.edges)
    for h in path:
        i, sg = idx[int(h)]
        w[i] += sg
    return HomologyClass(fingerprint(s), tuple(w), tuple(int(h) for h in path))


def is_closed(s: FlatSurface, c: HomologyClass) -> bool:
    bd = [0] * s.n_vertices
    cv = s.corner_vertex
    for i, h in enumerate(s.edges):
        w = c.weights[i]
        bd[cv[h]] -= w
        bd[cv[int(s.partner[h])]] += w
    return not any(bd)


# ----------------------------------------------------------- tree / cotree
@dataclass(frozen=True)
class HomologyData:
    surface_fp: int
    root: int
    tree_path: dict            # vertex -> half-edge path from the root
    leftover: tuple            # half-edges closing the basis loops
    basis: tuple               # HomologyClass per leftover edge
    cocycles: np.ndarray       # (2g, E) integer values of the dual cocycles on edges
    W: tuple                   # cup-product matrix (Fractions)
    J: tuple                   # intersection matrix of the basis (Fractions)
    Jint: np.ndarray


@lru_cache(maxsize=128)
def homology_data(s: FlatSurface) -> HomologyData:
    n = s.n_half_edges
    cv = s.corner_vertex
    root = int(cv[0])
    idx = edge_index(s)
    # primal BFS tree
    out_edges = {}
    for h in range(n):
        out_edges.setdefault(int(cv[h]), []).append(h)
    parent_edge = {root: None}
    tree_path = {root: ()}
    tree = set()
    q = deque([root])
    while q:
        v = q.popleft()
        for h in sorted(out_edges[v]):
            w = int(cv[int(s.partner[h])])
            if w not in parent_edge:
                parent_edge[w] = h
                tree_path[w] = tree_path[v] + (h,)
                tree.add(idx[h][0])
                q.append(w)
    # dual BFS tree on triangles avoiding primal tree edges
    seen = {0: None}
    order = [0]
    cotree = set()
    q = deque([0])
    while q:
        k = q.popleft()
        for h in range(3 * k, 3 * k + 3):
            e = idx[h][0]
            if e in tree:
                continue
            k2 = int(s.partner[h]) // 3
            if k2 not in seen:
                seen[k2] = h
                cotree.add(e)
                order.append(k2)
                q.append(k2)
    leftover = tuple(h for h in s.edges if idx[h][0] not in tree and idx[h][0] not in cotree)
    if len(leftover) != 2 * s.genus:
        raise HomologyError("tree-cotree decomposition did not leave 2g edges")
    basis = []
    for h in leftover:
        a = int(cv[h])
        b = int(cv[int(s.partner[h])])
        back = tuple(int(s.partner[x]) for x in reversed(tree_path[b]))
        basis.append(class_from_path(s, tree_path[a] + (h,) + back))
    E = len(s.edges)
    co = np.zeros((len(leftover), E), dtype=np.int64)
    for i, h in enumerate(leftover):
        val = {idx[x][0]: 0 for x in s.edges if idx[x][0] in tree}
        for j, h2 in enumerate(leftover):
            val[idx[h2][0]] = 1 if i == j else 0
        for k in reversed(order[1:]):
            ph = seen[k]                      # half-edge of the parent triangle
            mine = int(s.partner[ph])         # same edge seen from k
            tot = 0
            for x in range(3 * k, 3 * k + 3):
                if x == mine:
                    continue
                e, sg = idx[x]
                tot += sg * val[e]
            e, sg = idx[mine]
            val[e] = -sg * tot
        for e in range(E):
            co[i, e] = val[e]
    for k in range(s.n_triangles):            # closure check (root triangle included)
        for i in range(len(leftover)):
            if sum(idx[x][1] * co[i, idx[x][0]] for x in range(3 * k, 3 * k + 3)):
                raise HomologyError("dual cocycle failed to close")
    W = _cup_matrix(s, co, idx)
    J = _transpose(_inverse(W))
    Jint = np.array([[int(x) for x in row] for row in J], dtype=np.int64)
    if any(x.denominator != 1 for row in J for x in row):
        raise HomologyError("intersection matrix is not integral")
    return HomologyData(fingerprint(s), root, tree_path, leftover, tuple(basis), co,
                        W, J, Jint)


def _cup_matrix(s, co, idx):
    n = co.shape[0]
    W = [[Fraction(0)] * n for _ in range(n)]
    vals = []
    for k in range(s.n_triangles):
        a, b = 3 * k, 3 * k + 1
        ea, sa = idx[a]
        eb, sb = idx[b]
        vals.append((co[:, ea] * sa, co[:, eb] * sb))
    for i in range(n):
        for j in range(n):
            tot = 0
            for va, vb in vals:
                tot += int(va[i]) * int(vb[j]) - int(va[j]) * int(vb[i])
            W[i][j] = Fraction(tot, 2)
    return tuple(tuple(r) for r in W)


def _inverse(M):
    n = len(M)
    A = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise HomologyError("singular matrix")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return tuple(tuple(row[n:]) for row in A)


def _transpose(M):
    return tuple(tuple(M[j][i] for j in range(len(M))) for i in range(len(M[0])))


# ------------------------------------------------------------------ public
def homology_basis(s: FlatSurface) -> list:
    return list(homology_data(s).basis)


def coordinates(s: FlatSurface, c: HomologyClass) -> np.ndarray:
    """Coordinates of c in the tree-cotree basis (exact integers)."""
    d = homology_data(s)
    if c.fingerprint != d.surface_fp:
        raise HomologyError("homology class belongs to a different triangulation")
    return d.cocycles @ np.array(c.weights, dtype=np.int64)


def intersection_matrix(s: FlatSurface) -> np.ndarray:
    return homology_data(s).Jint.copy()


def intersection_number(s: FlatSurface, a: HomologyClass, b: HomologyClass) -> int:
    _same(a, b)
    pa, pb = coordinates(s, a), coordinates(s, b)
    return int(pa @ homology_data(s).Jint @ pb)


@dataclass(frozen=True)
class DualCocycle:
    """The functional beta -> I(beta, alpha) in the dual (cocycle) basis."""
    coefficients: tuple
    surface_fp: int

    def pair(self, s: FlatSurface, beta: HomologyClass) -> int:
        return int(np.array(self.coefficients, dtype=np.int64) @ coordinates(s, beta))


def poincare_dual(s: FlatSurface, a: HomologyClass) -> DualCocycle:
    d = homology_data(s)
    coef = d.Jint @ coordinates(s, a)
    return DualCocycle(tuple(int(x) for x in coef), d.surface_fp)


def rank(vectors) -> int:
    if not len(vectors):
        return 0
    import sympy
    return sympy.Matrix([list(map(int, v)) for v in vectors]).rank()


# --------------------------------------------------------- odd homology
def odd_basis(cover: FlatSurface, involution, genus_below: int) -> list:
    """Classes c - tau(c) spanning the anti-invariant part of H_1 of the cover."""
    idx = edge_index(cover)
    fp = fingerprint(cover)
    target = 2 * cover.genus - 2 * genus_below
    chosen, coords = [], []
    for c in homology_basis(cover):
        w = [0] * len(cover.edges)
        for i, h in enumerate(cover.edges):
            if c.weights[i]:
                j, sg = idx[int(involution[h])]
                w[j] += sg * c.weights[i]
        odd = HomologyClass(fp, tuple(a - b for a, b in zip(c.weights, w)))
        v = coordinates(cover, odd)
        if not any(v):
            continue
        if rank(coords + [v]) > len(coords):
            chosen.append(odd)
            coords.append(v)
        if len(chosen) == target:
            break
    if len(chosen) != target:
        raise HomologyError("odd homology basis could not be completed")
    return chosen


def period(s: FlatSurface, c: HomologyClass) -> np.ndarray:
    w = np.array(c.weights, dtype=float)
    return w @ s.hol[list(s.edges)]


# ------------------------------------------------------ cohomology action
def flow_action_on_cohomology(t: float, A) -> np.ndarray:
    """Block action on H^1 with plane coefficients: diag(e^t A, e^-t A)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = math.exp(t) * A
    out[n:, n:] = math.exp(-t) * A
    return out


def jacobi_singular_values(B, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations."""
    U = np.array(B, dtype=float, copy=True)
    n = U.shape[1]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = float(U[:, i] @ U[:, i])
                b = float(U[:, j] @ U[:, j])
                c = float(U[:, i] @ U[:, j])
                if a == 0 or b == 0:
                    continue
                r = abs(c) / math.sqrt(a * b)
                off = max(off, r)
                if r <= tol:
                    continue
                zeta = (b - a) / (2 * c)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                cs = 1 / math.sqrt(1 + t * t)
                sn = cs * t
                ui = U[:, i].copy()
                U[:, i] = cs * ui - sn * U[:, j]
                U[:, j] = sn * ui + cs * U[:, j]
        if off <= tol:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


@dataclass(frozen=True)
class SingularValueReport:
    t: float
    singular_values: tuple
    product: float
    product_ok: bool
    lambda1: float
    lambda_n: float
    bracket_ok: bool               # lambda_n <= 1 <= lambda_1
    pairing_error: float           # max |lambda_i * lambda_{n+1-i} - 1|
    oracle_error: float            # against a LAPACK SVD
    det: float


def singular_value_report(A, t: float) -> SingularValueReport:
    B = flow_action_on_cohomology(t, A)
    sv = jacobi_singular_values(B)
    prod = float(np.exp(np.sum(np.log(sv))))
    pair = float(np.max(np.abs(sv * sv[::-1] - 1)))
    ref = np.linalg.svd(B, compute_uv=False)
    orc = float(np.max(np.abs(sv - ref) / np.maximum(ref, 1e-300)))
    return SingularValueReport(t, tuple(float(x) for x in sv), prod, abs(prod - 1) <= 1e-8,
                               float(sv[0]), float(sv[-1]), bool(sv[-1] <= 1 + 1e-12 and sv[0] >= 1 - 1e-12),
                               pair, orc, float(np.linalg.det(B)))


def is_symplectic(A, J) -> bool:
    A = [[int(x) for x in row] for row in np.asarray(A)]
    J = [[int(x) for x in row] for row in np.asarray(J)]
    n = len(A)
    AtJ = [[sum(A[k][i] * J[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    AtJA = [[sum(AtJ[i][k] * A[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return AtJA == J


# ------------------------------------------------ mapping class matrices
def _lift(M):
    """Continuous lift of theta -> arg(M u_theta) as theta + delta(theta)."""
    M = np.asarray(M, dtype=float)
    d0 = math.atan2(M[1, 0], M[0, 0])

    def L(theta):
        u = (math.cos(theta), math.sin(theta))
        v = (M[0, 0] * u[0] + M[0, 1] * u[1], M[1, 0] * u[0] + M[1, 1] * u[1])
        d = math.atan2(v[1], v[0]) - theta
        d = d0 + ((d - d0 + math.pi) % (2 * math.pi)) - math.pi
        return theta + d
    return L


@dataclass(frozen=True)
class Automorphism:
    linear_part: tuple
    square_perm: tuple
    surface_id: str = ""


class _AffineImage:
    """Action of an affine map on vertices, angular positions and edges.

    The map is pinned by sending the lower-left corner of square 0 to the
    lower-left corner of the anchor square.  Positions are transported along
    the spanning tree; every edge is then traced and must land on the image
    of its endpoint at the transported position, which certifies that the
    map is well defined.
    """

    def __init__(self, s: FlatSurface, M, anchor_square: int):
        self.s = s
        self.M = np.asarray(M, dtype=float)
        self.L = _lift(M)
        d = homology_data(s)
        root = int(s.corner_vertex[0])
        off = s.corner_offsets
        off0 = float(off[0])
        offa = float(off[6 * anchor_square])
        # vertex -> (image vertex, reference position, its image)
        self.vmap = {root: (int(s.corner_vertex[6 * anchor_square]), off0, offa + self.L(off0) - off0)}
        for v, path in sorted(d.tree_path.items(), key=lambda kv: len(kv[1])):
            if not path:
                continue
            h = path[-1]
            tr = self._trace(h)
            self.vmap[v] = (tr.end_vertex, float(off[int(s.partner[h])]), tr.end_position)
        for v, (w, _, _) in self.vmap.items():
            if abs(s.vertex_angles[v] - s.vertex_angles[w]) > 1e-6:
                raise SurfaceError("cone angles are not preserved")

    def image_position(self, v: int, theta: float) -> tuple:
        w, beta, beta_img = self.vmap[v]
        dlt = (theta - beta) % float(self.s.vertex_angles[v])
        return w, beta_img + self.L(beta + dlt) - self.L(beta)

    def _trace(self, h: int):
        s = self.s
        w, pos = self.image_position(int(s.corner_vertex[h]), float(s.corner_offsets[h]))
        vec = self.M @ s.hol[h]
        return trace_segment(s, w, pos, math.hypot(*vec))

    def check_edges(self):
        s = self.s
        for h in range(s.n_half_edges):
            tr = self._trace(h)
            p = int(s.partner[h])
            w, pos = self.image_position(int(s.corner_vertex[p]), float(s.corner_offsets[p]))
            tot = float(s.vertex_angles[w])
            dd = (tr.end_position - pos) % tot
            if tr.end_vertex != w or min(dd, tot - dd) > 1e-7:
                raise SurfaceError("edge images do not match vertex images")

    def edge_integrals(self, forms) -> np.ndarray:
        s = self.s
        out = np.zeros((s.n_half_edges, forms.shape[1]))
        for h in range(s.n_half_edges):
            for k, piece in self._trace(h).pieces:
                out[h] += forms[k] @ np.asarray(piece, dtype=float)
        return out


def _form_matrices(s: FlatSurface, co: np.ndarray):
    """Per triangle: the constant 1-forms of the cocycles as (2g, 2) arrays."""
    idx = edge_index(s)
    out = []
    for k in range(s.n_triangles):
        a, b = 3 * k, 3 * k + 1
        H = np.array([s.hol[a], s.hol[b]]).T          # columns: edge vectors
        Hinv = np.linalg.inv(H)
        ea, sa = idx[a]
        eb, sb = idx[b]
        vals = np.stack([co[:, ea] * sa, co[:, eb] * sb], axis=1).astype(float)
        out.append(vals @ Hinv)
    return np.array(out)


def derived_square_perm(s: FlatSurface, M, anchor_square: int) -> tuple:
    """Square permutation induced by the affine map with the given anchor."""
    n = s.meta.get("squares")
    if n is None:
        raise HomologyError("surface is not square-tiled")
    img = _AffineImage(s, M, anchor_square)
    L0 = img.L(0.0)
    perm = []
    for i in range(n):
        b = 6 * i
        w, pos = img.image_position(int(s.corner_vertex[b]), float(s.corner_offsets[b]))
        target = pos - L0
        tot = float(s.vertex_angles[w])
        match = []
        for q in range(n):
            bq = 6 * q
            if int(s.corner_vertex[bq]) != w:
                continue
            dd = (float(s.corner_offsets[bq]) - target) % tot
            if min(dd, tot - dd) < 1e-7:
                match.append(q)
        if len(match) != 1:
            raise HomologyError(f"square {i} is not mapped onto a square corner")
        perm.append(match[0])
    if sorted(perm) != list(range(n)):
        raise HomologyError("induced square map is not a permutation")
    return tuple(perm)


def mapping_class_matrix(s: FlatSurface, phi: Automorphism, basis=None) -> np.ndarray:
    """Integer matrix of the affine automorphism on H_1.

    Column j holds the coordinates of the image of basis element j (the
    tree-cotree basis unless ``basis`` is given).
    """
    M = np.array(phi.linear_part, dtype=float)
    Mi = np.array(phi.linear_part, dtype=np.int64)
    if Mi.shape != (2, 2) or not np.array_equal(Mi, M) or round(np.linalg.det(M)) != 1:
        raise HomologyError("linear part must lie in SL(2,Z)")
    if s.kind != "abelian":
        raise HomologyError("mapping class matrices are implemented for translation surfaces")
    perm = tuple(int(x) for x in phi.square_perm)
    if sorted(perm) != list(range(s.meta.get("squares", -1))):
        raise HomologyError("square_perm is not a permutation of the squares")
    d = homology_data(s)
    try:
        img = _AffineImage(s, M, perm[0])
        img.check_edges()
        derived = derived_square_perm(s, M, perm[0])
        if derived != perm:
            raise SurfaceError(f"square permutation {list(perm)} is inconsistent "
                               f"(the linear part induces {list(derived)})")
        integ = img.edge_integrals(_form_matrices(s, d.cocycles))
    except SurfaceError as exc:
        raise HomologyError(f"map does not preserve the gluing pattern: {exc}") from None
    cols = []
    for c in d.basis:
        tot = integ[list(c.path)].sum(axis=0)
        col = np.rint(tot)
        if np.max(np.abs(col - tot)) > 1e-6:
            raise HomologyError("non-integral homology image")
        cols.append(col.astype(np.int64))
    A = np.array(cols, dtype=np.int64).T
    if basis is not None:
        P = np.array([coordinates(s, b) for b in basis], dtype=np.int64).T
        if round(abs(np.linalg.det(P))) != 1:
            raise HomologyError("custom basis is not unimodular")
        Pinv = np.rint(np.linalg.inv(P)).astype(np.int64)
        A = Pinv @ A @ P
    return A


def basis_intersection_matrix(s: FlatSurface, basis) -> np.ndarray:
    return np.array([[intersection_number(s, a, b) for b in basis] for a in basis], dtype=np.int64)


def find_automorphisms(s: FlatSurface, M) -> list:
    """All square permutations realising an affine map with linear part M."""
    out = []
    for q in range(s.meta.get("squares", 0)):
        try:
            perm = derived_square_perm(s, M, q)
            phi = Automorphism(tuple(map(tuple, np.asarray(M, dtype=int).tolist())), perm,
                               str(s.meta.get("id", "")))
            mapping_class_matrix(s, phi)
            out.append(phi)
        except (HomologyError, SurfaceError):
            continue
    return out


def standard_cycle(s: FlatSurface, half_edges) -> HomologyClass:
    return class_from_path(s, half_edges)

