"""Systole surgery on flat surfaces.

The pipeline follows the opening-up construction: orient every edge of a
triangulation so that its x-component is positive, build a multicurve that
crosses a chosen edge set W from left to right, antisymmetrize it under the
deck involution of the orientation cover, then shear horizontal periods by
the algebraic intersection numbers with that multicurve.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import homology as hom
from .cover import orientation_double_cover
from .delaunay import DelaunayError, delaunayize, euclidean_distance
from .saddle import systole
from .surface import ABELIAN, QUADRATIC, FlatSurface, SurfaceError, origami, rotate

VERTICAL_THETA = 1e-7
VERTICAL_TOL = 1e-12


class SurgeryError(RuntimeError):
    pass


class DeformationError(SurgeryError):
    def __init__(self, message: str, max_t: float):
        super().__init__(message)
        self.max_t = max_t


# ------------------------------------------------------------------ orientation
@dataclass(frozen=True)
class OrientedTriangulation:
    surface: FlatSurface
    theta: float                 # rotation applied to remove vertical edges
    positive: dict               # edge representative -> half-edge with x > 0

    def is_positive(self, h: int) -> bool:
        return self.positive[min(h, int(self.surface.partner[h]))] == h


def _has_vertical(s: FlatSurface) -> bool:
    scale = float(np.abs(s.hol).max())
    return bool(np.any(np.abs(s.hol[:, 0]) <= VERTICAL_TOL * scale))


def orient_edges(s: FlatSurface, theta: float = VERTICAL_THETA) -> OrientedTriangulation:
    """Pick for every edge the half-edge whose holonomy points right.

    A surface with vertical edges is rotated by ``theta`` first (doubling the
    angle until no edge is vertical); the angle actually used is recorded.
    """
    if s.kind != ABELIAN:
        raise SurfaceError("edge orientation needs a translation surface; pass the double cover")
    used = 0.0
    cur = s
    step = theta
    while _has_vertical(cur):
        used += step
        cur = rotate(s, used)
        step *= 2
    pos = {}
    for h in cur.edges:
        p = int(cur.partner[h])
        pos[h] = h if cur.hol[h, 0] > 0 else p
    return OrientedTriangulation(cur, used, pos)


# ------------------------------------------------------------ the multicurve
@dataclass(frozen=True)
class TransverseMulticurve:
    surface: FlatSurface               # oriented translation surface carrying the curve
    theta: float
    W: frozenset                       # edge representatives
    weights: np.ndarray                # I(h, curve) for every half-edge
    crossings: dict                    # edge representative -> unsigned crossing count
    cycles: tuple                      # each cycle: tuple of exited half-edges
    graph_vertices: int
    graph_edges: tuple                 # (tail component, head component, W edge)
    n: int
    bound: int
    genus_cap: int
    antisymmetric: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.weights)

    def intersection(self, h: int) -> int:
        return int(self.weights[h])


def _edge_rep(s: FlatSurface, h: int) -> int:
    return min(h, int(s.partner[h]))


def _weights_from_cycles(s: FlatSurface, cycles) -> tuple:
    w = np.zeros(s.n_half_edges, dtype=np.int64)
    cnt = {h: 0 for h in s.edges}
    for cyc in cycles:
        for x in cyc:
            w[x] += 1
            w[int(s.partner[x])] -= 1
            cnt[_edge_rep(s, x)] += 1
    return w, cnt


def _components(s: FlatSurface, W) -> np.ndarray:
    parent = list(range(s.n_triangles))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for h in s.edges:
        if h in W:
            continue
        a, b = find(h // 3), find(int(s.partner[h]) // 3)
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = sorted({find(k) for k in range(s.n_triangles)})
    label = {r: i for i, r in enumerate(roots)}
    return np.array([label[find(k)] for k in range(s.n_triangles)])


def _dual_path(s: FlatSurface, W, start: int, goal: int) -> list:
    """Exited half-edges of a shortest dual path that never crosses W."""
    if start == goal:
        return []
    prev = {start: None}
    q = deque([start])
    while q:
        k = q.popleft()
        for h in range(3 * k, 3 * k + 3):
            if _edge_rep(s, h) in W:
                continue
            k2 = int(s.partner[h]) // 3
            if k2 in prev:
                continue
            prev[k2] = (k, h)
            if k2 == goal:
                path = []
                cur = goal
                while prev[cur] is not None:
                    kk, hh = prev[cur]
                    path.append(hh)
                    cur = kk
                return path[::-1]
            q.append(k2)
    raise AssertionError("triangles of one component are not dual-connected")


def _return_path(adj, src: int, dst: int):
    """Directed path src -> dst as a list of graph-edge ids (depth-first, sorted)."""
    if src == dst:
        return []
    stack = [(src, iter(adj[src]))]
    seen = {src}
    via = []
    while stack:
        v, it = stack[-1]
        for eid, w in it:
            if w in seen:
                continue
            seen.add(w)
            via.append(eid)
            if w == dst:
                return via
            stack.append((w, iter(adj[w])))
            break
        else:
            stack.pop()
            if via:
                via.pop()
    return None


def _genus_cap(s: FlatSurface) -> int:
    return len(s.edges) * s.n_triangles


def build_transverse_multicurve(s, W) -> TransverseMulticurve:
    """Multicurve crossing every edge of W at least once, always left to right.

    ``s`` is a translation surface or an OrientedTriangulation; ``W`` holds
    half-edge ids (either half of an edge names that edge).
    """
    ot = s if isinstance(s, OrientedTriangulation) else orient_edges(s)
    surf = ot.surface
    Wset = frozenset(_edge_rep(surf, int(h)) for h in W)
    if not Wset:
        raise ValueError("W must be nonempty")
    comp = _components(surf, Wset)
    nv = int(comp.max()) + 1
    gedges = []
    for e in sorted(Wset):
        hp = ot.positive[e]
        gedges.append((int(comp[hp // 3]), int(comp[int(surf.partner[hp]) // 3]), e))
    adj = [[] for _ in range(nv)]
    for eid, (a, b, _) in enumerate(gedges):
        adj[a].append((eid, b))
    for lst in adj:
        lst.sort(key=lambda x: (x[1], x[0]))
    covered = [False] * len(gedges)
    cycles = []
    for eid, (a, b, _) in enumerate(gedges):
        if covered[eid]:
            continue
        back = _return_path(adj, b, a)
        if back is None:
            raise AssertionError(f"graph edge {eid} lies on no directed cycle")
        cyc_edges = [eid] + back
        for c in cyc_edges:
            covered[c] = True
        crossing = []
        for i, c in enumerate(cyc_edges):
            hp = ot.positive[gedges[c][2]]
            crossing.append(hp)
            nxt_hp = ot.positive[gedges[cyc_edges[(i + 1) % len(cyc_edges)]][2]]
            crossing += _dual_path(surf, Wset, int(surf.partner[hp]) // 3, nxt_hp // 3)
        cycles.append(tuple(crossing))
    weights, cnt = _weights_from_cycles(surf, cycles)
    return TransverseMulticurve(
        surface=surf, theta=ot.theta, W=Wset, weights=weights, crossings=cnt,
        cycles=tuple(cycles), graph_vertices=nv, graph_edges=tuple(gedges),
        n=max(cnt.values()), bound=len(Wset) * nv, genus_cap=_genus_cap(surf))


@dataclass(frozen=True)
class PropertyReport:
    a_transverse: bool
    b_crosses_W: bool
    c_left_to_right: bool
    d_bounded: bool

    @property
    def ok(self) -> bool:
        return self.a_transverse and self.b_crosses_W and self.c_left_to_right and self.d_bounded


def check_properties(mc: TransverseMulticurve) -> PropertyReport:
    s = mc.surface
    positive = {h: (h if s.hol[h, 0] > 0 else int(s.partner[h])) for h in s.edges}
    a = True
    for cyc in mc.cycles:
        if not cyc:
            a = False
        for i, x in enumerate(cyc):
            y = cyc[(i + 1) % len(cyc)]
            if y // 3 != int(s.partner[x]) // 3:
                a = False
    w, cnt = _weights_from_cycles(s, mc.cycles)
    a = a and bool(np.array_equal(w, mc.weights)) and cnt == mc.crossings
    b = all(cnt[e] >= 1 for e in mc.W)
    c = all(x == positive[_edge_rep(s, x)] for cyc in mc.cycles for x in cyc
            if _edge_rep(s, x) in mc.W)
    d = max(cnt.values()) <= mc.n <= mc.bound <= 2 * mc.genus_cap
    return PropertyReport(a, b, c, bool(d))


def antisymmetrize(mc: TransverseMulticurve, involution) -> TransverseMulticurve:
    """Curve minus its image under the deck involution: I(h) - I(tau h)."""
    s = mc.surface
    inv = np.asarray(involution)
    weights = mc.weights - mc.weights[inv]
    extra = tuple(tuple(int(s.partner[int(inv[x])]) for x in reversed(cyc)) for cyc in mc.cycles)
    cycles = mc.cycles + extra
    w2, cnt = _weights_from_cycles(s, cycles)
    assert np.array_equal(w2, weights)
    return TransverseMulticurve(
        surface=s, theta=mc.theta, W=mc.W, weights=weights, crossings=cnt, cycles=cycles,
        graph_vertices=mc.graph_vertices, graph_edges=mc.graph_edges, n=max(cnt.values()),
        bound=2 * mc.bound, genus_cap=mc.genus_cap, antisymmetric=True,
        meta={"degenerate": not np.any(weights)})


def is_antisymmetric(mc: TransverseMulticurve, involution) -> bool:
    inv = np.asarray(involution)
    return bool(np.array_equal(mc.weights[inv], -mc.weights))


# ------------------------------------------------------------------ deformation
def _increments(s: FlatSurface, mc: TransverseMulticurve) -> np.ndarray:
    n = s.n_half_edges
    if s.kind == ABELIAN:
        if s.n_half_edges != mc.surface.n_half_edges or hom.fingerprint(s) != hom.fingerprint(mc.surface):
            raise SurfaceError("multicurve lives on a different triangulation")
        return mc.weights.astype(float)
    if mc.surface.n_half_edges != 2 * n:
        raise SurfaceError("multicurve does not live on the double cover of this surface")
    if not mc.antisymmetric:
        raise SurfaceError("a quadratic surface needs an antisymmetrized multicurve")
    return mc.weights[:n].astype(float)


def max_feasible_t(s: FlatSurface, mc: TransverseMulticurve, ell: float) -> float:
    """Largest t for which every triangle keeps positive area."""
    inc = _increments(s, mc) * ell
    u, v = s.hol[0::3], s.hol[1::3]
    a0 = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    slope = inc[0::3] * v[:, 1] - u[:, 1] * inc[1::3]
    neg = slope < 0
    return float(np.min(-a0[neg] / slope[neg])) if np.any(neg) else math.inf


def deform(s: FlatSurface, mc: TransverseMulticurve, t: float, ell: float) -> FlatSurface:
    """Add I(e, curve) * t * ell to the x-component of every edge."""
    if t == 0:
        return s
    inc = _increments(s, mc)
    hol = s.hol.copy()
    hol[:, 0] += inc * (t * ell)
    out = FlatSurface(hol, s.partner.copy(), s.sign.copy(), s.kind, s.labels, dict(s.meta))
    if float(out.triangle_areas().min()) <= 0:
        tm = max_feasible_t(s, mc, ell)
        raise DeformationError(f"t = {t:g} flattens a triangle; max feasible t = {tm:.6g}", tm)
    return out


# ----------------------------------------------------------------- opening up
def rho1_for(n: int, m: int, step: float = 1e-4) -> float:
    """Largest grid value rho with sqrt(2) - n*m*rho >= (1 + rho)^2."""
    k = n * m
    b = 2 + k
    root = (-b + math.sqrt(b * b + 4 * (math.sqrt(2) - 1))) / 2
    j = int(root / step)
    while j > 0 and math.sqrt(2) - k * j * step < (1 + j * step) ** 2:
        j -= 1
    if j <= 0:
        raise SurgeryError(f"no admissible rho1 on the grid for n*m = {k}")
    return j * step


def rho1_ok(rho: float, n: int, m: int) -> bool:
    return math.sqrt(2) - n * m * rho >= (1 + rho) ** 2


@dataclass(frozen=True)
class StepRecord:
    step: int
    systole_before: float
    systole_after: float
    rho1: float
    n: int
    m: int
    flips: int
    W_size: int
    min_margin: float            # min over sampled t of l(t) - l(0) sqrt(1 + t^2)
    euclidean_length: float
    hodge_surrogate: float

    @property
    def growth(self) -> float:
        return self.systole_after / self.systole_before


@dataclass(frozen=True)
class OpenUpResult:
    surface: FlatSurface
    steps: tuple
    theta: float
    epsilon: float
    kappa: float
    converged: bool
    error: str | None = None

    @property
    def path_length(self) -> float:
        return float(sum(r.euclidean_length for r in self.steps))


def _hodge_surrogate(ell: float, rho: float, k: int = 64) -> float:
    t = (np.arange(k) + 0.5) * (rho / k)
    return float(np.sum(np.sqrt(np.abs(np.log(ell * np.sqrt(1 + t * t))))) * rho / k)


def surgery_step(s: FlatSurface, theta: float = VERTICAL_THETA):
    """Delaunay triangulation, W, the (antisymmetrized) multicurve and its data."""
    s, stats = delaunayize(s, with_stats=True)
    ell = systole(s)
    if s.kind == QUADRATIC:
        cov = orientation_double_cover(s)
        if not cov.connected:
            raise SurfaceError("quadratic surface with trivial holonomy: pass its abelian form")
        up, inv = cov.surface, cov.involution
    else:
        up, inv = s, None
    ot = orient_edges(up, theta)
    if ot.theta:
        s = rotate(s, ot.theta)
        up = ot.surface
    thr = math.sqrt(2) * ell * (1 + 1e-9)
    lengths = np.hypot(up.hol[:, 0], up.hol[:, 1])
    W = [h for h in up.edges if lengths[h] <= thr]
    mc = build_transverse_multicurve(ot, W)
    if inv is not None:
        mc = antisymmetrize(mc, inv)
    m = max(1, up.n_vertices - 1)
    return s, ell, mc, m, stats.flips, ot.theta


def open_up(s: FlatSurface, epsilon: float, samples: int = 4, max_steps: int = 100000,
            tol: float = 1e-9) -> OpenUpResult:
    """Iterate one-step expansions until the systole reaches epsilon."""
    steps = []
    theta = 0.0
    cur = s
    ell = systole(cur)
    if ell >= epsilon:
        return OpenUpResult(s, (), 0.0, epsilon, epsilon / ell, True)
    try:
        while ell < epsilon:
            if len(steps) >= max_steps:
                raise SurgeryError(f"no convergence after {max_steps} steps")
            base, ell0, mc, m, flips, th = surgery_step(cur)
            theta += th
            rho = rho1_for(mc.n, m)
            margin = math.inf
            for j in range(1, samples + 1):
                t = rho * j / samples
                lt = systole(deform(base, mc, t, ell0))
                margin = min(margin, lt - ell0 * math.sqrt(1 + t * t))
            nxt_s = deform(base, mc, rho, ell0)
            ell1 = systole(nxt_s)
            steps.append(StepRecord(len(steps), ell0, ell1, rho, mc.n, m, flips, len(mc.W),
                                    margin, euclidean_distance(base, nxt_s),
                                    _hodge_surrogate(ell0, rho)))
            if margin < -tol:
                raise SurgeryError(f"growth bound violated at step {len(steps) - 1} "
                                   f"(margin {margin:.3g})")
            cur, ell = nxt_s, ell1
    except (SurgeryError, DelaunayError, SurfaceError) as exc:
        return OpenUpResult(cur, tuple(steps), theta, epsilon, epsilon / ell, False, str(exc))
    return OpenUpResult(cur, tuple(steps), theta, epsilon, epsilon / ell, True)


def step_bound(ell: float, epsilon: float, rho: float) -> float:
    """Geometric-growth step count log(eps / l) / log sqrt(1 + rho^2)."""
    return math.log(epsilon / ell) / math.log(math.sqrt(1 + rho * rho))


# ------------------------------------------------------------------- examples
def three_tori() -> tuple:
    """Three two-square tori glued in a ring along horizontal slits.

    Returns the surface and W, the three slit edges (tops of the b squares).
    """
    r = [3, 4, 5, 0, 1, 2]
    u = [0, 1, 2, 4, 5, 3]
    s = origami(r, u, {"id": "three-tori"})
    W = [6 * (3 + i) + 4 for i in range(3)]
    return s, W


def two_triangle_torus() -> tuple:
    s = origami([0], [0], {"id": "torus"})
    return s, [2]
