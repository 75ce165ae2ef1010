"""Jacobian calculus for polynomials with prescribed zeros.

A configuration is a list of m complex zeros summing to zero; its monic
polynomial has coefficients a_0..a_{m-1} with a_{m-1} = 0.  This module
computes the zeros-to-coefficients Jacobian, spanning trees on the zeros,
period integrals of sqrt(polynomial) along tree edges, and finite-difference
checks of the Jacobian bounds built from them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

SUM_TOL = 1e-12
DEFAULT_FD_STEP = 1e-5
DEFAULT_QUAD_TOL = 1e-12


class JacobianError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


class BranchError(RuntimeError):
    pass


# ----------------------------------------------------------------- configs
@dataclass(frozen=True)
class ZeroConfig:
    z: tuple
    radius: float = math.inf        # declared bounded set K = closed disk of this radius

    def __post_init__(self):
        z = tuple(complex(v) for v in self.z)
        object.__setattr__(self, "z", z)
        if len(z) < 2:
            raise JacobianError("need at least two zeros")
        scale = max(1.0, max(abs(v) for v in z))
        if abs(sum(z)) > SUM_TOL * scale:
            raise JacobianError(f"zeros must sum to 0 (sum = {sum(z):.3g})")
        if any(abs(v) > self.radius * (1 + 1e-12) for v in z):
            raise JacobianError("zero outside the declared bounded set")

    @property
    def m(self) -> int:
        return len(self.z)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.z, dtype=complex)

    @classmethod
    def centered(cls, z, radius: float = math.inf) -> "ZeroConfig":
        a = np.asarray(z, dtype=complex)
        return cls(tuple(a - a.mean()), radius)

    def scaled(self, c) -> "ZeroConfig":
        return ZeroConfig(tuple(c * v for v in self.z))

    def conjugate(self) -> "ZeroConfig":
        return ZeroConfig(tuple(v.conjugate() for v in self.z), self.radius)


def random_config(rng: np.random.Generator, m: int, radius: float = 1.0) -> ZeroConfig:
    """m points uniform in the disk of the given radius, then centered."""
    r = radius * np.sqrt(rng.random(m))
    phi = rng.uniform(0, 2 * math.pi, m)
    z = r * np.exp(1j * phi)
    return ZeroConfig.centered(z)


def pairwise_distances(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.abs(z[:, None] - z[None, :])


def diameter(z) -> float:
    return float(pairwise_distances(z).max())


# ----------------------------------------------------- zeros and coefficients
def coefficients(z) -> np.ndarray:
    """a_0..a_{m-1} of prod (x - z_j) = x^m + sum a_i x^i."""
    return np.poly(np.asarray(z, dtype=complex))[::-1][:-1].astype(complex)


def zeros_to_coeffs(cfg: ZeroConfig) -> np.ndarray:
    return coefficients(cfg.z)[:-1]


def coeffs_to_zeros(a) -> np.ndarray:
    """Roots of x^m + sum a_i x^i for a = a_0..a_{m-1}."""
    return np.roots(np.concatenate([[1.0], np.asarray(a, dtype=complex)[::-1]]))


def same_multiset(u, v, tol: float = 1e-8) -> bool:
    u, v = list(np.asarray(u, complex)), list(np.asarray(v, complex))
    if len(u) != len(v):
        return False
    for x in u:
        j = int(np.argmin([abs(x - y) for y in v]))
        if abs(x - v[j]) > tol * max(1.0, abs(x)):
            return False
        v.pop(j)
    return True


def vandermonde_product(z) -> complex:
    z = list(np.asarray(z, dtype=complex))
    p = 1.0 + 0j
    for i, j in combinations(range(len(z)), 2):
        p *= z[i] - z[j]
    return p


def vandermonde_jacobian(cfg: ZeroConfig) -> complex:
    """prod_{i<j} (z_i - z_j)."""
    return vandermonde_product(cfg.z)


def coefficient_jacobian_sign(m: int) -> int:
    """Sign relating det d(a_0..a_{m-1})/d(z_1..z_m) to prod_{i<j}(z_i - z_j).

    a_{m-k} = (-1)^k e_k and the Vandermonde rows come in the reverse order,
    which together contribute (-1)^{m^2} = (-1)^m.
    """
    return -1 if m % 2 else 1


def signed_vandermonde(cfg: ZeroConfig) -> complex:
    return coefficient_jacobian_sign(cfg.m) * vandermonde_jacobian(cfg)


def fd_jacobian(f, x, h: float) -> np.ndarray:
    """Central-difference Jacobian of a holomorphic map C^n -> C^k."""
    x = np.asarray(x, dtype=complex)
    cols = []
    for j in range(len(x)):
        e = np.zeros(len(x), dtype=complex)
        e[j] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.array(cols).T


def fd_coefficient_jacobian(cfg: ZeroConfig, step: float = DEFAULT_FD_STEP) -> np.ndarray:
    h = step * max(diameter(cfg.z), 1e-300)
    return fd_jacobian(coefficients, cfg.array, h)


@dataclass(frozen=True)
class VandermondeCheck:
    m: int
    fd_det: complex
    product: complex
    rel_err: float            # against prod (z_i - z_j) as written
    signed_rel_err: float     # against (-1)^m prod (z_i - z_j)


def vandermonde_check(cfg: ZeroConfig, step: float = DEFAULT_FD_STEP) -> VandermondeCheck:
    d = complex(np.linalg.det(fd_coefficient_jacobian(cfg, step)))
    p = vandermonde_jacobian(cfg)
    sp = coefficient_jacobian_sign(cfg.m) * p
    return VandermondeCheck(cfg.m, d, p, abs(d - p) / abs(p), abs(d - sp) / abs(sp))


# ------------------------------------------------------------------ trees
@dataclass(frozen=True)
class ZeroTree:
    edges: tuple              # (tail, head) index pairs; tail is the child
    vectors: tuple            # e_bar = z[head] - z[tail]
    comparability: float      # max over pairs of tree-path length / |z_i - z_j|
    parent: tuple

    @property
    def m(self) -> int:
        return len(self.parent)

    def endpoints(self, z, k: int) -> tuple:
        a, b = self.edges[k]
        return z[a], z[b]

    def relabel(self, perm) -> "ZeroTree":
        edges = tuple(self.edges[i] for i in perm)
        return ZeroTree(edges, tuple(self.vectors[i] for i in perm), self.comparability,
                        self.parent)


def build_zero_tree(cfg: ZeroConfig, root: int = 0) -> ZeroTree:
    """Euclidean minimum spanning tree (Prim), edges pointing to the root."""
    z = cfg.array
    m = len(z)
    D = pairwise_distances(z)
    if D[~np.eye(m, dtype=bool)].min() <= 1e-12 * max(D.max(), 1e-300):
        raise JacobianError("repeated zeros: the tree is undefined")
    parent = [-1] * m
    done = [False] * m
    heap = [(0.0, root, -1)]
    order = []
    while heap:
        d, v, p = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        parent[v] = p
        order.append(v)
        for w in range(m):
            if not done[w]:
                heapq.heappush(heap, (float(D[v, w]), w, v))
    edges = tuple((v, parent[v]) for v in order if parent[v] >= 0)
    vectors = tuple(complex(z[h] - z[t]) for t, h in edges)
    comp = _comparability(z, parent)
    return ZeroTree(edges, vectors, comp, tuple(parent))


def _path_to_root(parent, v):
    out = [v]
    while parent[v] >= 0:
        v = parent[v]
        out.append(v)
    return out


def tree_path_length(z, parent, i: int, j: int) -> float:
    pi, pj = _path_to_root(parent, i), _path_to_root(parent, j)
    common = set(pi) & set(pj)
    total = 0.0
    for path in (pi, pj):
        for a, b in zip(path, path[1:]):
            if a in common:
                break
            total += abs(z[a] - z[b])
    return total


def _comparability(z, parent) -> float:
    best = 1.0
    for i, j in combinations(range(len(z)), 2):
        best = max(best, tree_path_length(z, parent, i, j) / abs(z[i] - z[j]))
    return best


def zeros_from_edges(tree: ZeroTree, vectors, centroid: complex = 0j) -> np.ndarray:
    """Zeros with the given edge vectors and the given mean."""
    m = tree.m
    z = np.zeros(m, dtype=complex)
    root = tree.parent.index(-1)
    placed = {root}
    pending = list(zip(tree.edges, vectors))
    while pending:
        rest = [(e, v) for e, v in pending if e[1] not in placed]
        if len(rest) == len(pending):
            raise JacobianError("edges do not form a tree rooted at the root")
        for (t, h), v in pending:
            if h in placed:
                z[t] = z[h] - v
                placed.add(t)
        pending = rest
    return z - z.mean() + centroid


# ------------------------------------------------------------ strange comb
def d_plus(p: complex, a: complex, b: complex) -> float:
    return max(abs(p - a), abs(p - b))


def comb_lhs(z, tree: ZeroTree) -> float:
    out = 1.0
    for t, h in tree.edges:
        for p in z:
            out *= math.sqrt(d_plus(p, z[t], z[h]))
    return out


def strange_comb_ratio(cfg: ZeroConfig, tree: ZeroTree | None = None) -> float:
    tree = tree or build_zero_tree(cfg)
    z = cfg.array
    return comb_lhs(z, tree) / abs(vandermonde_product(z))


# --------------------------------------------------------------- quadrature
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.0])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15(f, a: float, b: float) -> tuple:
    """Kronrod 15-point value and |K15 - G7| on [a, b]; f is vectorized."""
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    fx = f(c + r * _NODES)
    k = r * np.dot(_WK, fx)
    g = r * np.dot(_WG15, fx)
    return k, abs(k - g)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    intervals: tuple
    halving_change: float     # relative change when every interval is split in two


def adaptive_gk(f, a: float, b: float, tol: float = DEFAULT_QUAD_TOL,
                max_intervals: int = 4000) -> QuadResult:
    """Globally adaptive Gauss-Kronrod 7-15 (refines the worst interval)."""
    v, e = gk15(f, a, b)
    heap = [(-e, a, b, v)]
    total, err = v, e
    while err > max(tol * abs(total), 1e-300):
        if len(heap) >= max_intervals:
            raise QuadratureError(f"no convergence with {max_intervals} intervals "
                                  f"(error estimate {err:.3g})")
        ne, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = gk15(f, lo, mid)
        v2, e2 = gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total = sum(x[3] for x in heap)
        err = sum(-x[0] for x in heap)
    ivs = tuple(sorted((lo, hi) for _, lo, hi, _ in heap))
    finer = 0j
    for lo, hi in ivs:
        mid = 0.5 * (lo + hi)
        finer += gk15(f, lo, mid)[0] + gk15(f, mid, hi)[0]
    change = abs(finer - total) / max(abs(total), 1e-300)
    return QuadResult(complex(total), float(err), ivs, float(change))


# ----------------------------------------------------------- period integrals
@dataclass(frozen=True)
class PeriodSet:
    omegas: tuple
    errors: tuple
    halving: tuple

    @property
    def self_convergence(self) -> float:
        return max(self.halving) if self.halving else 0.0


def _edge_integrand(z, a: complex, b: complex):
    ebar = b - a
    mid = 0.5 * (a + b)
    others = [p for p in z if abs(p - a) > 0 and abs(p - b) > 0]
    seed = np.sqrt(complex(np.prod([mid - p for p in others]))) if others else 1.0 + 0j
    denom = np.array([mid - p for p in others], dtype=complex)

    def f(theta):
        x = a + ebar * (1 - np.cos(theta)) / 2
        h = np.ones_like(x, dtype=complex)
        for p, d in zip(others, denom):
            h = h * np.sqrt((x - p) / d)
        return np.sin(theta) ** 2 * h

    return f, 1j * ebar * ebar / 4 * seed


def period_integral(z, a: complex, b: complex, tol: float = DEFAULT_QUAD_TOL) -> QuadResult:
    """Integral of sqrt(prod (x - z_p)) dx along the segment a -> b.

    With x = a + (b - a)(1 - cos t)/2 the endpoint factor becomes
    i (b - a)^2 sin^2(t) / 4 and the rest of the square root is continued
    from the principal value at the midpoint.
    """
    z = np.asarray(z, dtype=complex)
    for p in z:
        if abs(p - a) > 0 and abs(p - b) > 0:
            u = (p - a) / (b - a)
            if abs(u.imag) < 1e-12 and 0 < u.real < 1:
                raise JacobianError("a third zero lies on the edge; perturb the configuration")
    f, pref = _edge_integrand(z, a, b)
    r = adaptive_gk(f, 0.0, math.pi, tol)
    return QuadResult(pref * r.value, abs(pref) * r.error, r.intervals, r.halving_change)


def period_integrals(cfg: ZeroConfig, tree: ZeroTree | None = None,
                     tol: float = DEFAULT_QUAD_TOL) -> PeriodSet:
    tree = tree or build_zero_tree(cfg)
    z = cfg.array
    res = [period_integral(z, z[t], z[h], tol) for t, h in tree.edges]
    return PeriodSet(tuple(r.value for r in res), tuple(r.error for r in res),
                     tuple(r.halving_change for r in res))


def _align(val: complex, ref: complex) -> complex:
    return val if abs(val - ref) <= abs(val + ref) else -val


def _fd_step(z, step: float) -> float:
    D = pairwise_distances(z)
    off = D[~np.eye(len(z), dtype=bool)]
    return step * min(float(off.max()), 100.0 * float(off.min()))


@dataclass(frozen=True)
class PeriodJacobianReport:
    m: int
    det_abs: float
    vandermonde_abs: float
    ratio: float
    entry_ratio: float        # max_k,j |dOmega_k/dz_j| / prod_p d_+(z_p, e_k)^(1/2)
    self_convergence: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def period_jacobian_report(cfg: ZeroConfig, tree: ZeroTree | None = None,
                           step: float = DEFAULT_FD_STEP,
                           tol: float = DEFAULT_QUAD_TOL) -> PeriodJacobianReport:
    tree = tree or build_zero_tree(cfg)
    z0 = cfg.array
    base = period_integrals(cfg, tree, tol)
    h = _fd_step(z0, step)
    centroid = z0.mean()

    def omegas_from_edges(v):
        z = zeros_from_edges(tree, v, centroid)
        return np.array([_align(period_integral(z, z[t], z[hh], tol).value, ref)
                         for (t, hh), ref in zip(tree.edges, base.omegas)])

    J = fd_jacobian(omegas_from_edges, np.array(tree.vectors), h)
    det_abs = float(abs(np.linalg.det(J)))
    vprod = float(abs(vandermonde_product(z0)))

    def omegas_from_zeros(z):
        return np.array([_align(period_integral(z, z[t], z[hh], tol).value, ref)
                         for (t, hh), ref in zip(tree.edges, base.omegas)])

    Jz = fd_jacobian(omegas_from_zeros, z0, h)
    entry = 0.0
    for k, (t, hh) in enumerate(tree.edges):
        bound = math.prod(math.sqrt(d_plus(p, z0[t], z0[hh])) for p in z0)
        entry = max(entry, float(np.abs(Jz[k]).max()) / bound)
    return PeriodJacobianReport(cfg.m, det_abs, vprod, det_abs / vprod, entry,
                                base.self_convergence)


# ----------------------------------------------------------- residue of sqrt q
def residue_b(a, delta: float, n_points: int = 4096) -> complex:
    """Contour integral of sqrt(x^m + sum a_i x^i) over |x| = delta.

    ``a`` lists a_0..a_{m-1} (or a_0..a_{m-2}, with a_{m-1} = 0); m must be
    even.  The branch is the one asymptotic to x^{m/2}, tracked continuously
    around the circle.
    """
    a, m = _full_coeffs(a)
    if np.any(a):
        roots = coeffs_to_zeros(a)
        if float(np.abs(roots).max()) >= delta:
            raise BranchError("the contour does not enclose every zero")
    th = 2 * math.pi * np.arange(n_points) / n_points
    x = delta * np.exp(1j * th)
    q = np.polyval(np.concatenate([[1.0], a[::-1]]), x)
    w = np.sqrt(q)
    ref = x ** (m // 2)
    out = np.empty_like(w)
    prev = ref[0]
    for k in range(n_points):
        cand = w[k] if abs(w[k] - prev) <= abs(w[k] + prev) else -w[k]
        if k and abs(cand - prev) > 0.5 * abs(prev):
            raise BranchError("branch jump on the contour; enlarge delta")
        out[k] = cand
        prev = cand
    if abs(_align(w[0], out[-1]) - out[0]) > 0.5 * abs(out[0]):
        raise BranchError("branch does not close around the contour")
    return complex(np.sum(out * 1j * x) * (2 * math.pi / n_points))


def _full_coeffs(a) -> tuple:
    """a_0..a_{m-1} for even m from either a_0..a_{m-1} or a_0..a_{m-2}."""
    a = np.asarray(a, dtype=complex)
    if len(a) % 2:
        a = np.concatenate([a, [0]])
    return a, len(a)


def residue_leading(a) -> complex:
    a, m = _full_coeffs(a)
    return 1j * math.pi * a[m // 2 - 1]


def residue_exact(a) -> complex:
    """Closed forms for m = 2, 4, 6 (a_{m-1} = 0)."""
    a, m = _full_coeffs(a)
    if m in (2, 4):
        return 1j * math.pi * a[m // 2 - 1]
    if m == 6:
        return 1j * math.pi * (a[2] - a[4] ** 2 / 4)
    raise JacobianError("closed form only for m in {2, 4, 6}")


# --------------------------------------------------------- chain rule check
@dataclass(frozen=True)
class ChainReport:
    m: int
    fd_det: complex
    predicted: complex
    chain_constant: complex
    rel_err: float


def edge_map_matrix(tree: ZeroTree) -> np.ndarray:
    """Linear map z -> (e_bar_1..e_bar_{m-1}, a_{m-1})."""
    m = tree.m
    M = np.zeros((m, m))
    for k, (t, h) in enumerate(tree.edges):
        M[k, h] += 1
        M[k, t] -= 1
    M[m - 1, :] = -1
    return M


def jacobian_chain_check(cfg: ZeroConfig, tree: ZeroTree | None = None,
                         step: float = DEFAULT_FD_STEP) -> ChainReport:
    """d(a_0..a_{m-2})/d(e_bar) against the Vandermonde product.

    Along a_{m-1} = 0 the determinant equals
    (-1)^m prod (z_i - z_j) / det(z -> (e_bar, a_{m-1})).
    """
    tree = tree or build_zero_tree(cfg)
    z0 = cfg.array
    h = _fd_step(z0, step)

    def coeffs_from_edges(v):
        return coefficients(zeros_from_edges(tree, v))[:-1]

    J = fd_jacobian(coeffs_from_edges, np.array(tree.vectors), h)
    d = complex(np.linalg.det(J)) if J.size else 1.0
    const = coefficient_jacobian_sign(cfg.m) / float(np.linalg.det(edge_map_matrix(tree)))
    pred = const * vandermonde_product(z0)
    return ChainReport(cfg.m, d, pred, const, abs(d - pred) / abs(pred))


# ------------------------------------------------------------------- sweeps
def cluster_config(sep: float, width: float = 1.0, m: int = 4,
                   rng: np.random.Generator | None = None) -> ZeroConfig:
    """Two tight clusters at distance ``sep`` (cluster diameter ~ width)."""
    rng = rng or np.random.default_rng(0)
    k = m // 2
    left = -sep / 2 + width * (rng.random(k) - 0.5 + 1j * (rng.random(k) - 0.5))
    right = sep / 2 + width * (rng.random(m - k) - 0.5 + 1j * (rng.random(m - k) - 0.5))
    return ZeroConfig.centered(np.concatenate([left, right]))


def collision_config(base: ZeroConfig, gap: float, i: int = 0, j: int = 1) -> ZeroConfig:
    """Move z_j to within ``gap`` of z_i along their original direction."""
    z = base.array.copy()
    u = (z[j] - z[i]) / abs(z[j] - z[i])
    z[j] = z[i] + gap * u
    return ZeroConfig.centered(z)
