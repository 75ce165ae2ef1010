"""Counting multicurves in Dehn-Thurston coordinates.

Extremal length is replaced throughout by Minsky's product-region formula
with all multiplicative constants set to one:

    N(beta, y) = max_j sqrt(m_j^2 / s_j^2 + (t_j - tau_j m_j)^2 s_j^2)

where s_j is the square root of the extremal length of the j-th pants curve
at y and tau_j is the twist offset of y (zero unless y was produced by
twisting).  Because N is a maximum of per-curve terms, counts factor over
the pants curves once the parity constraints are accounted for.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

REL_TOL = 1e-12

GENUS2_PANTS = ((0, 1, 2), (0, 1, 2))


@dataclass(frozen=True)
class DTCoordinate:
    m: tuple
    t: tuple

    def __post_init__(self):
        if len(self.m) != len(self.t):
            raise ValueError("m and t must have the same length")
        for mi, ti in zip(self.m, self.t):
            if mi < 0:
                raise ValueError("intersection numbers must be nonnegative")
            if mi == 0 and ti < 0:
                raise ValueError("twist must be nonnegative when the intersection number is 0")

    @property
    def is_empty(self) -> bool:
        return not any(self.m) and not any(self.t)

    def scaled(self, k: int) -> "DTCoordinate":
        if k <= 0:
            raise ValueError("scale factor must be a positive integer")
        return DTCoordinate(tuple(k * x for x in self.m), tuple(k * x for x in self.t))

    def primitive(self) -> "DTCoordinate":
        g = reduce(math.gcd, self.m + self.t, 0)
        if g <= 1:
            return self
        return DTCoordinate(tuple(x // g for x in self.m), tuple(x // g for x in self.t))

    def as_tuple(self) -> tuple:
        return tuple(v for pair in zip(self.m, self.t) for v in pair)


@dataclass(frozen=True)
class MarkedPoint:
    genus: int
    s: tuple
    label: str = ""
    tau: tuple = ()
    pants: tuple | None = field(default=None)

    def __post_init__(self):
        n = 3 * self.genus - 3
        if self.genus < 2:
            raise ValueError("genus must be at least 2")
        if len(self.s) != n:
            raise ValueError(f"expected {n} values of s, got {len(self.s)}")
        if any(not (x > 0 and math.isfinite(x)) for x in self.s):
            raise ValueError("s values must be positive and finite")
        object.__setattr__(self, "s", tuple(float(x) for x in self.s))
        if not self.tau:
            object.__setattr__(self, "tau", (0.0,) * n)
        if len(self.tau) != n:
            raise ValueError("tau must have one entry per pants curve")
        if self.pants is None and self.genus == 2:
            object.__setattr__(self, "pants", GENUS2_PANTS)

    @property
    def n_curves(self) -> int:
        return 3 * self.genus - 3

    @property
    def dimension(self) -> int:
        return 6 * self.genus - 6

    def twisted(self, r: Sequence[int]) -> "MarkedPoint":
        """The point h^r y obtained by Dehn twisting r_i times around curve i."""
        return MarkedPoint(self.genus, self.s, self.label,
                           tuple(a + b for a, b in zip(self.tau, r)), self.pants)

    def scaled(self, c: float) -> "MarkedPoint":
        return MarkedPoint(self.genus, tuple(c * x for x in self.s), self.label, self.tau, self.pants)

    def bounded_constant(self) -> float:
        return max(max(x, 1 / x) for x in self.s)


def marked_point_from_dict(doc) -> MarkedPoint:
    try:
        return MarkedPoint(int(doc["genus"]), tuple(float(x) for x in doc["s"]),
                           str(doc.get("label", "")))
    except KeyError as exc:
        raise ValueError(f"marked point: missing field {exc.args[0]!r}") from None


# ------------------------------------------------------------------ norm
def _term(m, t, s, tau):
    u = t - tau * m
    return math.sqrt(m * m / (s * s) + u * u * s * s)


def quasi_sqrt_ext(beta: DTCoordinate, y: MarkedPoint) -> float:
    if len(beta.m) != y.n_curves:
        raise ValueError("coordinate size does not match the pants decomposition")
    return max(_term(m, t, s, tau) for m, t, s, tau in zip(beta.m, beta.t, y.s, y.tau))


def dehn_twist(beta: DTCoordinate, i: int, r: int) -> DTCoordinate:
    t = list(beta.t)
    t[i] += r * beta.m[i]
    return DTCoordinate(beta.m, tuple(t))


def parity_ok(m: Sequence[int], pants) -> bool:
    if pants is None:
        return True
    return all((m[a] + m[b] + m[c]) % 2 == 0 for a, b, c in pants)


def lemma_esst_constant(beta: DTCoordinate, y: MarkedPoint) -> float:
    """max(m_i, |t_i|) / N(beta, y); bounded by max(s_i, 1/s_i) for untwisted y."""
    n = quasi_sqrt_ext(beta, y)
    top = max(max(beta.m), max(abs(x) for x in beta.t))
    return top / n if n else 0.0


# ----------------------------------------------------------- A_s(L) lemma
@dataclass(frozen=True)
class AsReport:
    s: float
    L: float
    count: int
    bound: float
    passed: bool
    large_L_bound_ok: bool | None   # |A_s(L)| <= 4 L^2 once L > max(s, 1/s)


def count_As(s: float, L: float) -> AsReport:
    """Brute force |{(a, b) in Z>=0^2 : a s + b / s <= L}|."""
    if s <= 0 or L <= 0:
        raise ValueError("s and L must be positive")
    count = 0
    a = 0
    while a * s <= L * (1 + REL_TOL):
        rem = L - a * s
        b = 0
        while b / s <= rem + L * REL_TOL:
            count += 1
            b += 1
        a += 1
    c = max(s, 1 / s)
    bound = 4 * c * L * L
    big = None if L <= c else count <= 4 * L * L
    return AsReport(s, L, count, bound, count <= bound, big)


# ----------------------------------------------------- per-curve tables
def _curve_values(s: float, tau: float, L: float):
    """All (m, t) with m >= 0 (t >= 0 if m == 0) and term <= L, lexicographic."""
    out = []
    lim = L * L * (1 + 2 * REL_TOL)
    mmax = int(math.floor(L * s * (1 + REL_TOL)))
    for m in range(mmax + 1):
        rem = lim - m * m / (s * s)
        if rem < 0:
            continue
        w = math.sqrt(rem) / s
        lo = math.ceil(tau * m - w - 1e-9)
        hi = math.floor(tau * m + w + 1e-9)
        for t in range(lo, hi + 1):
            if m == 0 and t < 0:
                continue
            u = t - tau * m
            if m * m / (s * s) + u * u * s * s <= lim:
                out.append((m, t))
    return out


def _parity_vectors(n: int, pants):
    for p in itertools.product((0, 1), repeat=n):
        if parity_ok(p, pants):
            yield p


def _curve_tables(y: MarkedPoint, L: float):
    return [_curve_values(s, tau, L) for s, tau in zip(y.s, y.tau)]


def enumerate_multicurves(y: MarkedPoint, L: float) -> Iterator[DTCoordinate]:
    """Nonempty multicurves with N(beta, y) <= L in lexicographic order of
    (m_1, t_1, m_2, t_2, ...)."""
    tables = _curve_tables(y, L)
    for combo in itertools.product(*tables):
        m = tuple(c[0] for c in combo)
        if not parity_ok(m, y.pants):
            continue
        t = tuple(c[1] for c in combo)
        if not any(m) and not any(t):
            continue
        yield DTCoordinate(m, t)


def multicurve_blocks(y: MarkedPoint, L: float) -> Iterator[tuple]:
    """Vectorised enumeration: yields ((m_1, t_1), array of rows) per leading pair.

    Rows are full coordinate vectors (m_1, t_1, ..., m_n, t_n) in
    lexicographic order; the empty multicurve is omitted.
    """
    tables = [np.array(tb, dtype=np.int64).reshape(-1, 2) for tb in _curve_tables(y, L)]
    rest = tables[1:]
    if rest:
        grids = np.meshgrid(*[np.arange(len(tb)) for tb in rest], indexing="ij")
        idx = [g.reshape(-1) for g in grids]
        tail = np.concatenate([tb[i] for tb, i in zip(rest, idx)], axis=1)
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    tail_m = tail[:, 0::2]
    for lead in tables[0]:
        rows = np.concatenate([np.broadcast_to(lead, (len(tail), 2)), tail], axis=1)
        mm = np.concatenate([np.full((len(tail), 1), lead[0]), tail_m], axis=1)
        keep = np.ones(len(rows), dtype=bool)
        if y.pants is not None:
            for a, b, c in y.pants:
                keep &= (mm[:, a] + mm[:, b] + mm[:, c]) % 2 == 0
        keep &= np.any(rows != 0, axis=1)
        yield (int(lead[0]), int(lead[1])), rows[keep]


def _class_counts(y: MarkedPoint, L: float):
    counts = []
    for tb in _curve_tables(y, L):
        c = [0, 0]
        for m, _ in tb:
            c[m % 2] += 1
        counts.append(c)
    return counts


def count_multicurves(y: MarkedPoint, L: float) -> int:
    """E(y, L) exactly, by summing per-curve counts over parity classes."""
    counts = _class_counts(y, L)
    tot = 0
    for p in _parity_vectors(y.n_curves, y.pants):
        prod = 1
        for c, pi in zip(counts, p):
            prod *= c[pi]
        tot += prod
    return tot - 1          # the empty multicurve


def G(y: MarkedPoint, epsilon0: float) -> float:
    prod = 1.0
    for s in y.s:
        if s <= epsilon0:
            prod *= 1 / s
    return 1 + prod


@dataclass(frozen=True)
class CountReport:
    L: float
    E: int
    G: float
    bound: float
    ratio: float
    exponent: int
    C: float


def count_E(y: MarkedPoint, L: float, epsilon0: float = 0.25, C: float = 1.0,
            exponent: int | None = None) -> CountReport:
    h = y.dimension if exponent is None else exponent
    E = count_multicurves(y, L)
    g = G(y, epsilon0)
    scale = g * L ** h
    return CountReport(L, E, g, C * scale, E / scale, h, C)


def lambda_estimate(y: MarkedPoint, L: float) -> float:
    return count_multicurves(y, L) / L ** y.dimension


def lambda_sequence(y: MarkedPoint, L0: float, doublings: int) -> list:
    return [(L0 * 2 ** k, lambda_estimate(y, L0 * 2 ** k)) for k in range(doublings + 1)]


def lambda_limit(y: MarkedPoint) -> float:
    """Limit of E(y, L) / L^{6g-6}.

    Each per-curve half ellipse has area pi/2 whatever s is; the parity
    rules keep the fraction of parity vectors they allow.
    """
    n = y.n_curves
    dens = sum(1 for _ in _parity_vectors(n, y.pants)) / 2 ** n
    return (math.pi / 2) ** n * dens


def growth_exponent(y: MarkedPoint, Ls: Sequence[float]) -> float:
    x = np.log(np.asarray(Ls, dtype=float))
    v = np.log([count_multicurves(y, L) for L in Ls])
    return float(np.polyfit(x, v, 1)[0])


# ------------------------------------------------- distance and cocycles
def _log_norm(beta: DTCoordinate, y: MarkedPoint) -> float:
    return math.log(quasi_sqrt_ext(beta, y))


def busemann_cocycle(xi: DTCoordinate, x: MarkedPoint, y: MarkedPoint) -> float:
    if xi.is_empty:
        raise ValueError("xi must be a nonempty multicurve")
    p = xi.primitive()
    return _log_norm(p, x) - _log_norm(p, y)


def ps_density_ratio(xi: DTCoordinate, x: MarkedPoint, y: MarkedPoint) -> float:
    """(N(xi, y) / N(xi, x))^{6g-6}; depends only on the projective class of xi."""
    return math.exp(x.dimension * busemann_cocycle(xi, y, x))


def _per_curve_terms(tb, s, tau):
    arr = np.array(tb, dtype=float).reshape(-1, 2)
    u = arr[:, 1] - tau * arr[:, 0]
    return np.sqrt(arr[:, 0] ** 2 / s ** 2 + u * u * s * s)


def kerckhoff_distance(x: MarkedPoint, y: MarkedPoint, L: float) -> float:
    """sup over nonempty beta with N(beta, x) <= L of log(N(beta, x) / N(beta, y)).

    Exact over that set: the numerator's maximum is attained at some curve k,
    so the other coordinates are chosen to minimise the denominator subject
    to their own x-terms not exceeding the k-th and to the parity rules.
    """
    n = x.n_curves
    tables = _curve_tables(x, L)
    ax = [_per_curve_terms(tb, s, tau) for tb, s, tau in zip(tables, x.s, x.tau)]
    by = [_per_curve_terms(tb, s, tau) for tb, s, tau in zip(tables, y.s, y.tau)]
    par = [np.array([m % 2 for m, _ in tb]) for tb in tables]
    pvecs = list(_parity_vectors(n, x.pants))
    # per curve and parity: x-terms sorted, running minimum of y-terms
    mins = []
    for j in range(n):
        d = {}
        for q in (0, 1):
            sel = par[j] == q
            a, b = ax[j][sel], by[j][sel]
            order = np.argsort(a, kind="stable")
            d[q] = (a[order], np.minimum.accumulate(b[order]) if len(b) else b)
        mins.append(d)
    best = -math.inf
    for k in range(n):
        for i, (m, t) in enumerate(tables[k]):
            a = ax[k][i]
            if a == 0:
                continue
            for p in pvecs:
                if p[k] != m % 2:
                    continue
                worst = by[k][i]
                ok = True
                for j in range(n):
                    if j == k:
                        continue
                    aa, run = mins[j][p[j]]
                    pos = np.searchsorted(aa, a * (1 + 1e-15), side="right")
                    if pos == 0:
                        ok = False
                        break
                    worst = max(worst, run[pos - 1])
                if ok and worst > 0:
                    best = max(best, math.log(a / worst))
    return best


def kerckhoff_distance_bruteforce(x: MarkedPoint, y: MarkedPoint, L: float) -> float:
    best = -math.inf
    for b in enumerate_multicurves(x, L):
        best = max(best, math.log(quasi_sqrt_ext(b, x) / quasi_sqrt_ext(b, y)))
    return best


# ----------------------------------------------------- twist orbits
@dataclass(frozen=True)
class TwistOrbitReport:
    R: float
    count: int
    per_curve: tuple            # (min r_i, max r_i) admitted on each curve
    C2: float                   # max_i |r_i| s_i / e^R over admitted vectors
    probe_L: float


def _min_completion(tables, x, j, pj, pvecs):
    """Smallest possible max_{i != j} x-term of a completion with m_j parity pj."""
    n = x.n_curves
    best = math.inf
    for p in pvecs:
        if p[j] != pj:
            continue
        worst = 0.0
        for i in range(n):
            if i == j:
                continue
            if p[i] == 0:
                continue
            cand = [_term(m, t, x.s[i], x.tau[i]) for m, t in tables[i] if m % 2 == 1]
            if not cand:
                worst = math.inf
                break
            worst = max(worst, min(cand))
        best = min(best, worst)
    return best


def twist_orbit_count(x: MarkedPoint, y0: MarkedPoint, R: float, probe_L: float = 4.0) -> TwistOrbitReport:
    """Count r in Z^{3g-3} with d(h^r y0, x) <= R.

    Distance is measured over the fixed probe set P = {beta : N(beta, x) <=
    probe_L} as sup_P log(N(beta, h^r y0) / N(beta, x)).  For each curve j
    the binding probe with j-th coordinate b is the cheapest completion of b
    inside P, so the admitted set is a product of integer intervals.
    """
    n = x.n_curves
    tables = _curve_tables(x, probe_L)
    pvecs = list(_parity_vectors(n, x.pants))
    eR = math.exp(R)
    comp = {(j, q): _min_completion(tables, x, j, q, pvecs) for j in range(n) for q in (0, 1)}
    per = []
    for j in range(n):
        lo, hi = -math.inf, math.inf
        for m, t in tables[j]:
            if m == 0 and t == 0:
                continue
            c = comp[(j, m % 2)]
            U = max(_term(m, t, x.s[j], x.tau[j]), c)
            if not (U <= probe_L * (1 + 1e-12)):
                continue                     # b is not the coordinate of any probe
            cap = eR * U
            sy, tau = y0.s[j], y0.tau[j]
            if m == 0:
                if abs(t) * sy > cap * (1 + 1e-12):
                    lo, hi = 1, 0            # empty
                continue
            w2 = cap * cap - m * m / (sy * sy)
            if w2 < 0:
                lo, hi = 1, 0
                continue
            w = math.sqrt(w2) / sy
            lo = max(lo, (t - w) / m - tau)
            hi = min(hi, (t + w) / m - tau)
        a = math.ceil(lo - 1e-9)
        b = math.floor(hi + 1e-9)
        per.append((a, b) if a <= b else (1, 0))
    count = 1
    for a, b in per:
        count *= max(0, b - a + 1)
    c2 = 0.0
    if count:
        c2 = max(max(abs(a), abs(b)) * s for (a, b), s in zip(per, y0.s)) / eR
    return TwistOrbitReport(R, count, tuple(per), c2, probe_L)


def twist_distance(x: MarkedPoint, z: MarkedPoint, probe_L: float = 4.0) -> float:
    """sup over the probe set at x of log(N(beta, z) / N(beta, x)) (brute force)."""
    best = -math.inf
    for b in enumerate_multicurves(x, probe_L):
        best = max(best, math.log(quasi_sqrt_ext(b, z) / quasi_sqrt_ext(b, x)))
    return best


def twist_orbit_bruteforce(x: MarkedPoint, y0: MarkedPoint, R: float, box: int,
                           probe_L: float = 4.0) -> int:
    probes = list(enumerate_multicurves(x, probe_L))
    nx = np.array([quasi_sqrt_ext(b, x) for b in probes])
    M = np.array([b.m for b in probes], dtype=float)
    T = np.array([b.t for b in probes], dtype=float)
    s = np.array(y0.s)
    count = 0
    for r in itertools.product(range(-box, box + 1), repeat=x.n_curves):
        tau = np.array(y0.tau) + np.array(r)
        terms = np.sqrt(M ** 2 / s ** 2 + (T - tau * M) ** 2 * s ** 2)
        nz = terms.max(axis=1)
        if np.all(np.log(nz / nx) <= R + 1e-12):
            count += 1
    return count


def random_bounded_point(rng: np.random.Generator, genus: int = 2, CK: float = 2.0,
                         label: str = "") -> MarkedPoint:
    logs = rng.uniform(-math.log(CK), math.log(CK), size=3 * genus - 3)
    return MarkedPoint(genus, tuple(float(x) for x in np.exp(logs)), label)
