"""Command-line interface.

Exit codes: 0 success, 1 malformed input, 2 failed invariant,
3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dehn_thurston as dt
from . import homology as hom
from . import jacobians as jac
from . import surgery as sg
from .config import RunConfig
from .delaunay import (DelaunayError, check_delaunay_lemma, delaunayize, euclidean_distance,
                       is_delaunay)
from .generators import random_genus2
from .saddle import detect_cylinders, enumerate_saddle_connections, systole
from .surface import (BUILTIN_ORIGAMIS, SurfaceError, builtin_origami, dumps_surface,
                      geodesic_flow, load_surface)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_CONVERGENCE = 0, 1, 2, 3


class InvariantFailure(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    pass


# --------------------------------------------------------------- helpers
def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def read_surface(spec: str):
    """A JSON surface file, or the name of a built-in origami."""
    name = spec.split(":", 1)[1] if spec.startswith("builtin:") else spec
    if name in BUILTIN_ORIGAMIS and not Path(spec).exists():
        return builtin_origami(name)
    return load_surface(spec)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def write_csv(rows, header, out: str | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    text = buf.getvalue()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def sample_seeds(seed: int, n: int) -> list:
    rng = np.random.default_rng(seed)
    return [int(x) for x in rng.integers(0, 2 ** 63 - 1, size=n)]


def ordered_map(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _marked(genus: int, s: str) -> dt.MarkedPoint:
    return dt.MarkedPoint(genus, tuple(_floats(s)))


# ------------------------------------------------------------- surface
def cmd_surface_validate(a, cfg):
    s = read_surface(a.surface)
    angles = ",".join(f"{x / math.pi:.6g}pi" for x in s.vertex_angles)
    print(f"kind {s.kind}")
    print(f"genus {s.genus}")
    print(f"area {s.area():.12g}")
    print(f"triangles {s.n_triangles}")
    print(f"vertices {s.n_vertices} angles {angles}")


def cmd_surface_flow(a, cfg):
    s = read_surface(a.surface)
    write_text(dumps_surface(geodesic_flow(s, a.t)), cfg.out)


def cmd_surface_systole(a, cfg):
    s = read_surface(a.surface)
    ell = systole(s)
    L = a.L if a.L else ell
    scs = enumerate_saddle_connections(s, L * (1 + 1e-12))
    rows = [(sc.start_vertex, sc.end_vertex, sc.holonomy[0], sc.holonomy[1], sc.length, sc.is_edge)
            for sc in scs]
    write_csv(rows, ["start", "end", "hx", "hy", "length", "is_edge"], cfg.out)
    if a.cylinders:
        for c in detect_cylinders(s, L):
            print(f"# cylinder core ({c.core_holonomy[0]:.6g}, {c.core_holonomy[1]:.6g}) "
                  f"circumference {c.circumference:.6g} height {c.height:.6g}", file=sys.stderr)
    print(f"# systole {ell!r}", file=sys.stderr)


# ------------------------------------------------------------ delaunay
def cmd_delaunay_check(a, cfg):
    s = read_surface(a.surface)
    d, st = delaunayize(s, tol=cfg.tol_incircle, with_stats=True)
    ok = is_delaunay(d, cfg.tol_incircle) and st.monotone
    print(f"flips {st.flips}", file=sys.stderr)
    print(f"delaunay {str(ok).lower()}", file=sys.stderr)
    print(f"certificate_monotone {str(st.monotone).lower()}", file=sys.stderr)
    write_text(dumps_surface(d), cfg.out)
    if not ok:
        raise InvariantFailure("Delaunay certificate failed")


def _lemma_sample(args):
    seed, t = args
    s = geodesic_flow(random_genus2(np.random.default_rng(seed)), t)
    rep = check_delaunay_lemma(delaunayize(s))
    return (seed, t, rep.systole, len(rep.connections), rep.violations,
            sum(1 for c in rep.connections if c[2]), rep.passed)


def cmd_delaunay_lemma(a, cfg):
    header = ["seed", "t", "systole", "connections", "violations", "on_threshold", "pass"]
    if a.surface:
        s = read_surface(a.surface)
        rep = check_delaunay_lemma(delaunayize(s, tol=cfg.tol_incircle))
        rows = [("-", 0.0, rep.systole, len(rep.connections), rep.violations,
                 sum(1 for c in rep.connections if c[2]), rep.passed)]
    else:
        ts = _floats(a.t_values)
        jobs = [(sd, t) for sd in sample_seeds(cfg.seed, a.samples) for t in ts]
        rows = ordered_map(_lemma_sample, jobs, cfg.jobs)
    write_csv(rows, header, cfg.out)
    if not all(r[-1] for r in rows):
        raise InvariantFailure("saddle connection shorter than sqrt(2) systole is not an edge")


# ------------------------------------------------------------- cocycle
def _automorphisms(a, s):
    if a.catalog:
        try:
            doc = json.loads(Path(a.catalog).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{a.catalog}: line {exc.lineno}: {exc.msg}") from None
        out = []
        for i, e in enumerate(doc):
            try:
                out.append(hom.Automorphism(tuple(map(tuple, e["linear_part"])),
                                            tuple(e["square_perm"]), str(e.get("surface_id", ""))))
            except (KeyError, TypeError):
                raise ValueError(f"{a.catalog}: entry {i}: needs linear_part and square_perm") from None
        return out
    M = np.array(_ints(a.linear)).reshape(2, 2)
    found = hom.find_automorphisms(s, M)
    if not found:
        raise InvariantFailure(f"no automorphism of the surface has linear part {M.tolist()}")
    return found[:1]


def cmd_cocycle_matrix(a, cfg):
    s = read_surface(a.surface)
    J = hom.intersection_matrix(s)
    rows = []
    bad = False
    for k, phi in enumerate(_automorphisms(a, s)):
        A = hom.mapping_class_matrix(s, phi)
        ok = hom.is_symplectic(A, J)
        bad |= not ok
        for i, row in enumerate(A):
            rows.append((k, i, " ".join(str(int(x)) for x in row), ok))
    write_csv(rows, ["automorphism", "row", "entries", "symplectic"], cfg.out)
    if bad:
        raise InvariantFailure("A^T J A != J")


def cmd_cocycle_svd(a, cfg):
    s = read_surface(a.surface)
    phi = _automorphisms(a, s)[0]
    A = hom.mapping_class_matrix(s, phi)
    rows = []
    bad = False
    for t in _floats(a.t):
        r = hom.singular_value_report(A, t)
        bad |= r.pairing_error > 1e-8 or abs(abs(r.det) - 1) > 1e-10
        rows.append((t, " ".join(repr(x) for x in r.singular_values), r.pairing_error,
                     r.det, r.oracle_error))
    write_csv(rows, ["t", "singular_values", "pairing_error", "det", "oracle_error"], cfg.out)
    if bad:
        raise InvariantFailure("singular values do not pair or volume is not preserved")


# -------------------------------------------------------------- counting
def cmd_count(a, cfg):
    y = _marked(a.genus, a.s)
    Ls = _floats(a.L)
    rows = []
    for L in Ls:
        r = dt.count_E(y, L, cfg.epsilon0)
        rows.append((L, r.E, r.G, r.ratio))
    write_csv(rows, ["L", "E", "G", "E_over_G_L_dim"], cfg.out)
    if len(Ls) >= 2:
        x = np.log(Ls)
        v = np.log([r[1] for r in rows])
        print(f"# slope {float(np.polyfit(x, v, 1)[0])!r} dimension {y.dimension}", file=sys.stderr)
    if any(rows[i][1] > rows[i + 1][1] for i in range(len(rows) - 1) if Ls[i] <= Ls[i + 1]):
        raise InvariantFailure("E(y, L) is not monotone in L")


def cmd_lambda(a, cfg):
    y = _marked(a.genus, a.s)
    rows = dt.lambda_sequence(y, a.L0, a.doublings)
    write_csv(rows, ["L", "lambda_estimate"], cfg.out)
    print(f"# limit {dt.lambda_limit(y)!r}", file=sys.stderr)


def cmd_distance(a, cfg):
    x = _marked(a.genus, a.x)
    y = _marked(a.genus, a.y)
    d = dt.kerckhoff_distance(x, y, a.L)
    rows = [("kerckhoff", d)]
    if a.xi:
        v = _ints(a.xi)
        xi = dt.DTCoordinate(tuple(v[0::2]), tuple(v[1::2]))
        rows.append(("busemann", dt.busemann_cocycle(xi, x, y)))
        rows.append(("ps_density_ratio", dt.ps_density_ratio(xi, x, y)))
    write_csv(rows, ["quantity", "value"], cfg.out)


def cmd_twist_orbit(a, cfg):
    x = _marked(a.genus, a.x)
    y0 = _marked(a.genus, a.y0) if a.y0 else x
    Rs = _floats(a.R)
    reps = [dt.twist_orbit_count(x, y0, R, a.probe_L) for R in Rs]
    write_csv([(r.R, r.count, r.C2) for r in reps], ["R", "count", "C2"], cfg.out)
    pos = [(r.R, r.count) for r in reps if r.count > 0]
    if len(pos) >= 2:
        slope = float(np.polyfit([p[0] for p in pos], np.log([p[1] for p in pos]), 1)[0])
        print(f"# slope {slope!r} expected {x.n_curves}", file=sys.stderr)


# ------------------------------------------------------------- surgery
def cmd_surgery_multicurve(a, cfg):
    s = read_surface(a.surface)
    s = delaunayize(s, tol=cfg.tol_incircle)
    if a.W:
        W = _ints(a.W)
        ot = sg.orient_edges(s)
        mc = sg.build_transverse_multicurve(ot, W)
    else:
        _, _, mc, _, _, _ = sg.surgery_step(s)
    rep = sg.check_properties(mc)
    S = mc.surface
    rows = []
    for e in S.edges:
        hp = e if S.hol[e, 0] > 0 else int(S.partner[e])
        rows.append((e, hp, e in mc.W, mc.crossings[e], int(mc.weights[hp])))
    write_csv(rows, ["edge", "positive_half_edge", "in_W", "crossings", "weight"], cfg.out)
    print(f"# theta {mc.theta!r} n {mc.n} bound {mc.bound} graph_vertices {mc.graph_vertices} "
          f"cycles {len(mc.cycles)}", file=sys.stderr)
    print(f"# properties a={rep.a_transverse} b={rep.b_crosses_W} c={rep.c_left_to_right} "
          f"d={rep.d_bounded}", file=sys.stderr)
    if not rep.ok:
        raise InvariantFailure("multicurve properties (a)-(d) failed")


def cmd_open_up(a, cfg):
    s = read_surface(a.surface)
    res = sg.open_up(s, a.epsilon)
    rows = [(r.step, r.systole_before, r.systole_after, r.rho1, r.n, r.m, r.flips, r.W_size,
             r.min_margin, r.euclidean_length, r.hodge_surrogate) for r in res.steps]
    header = ["step", "systole_before", "systole_after", "rho1", "n", "m", "flips", "W_size",
              "min_margin", "euclidean_length", "hodge_surrogate"]
    if a.log:
        write_csv(rows, header, a.log)
    if cfg.out:
        write_text(dumps_surface(res.surface), cfg.out)
    print(f"steps {len(res.steps)} theta {res.theta!r} kappa {res.kappa!r} "
          f"path_length {res.path_length!r} converged {str(res.converged).lower()}")
    if not res.converged:
        if res.error and "growth bound" in res.error:
            raise InvariantFailure(res.error)
        raise NonConvergence(res.error or "open-up did not converge")


# ----------------------------------------------------------- jacobians
def _jac_sample(args):
    m, seed, fd_step, tol_quad = args
    rng = np.random.default_rng(seed)
    cfg = jac.random_config(rng, m)
    tree = jac.build_zero_tree(cfg)
    v = jac.vandermonde_check(cfg, fd_step)
    ch = jac.jacobian_chain_check(cfg, tree, fd_step)
    pj = jac.period_jacobian_report(cfg, tree, fd_step, tol_quad)
    out = {
        "vandermonde_signed": (abs(v.fd_det / (jac.coefficient_jacobian_sign(m) * v.product)),
                               v.signed_rel_err),
        "chain_rule": (abs(ch.fd_det / ch.predicted), ch.rel_err),
        "tree_comparability": (tree.comparability, None),
        "strange_comb": (jac.strange_comb_ratio(cfg, tree), None),
        "period_jacobian": (pj.ratio, None),
        "period_entry": (pj.entry_ratio, None),
        "period_self_convergence": (pj.self_convergence, None),
    }
    if m % 2 == 0:
        a = rng.normal(size=m - 1) + 1j * rng.normal(size=m - 1)
        a *= 1e-2 * rng.random() / np.linalg.norm(a)
        b = jac.residue_b(a, 1.0)
        out["residue_quadratic_constant"] = (abs(b - jac.residue_leading(a)) / np.linalg.norm(a) ** 2,
                                             None)
    return out


def _stability(vals) -> float:
    """Relative growth of the running maximum from the first half to the full sample."""
    half = max(vals[: max(1, len(vals) // 2)])
    return max(vals) / half - 1 if half > 0 else 0.0


def jacobian_rows(m: int, samples: int, cfg: RunConfig) -> list:
    seeds = sample_seeds(cfg.seed, samples)
    res = ordered_map(_jac_sample, [(m, sd, cfg.fd_step, cfg.tol_quad) for sd in seeds], cfg.jobs)
    rows = []
    tols = {"vandermonde_signed": 1e-6, "chain_rule": 1e-5}
    for name in res[0]:
        ratios = [r[name][0] for r in res]
        errs = [r[name][1] for r in res]
        if name in tols:
            mean = float(np.mean(errs))
            ok = max(errs) <= tols[name]
        elif name == "tree_comparability":
            mean = _stability(ratios)
            ok = max(ratios) <= m - 1 + 1e-9
        elif name == "period_self_convergence":
            mean = float(np.mean(ratios))
            ok = max(ratios) <= 1e-8
        else:
            mean = _stability(ratios)
            ok = math.isfinite(max(ratios)) and mean <= 1.0
        rows.append((name, max(ratios), mean, ok))
    # analytic oracle, m = 2
    om = jac.period_integrals(jac.ZeroConfig((1, -1)), tol=cfg.tol_quad).omegas[0]
    err = abs(abs(om) - math.pi / 2) / (math.pi / 2)
    rows.append(("period_oracle_m2", abs(om) / (math.pi / 2), err, err <= 1e-9))
    # collision and separation sweeps on one configuration from the run seed
    base = jac.random_config(np.random.default_rng(seeds[0]), max(m, 3))
    coll = [jac.period_jacobian_report(jac.collision_config(base, 10.0 ** -k), None, cfg.fd_step,
                                       cfg.tol_quad).ratio for k in range(5)]
    med = float(np.median(coll))
    rows.append(("collision_sweep", max(coll) / med, float(np.std(coll) / med), max(coll) <= 10 * med))
    sep = [jac.strange_comb_ratio(jac.cluster_config(10.0 ** k, m=max(m, 4),
                                                     rng=np.random.default_rng(seeds[0])))
           for k in range(7)]
    med = float(np.median(sep))
    rows.append(("separation_sweep", max(sep), float(np.std(sep) / med), max(sep) <= 10 * med))
    return rows


def cmd_jacobian_verify(a, cfg):
    if a.m < 2:
        raise ValueError("m must be at least 2")
    if a.samples < 1:
        raise ValueError("samples must be positive")
    try:
        rows = jacobian_rows(a.m, a.samples, cfg)
    except jac.QuadratureError as exc:
        raise NonConvergence(str(exc)) from None
    write_csv(rows, ["name", "max_ratio", "mean_rel_err", "pass"], cfg.out)
    if not all(r[-1] for r in rows):
        raise InvariantFailure("a Jacobian check failed")


# ---------------------------------------------------------------- parser
class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error status, keeping 2 for invariants."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--config", help="JSON run configuration")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int)
    g.add_argument("--out")
    g.add_argument("--tol-incircle", type=float, dest="tol_incircle")
    g.add_argument("--tol-quad", type=float, dest="tol_quad")
    g.add_argument("--fd-step", type=float, dest="fd_step")
    g.add_argument("--epsilon0", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="teichcount", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def leaf(parent, name, fn, help_):
        q = parent.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    surf = sub.add_parser("surface", help="flat surface utilities").add_subparsers(dest="sub", required=True)
    q = leaf(surf, "validate", cmd_surface_validate, "validate a surface and print its invariants")
    q.add_argument("surface")
    q = leaf(surf, "flow", cmd_surface_flow, "apply the diagonal flow")
    q.add_argument("surface")
    q.add_argument("--t", type=float, required=True)
    q = leaf(surf, "systole", cmd_surface_systole, "systole and short saddle connections")
    q.add_argument("surface")
    q.add_argument("--L", type=float, help="list saddle connections up to this length")
    q.add_argument("--cylinders", action="store_true")

    dl = sub.add_parser("delaunay", help="Delaunay triangulations").add_subparsers(dest="sub", required=True)
    q = leaf(dl, "check", cmd_delaunay_check, "flip to a Delaunay triangulation")
    q.add_argument("surface")
    q = leaf(dl, "lemma", cmd_delaunay_lemma, "short saddle connections are edges")
    q.add_argument("surface", nargs="?")
    q.add_argument("--samples", type=int, default=20)
    q.add_argument("--t-values", default="0,0.5,1,2")

    co = sub.add_parser("cocycle", help="homology action").add_subparsers(dest="sub", required=True)
    for name, fn in (("matrix", cmd_cocycle_matrix), ("svd", cmd_cocycle_svd)):
        q = leaf(co, name, fn, f"mapping class {name}")
        q.add_argument("--surface", required=True)
        q.add_argument("--catalog", help="JSON list of {surface_id, linear_part, square_perm}")
        q.add_argument("--linear", default="1,2,0,1", help="a,b,c,d of the linear part")
        if name == "svd":
            q.add_argument("--t", default="0,1,2")

    q = leaf(sub, "count", cmd_count, "count multicurves E(y, L)")
    q.add_argument("--genus", type=int, default=2)
    q.add_argument("--s", required=True)
    q.add_argument("--L", required=True)

    q = leaf(sub, "lambda", cmd_lambda, "estimate the Hubbard-Masur function")
    q.add_argument("--genus", type=int, default=2)
    q.add_argument("--s", required=True)
    q.add_argument("--L0", type=float, default=4.0)
    q.add_argument("--doublings", type=int, default=4)

    q = leaf(sub, "distance", cmd_distance, "Kerckhoff distance and Busemann cocycle")
    q.add_argument("--genus", type=int, default=2)
    q.add_argument("--x", required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--L", type=float, default=6.0)
    q.add_argument("--xi", help="m1,t1,m2,t2,... of a multicurve")

    q = leaf(sub, "twist-orbit", cmd_twist_orbit, "count twist-orbit points in a ball")
    q.add_argument("--genus", type=int, default=2)
    q.add_argument("--x", required=True)
    q.add_argument("--y0")
    q.add_argument("--R", default="1,2,3,4,5")
    q.add_argument("--probe-L", type=float, default=4.0, dest="probe_L")

    su = sub.add_parser("surgery", help="systole surgery").add_subparsers(dest="sub", required=True)
    q = leaf(su, "multicurve", cmd_surgery_multicurve, "transverse multicurve for W")
    q.add_argument("surface")
    q.add_argument("--W", help="half-edge ids; default: edges no longer than sqrt(2) systole")
    for parent in (su, sub):
        q = leaf(parent, "open-up", cmd_open_up, "inflate the systole to epsilon")
        q.add_argument("--surface", required=True)
        q.add_argument("--epsilon", type=float, required=True)
        q.add_argument("--log")

    q = leaf(sub, "jacobian-verify", cmd_jacobian_verify, "Jacobian identities and bounds")
    q.add_argument("--m", type=int, default=4)
    q.add_argument("--samples", type=int, default=100)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(a.config) if a.config else RunConfig()
        cfg = cfg.override(seed=a.seed, jobs=a.jobs, out=a.out, tol_incircle=a.tol_incircle,
                           tol_quad=a.tol_quad, fd_step=a.fd_step, epsilon0=a.epsilon0)
        a.fn(a, cfg)
    except (InvariantFailure, sg.SurgeryError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NonConvergence, jac.QuadratureError, DelaunayError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SurfaceError, ValueError, KeyError, OSError, hom.HomologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
