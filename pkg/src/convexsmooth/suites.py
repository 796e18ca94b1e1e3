"""Named verification suites run by ``convexsmooth suite``."""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np

from .bounds import CmTable
from .config import RunConfig
from .counterexample import (f_eval, plot_composition_check, verify_blowup,
                             verify_ck_bounded)
from .reports import CheckResult, Report, expected_outcomes
from .structures import laws
from .structures.descriptors import (OpenSetDesc, halfspace, locally_closed_at, region_X,
                                     square_pyramid)
from .structures.handles import E, nonstandard_interval, standard_chen
from .structures.smoothness import bump_build, kriegl_check
from .structures.symbolic import SymbolicMap, b_eps, const, coord, coords, fnode, h, phi

__all__ = ["SUITES", "dense_term_sup", "run_suite", "suite_names"]


# ---------------------------------------------------------------------------
# individual checks: each returns (passed, details)


def blowup_ys(n: int = 50, lo: float = 1e-8, hi: float = 0.5) -> np.ndarray:
    return np.logspace(np.log10(hi), np.log10(lo), n)


def check_blowup(k: int):
    def run(cfg: RunConfig, table: CmTable):
        cert = verify_blowup(k, blowup_ys())
        return cert.passed, cert.to_dict()
    return run


def x_test_points(n: int, seed: int) -> np.ndarray:
    """Points of X: interior, on the ray, and in the zero region ``y >= 2``."""
    rng = np.random.default_rng(seed)
    n_ray, n_top = n // 5, n // 10
    inner = np.c_[rng.uniform(-2, 2, n - n_ray - n_top), rng.uniform(1e-6, 2, n - n_ray - n_top)]
    ray = np.c_[rng.uniform(0, 2, n_ray), np.zeros(n_ray)]
    top = np.c_[rng.uniform(-2, 2, n_top), rng.uniform(2, 4, n_top)]
    return np.concatenate([inner, ray, top])


def check_f_eval(cfg: RunConfig, table: CmTable):
    P = x_test_points(cfg.eval_points, cfg.seed)
    widths, nested, zeros = [], True, True
    for p in P:
        v = f_eval(p, tol=cfg.tol, table=table)
        widths.append(v.width)
        coarse = f_eval(p, M=max(1, v.M - 1), table=table)
        fine = f_eval(p, M=min(table.max_index, v.M + 1), table=table)
        nested &= coarse.lo <= v.lo <= v.hi <= coarse.hi and v.lo <= fine.lo <= fine.hi <= v.hi
        if p[1] >= 2.0:
            zeros &= v.lo == 0.0 and v.hi == 0.0
    origin = f_eval((0.0, 0.0), tol=cfg.tol, table=table)
    ok = max(widths) <= cfg.tol and nested and zeros and origin.lo > 0
    return ok, {"points": len(P), "max_width": max(widths), "nested": bool(nested),
                "zero_region_exact": bool(zeros), "origin": origin.to_dict()}


def _strip_points(m: int, n: int, rng) -> np.ndarray:
    """Points where ``0 < h_m < 2`` with x covering the transition of ``b_{1/m}``.

    Half the samples crowd the ends of ``(0, 1)``; a third lie in the cutoff band ``[1, 2)``.
    """
    eps = 1.0 / m
    x = rng.uniform(-eps - 0.05, 1 - eps + 0.05, n)
    u = rng.random(n)
    hv = np.where(rng.random(n) < 0.5, u, u ** 4)
    hv = np.where(rng.random(n) < 0.25, 1 - u ** 4, hv)
    hv = np.where(rng.random(n) < 1 / 3, 1 + u, hv)
    xs = coord(0)
    bv = SymbolicMap.of(b_eps(Fraction(1, m), xs), n_in=1).value(x[:, None])[:, 0]
    return np.c_[x, hv + bv]


def dense_term_sup(m: int, n: int, seed: int = 0) -> float:
    """``max_{|alpha| <= m} |d^alpha (phi_m o h_m)|`` over ``n`` strip samples, via symbolic jets."""
    rng = np.random.default_rng(seed + m)
    x, y = coords(2)
    term = SymbolicMap.of(phi(m, h(m, x, y)), n_in=2)
    worst = 0.0
    for chunk in np.array_split(_strip_points(m, n, rng), max(1, n // 20000)):
        J = term.partials(chunk, m)[0]
        worst = max(worst, max(float(np.abs(v).max()) for v in J.values()))
    return worst


def check_cm_soundness(cfg: RunConfig, table: CmTable, max_m: int = 8):
    ratios = {}
    for m in range(1, max_m + 1):
        ratios[m] = dense_term_sup(m, cfg.oracle_samples, cfg.seed) / table.values[m]
    return all(r <= 1.0 for r in ratios.values()), {"samples": cfg.oracle_samples,
                                                    "sup_over_cm": ratios}


def _plot(name, *outs):
    return SymbolicMap.of(*outs, n_in=1, name=name)


def check_plot(kind: str):
    t = coord(0)
    plots = {"parabola-above": _plot("(t, 1+t^2)", t, 1 + t * t),
             "parabola": _plot("(t, t^2)", t, t * t),
             "constant": _plot("(1/2, 0)", const(Fraction(1, 2)), const(0))}

    def run(cfg: RunConfig, table: CmTable):
        p = plots[kind]
        # t = 0 exactly, so the parabola through the origin touches the ray
        params = np.union1d(np.linspace(-0.9, 0.9, 13), [0.0])
        on_ray = [float(tt) for tt in params if p.value(np.array([[tt]]))[0, 1] == 0.0]
        v = plot_composition_check(p, 4, params, tol=cfg.fd_tol, table=table)
        return v.ok, {"plot": p.name, "verdict": v.to_dict(), "ray_parameters": on_ray}
    return run


def check_ck(k: int):
    def run(cfg: RunConfig, table: CmTable):
        cert = verify_ck_bounded(k, n=cfg.ck_samples, seed=cfg.seed, table=table)
        return cert.passed, cert.to_dict()
    return run


def f_map() -> SymbolicMap:
    x, y = coords(2)
    return SymbolicMap.of(fnode(x, y), n_in=2, name="f")


def pyramid_polys() -> list:
    x, y, z = coords(3)
    return [SymbolicMap.of(x * y * z, n_in=3, name="xyz"),
            SymbolicMap.of(x * x - y * z + 1, n_in=3, name="x^2 - yz + 1"),
            SymbolicMap.of(z ** 3 + x * y * y, n_in=3, name="z^3 + xy^2")]


def phi1_halfspace():
    x, y = coords(2)
    return SymbolicMap.of(phi(1, x), n_in=2, name="phi[1](x)"), halfspace((-1, 0), 0, name="{x>=0}")


def check_kriegl(case: str):
    def run(cfg: RunConfig, table: CmTable):
        K = cfg.structure_order
        if case == "f-X":
            vs = [kriegl_check(f_map(), region_X(), K, cfg.n_boundary, cfg.fd_tol, cfg.seed)]
        elif case == "pyramid":
            vs = [kriegl_check(g, square_pyramid(), K, cfg.n_boundary, cfg.fd_tol, cfg.seed)
                  for g in pyramid_polys()]
        else:
            g, S = phi1_halfspace()
            vs = [kriegl_check(g, S, K, cfg.n_boundary, cfg.fd_tol, cfg.seed)]
        return all(v.ok for v in vs), {"verdicts": [v.to_dict() for v in vs]}
    return run


def check_kriegl_witness(cfg: RunConfig, table: CmTable):
    g, S = phi1_halfspace()
    v = kriegl_check(g, S, cfg.structure_order, cfg.n_boundary, cfg.fd_tol, cfg.seed)
    ok = v.is_failed and v.witness.get("order") == 2 and v.replay_check()
    return bool(ok), {"verdict": v.to_dict()}


def check_locality_origin(cfg: RunConfig, table: CmTable):
    v = locally_closed_at(region_X(), (0, 0), seed=cfg.seed)
    return v.ok, {"verdict": v.to_dict()}


def check_locality_origin_witness(cfg: RunConfig, table: CmTable):
    v = locally_closed_at(region_X(), (0, 0), seed=cfg.seed)
    seq = np.asarray(v.witness.get("sequence", []), dtype=np.float64) if v.witness else np.empty(0)
    n = np.arange(1, len(seq) + 1)
    shape = (len(seq) > 0 and np.allclose(seq[:, 1], 0.0)
             and np.allclose(seq[:, 0] * n, seq[0, 0]) and seq[0, 0] < 0)
    ok = v.is_failed and bool(shape) and v.replay_check()
    return bool(ok), {"verdict": v.to_dict()}


def check_locality_samples(cfg: RunConfig, table: CmTable):
    X = region_X()
    rng = np.random.default_rng(cfg.seed)
    P = X.sample(90, rng)
    P = np.concatenate([P, np.c_[rng.uniform(0.01, 2, 10), np.zeros(10)]])
    bad = []
    for p in P:
        if not locally_closed_at(X, p, seed=cfg.seed).ok:
            bad.append(p.tolist())
    return not bad, {"points": len(P), "failures": bad}


def check_bump(cfg: RunConfig, table: CmTable, n: int = 10_000):
    x, y = coords(2)
    gens = [SymbolicMap.of(x, n_in=2), SymbolicMap.of(y + x * x, n_in=2)]
    x0 = np.array([0.3, 0.4])
    target = OpenSetDesc.basic(gens)
    rho = bump_build(gens, x0, target)
    rng = np.random.default_rng(cfg.seed)
    P = rng.uniform(-2, 2, (n, 2))
    v = rho.value(P)[:, 0]
    r = 1e-3 * np.sqrt(rng.random(n))
    th = rng.uniform(0, 2 * np.pi, n)
    near = rho.value(x0 + np.c_[r * np.cos(th), r * np.sin(th)])[:, 0]
    outside = ~target.contains_many(P)
    inv = {"range": bool(np.all((v >= 0) & (v <= 1))),
           "one_near_x0": bool(np.all(near == 1.0)),
           "zero_outside_support": bool(np.all(v[outside] == 0.0))}
    return all(inv.values()), dict(inv, samples=n, outside=int(outside.sum()))


# functor checks


def check_roundtrip(which: str):
    def run(cfg: RunConfig, table: CmTable):
        r = laws.roundtrip_suite(which, cfg.structure_order, cfg.probes)
        return r["passed"], r
    return run


def check_exhaustion(cfg: RunConfig, table: CmTable):
    r = laws.exhaustion_laws(cfg.structure_order, cfg.probes)
    return r["passed"], r


def _identity():
    from .structures.descriptors import unit_interval

    return SymbolicMap.of(coord(0), n_in=1, domain=unit_interval(), name="identity")


def check_chen_identity(which: str):
    def run(cfg: RunConfig, table: CmTable):
        K = cfg.structure_order
        if which == "standard":
            from .structures.descriptors import unit_interval

            v = standard_chen(unit_interval(), K).member(_identity())
        elif which == "nonstandard":
            v = nonstandard_interval(K).member(_identity())
        else:
            v = E(nonstandard_interval(K), cfg.probes).member(_identity())
        return v.ok, {"verdict": v.to_dict()}
    return run


def check_nonstandard_distinction(cfg: RunConfig, table: CmTable):
    r = laws.nonstandard_distinction(cfg.structure_order, cfg.probes)
    return r["passed"], r


# reflexivity


def check_reflexivity(set_name: str):
    def run(cfg: RunConfig, table: CmTable):
        S = laws.PRESET_SETS[set_name]()
        rep = laws.reflexivity_report(S, laws.default_candidates(S), cfg.structure_order)
        d = rep.to_dict()
        if set_name == "X":
            certs = [e["blowup_certificate"] for e in d["entries"]]
            ok = rep.flag == "tension" and all(c is not None and c["passed"] for c in certs)
        else:
            ok = rep.flag == "consistent" and len(d["entries"]) == 5
        return ok, d
    return run


def axiom_checks(cfg: RunConfig, table: CmTable) -> list:
    res = laws.axiom_suite(cfg.structure_order, seed=cfg.seed)
    out = []
    for handle, entry in res.items():
        if handle == "passed":
            continue
        for law, v in entry.items():
            if isinstance(v, bool):
                ok, det = v, {}
            else:
                total = v.get("pairs", v.get("glued"))
                ok, det = v["ok"] == total, v
            out.append((f"axioms/{handle}/{law}", ok, det))
    return out


SUITES = {
    "paper-examples": [
        ("blowup-k1", check_blowup(1)),
        ("blowup-k2", check_blowup(2)),
        ("blowup-k3", check_blowup(3)),
        ("f-eval", check_f_eval),
        ("cm-table-soundness", check_cm_soundness),
        ("plot-composition/parabola-above", check_plot("parabola-above")),
        ("plot-composition/parabola", check_plot("parabola")),
        ("plot-composition/constant", check_plot("constant")),
        ("ck-bounded-k1", check_ck(1)),
        ("ck-bounded-k2", check_ck(2)),
        ("kriegl/f-X", check_kriegl("f-X")),
        ("kriegl/pyramid-polynomials", check_kriegl("pyramid")),
        ("kriegl/phi1-halfspace", check_kriegl("phi1")),
        ("kriegl/phi1-halfspace-witness", check_kriegl_witness),
        ("locally-closed/X-origin", check_locality_origin),
        ("locally-closed/X-origin-witness", check_locality_origin_witness),
        ("locally-closed/X-samples", check_locality_samples),
        ("bump-invariants", check_bump),
    ],
    "axioms": [("axioms", None)],
    "functors": [
        ("roundtrip/D_std(R)", check_roundtrip("R")),
        ("roundtrip/D_X", check_roundtrip("X")),
        ("exhaustion-laws", check_exhaustion),
        ("identity/C_std", check_chen_identity("standard")),
        ("identity/C_ns", check_chen_identity("nonstandard")),
        ("identity/E(C_ns)", check_chen_identity("exhaustion")),
        ("nonstandard-distinction", check_nonstandard_distinction),
    ],
    "reflexivity": [
        ("X", check_reflexivity("X")),
        ("pyramid", check_reflexivity("pyramid")),
        ("orthant", check_reflexivity("orthant")),
    ],
}


def suite_names() -> list:
    return list(SUITES) + ["all"]


def run_suite(name: str, cfg: RunConfig, table: CmTable | None = None,
              only: set | None = None, log=None) -> Report:
    """Run a named suite (or ``all``) and return its report."""
    if name not in suite_names():
        raise KeyError(name)
    table = table or cfg.table()
    manifest = expected_outcomes()
    report = Report(name, cfg.hash(), cfg.hashed_fields())
    names = list(SUITES) if name == "all" else [name]
    for suite in names:
        for check, fn in SUITES[suite]:
            if only is not None and check not in only:
                continue
            t0 = time.perf_counter()
            if fn is None:
                rows = axiom_checks(cfg, table)
                dt = (time.perf_counter() - t0) / max(1, len(rows))
                results = [CheckResult(n, ok, manifest.get(n, "pass"), det, dt)
                           for n, ok, det in rows]
            else:
                ok, det = fn(cfg, table)
                key = f"{suite}/{check}"
                results = [CheckResult(key, bool(ok), manifest.get(key, "pass"), det,
                                       time.perf_counter() - t0)]
            for r in results:
                report.checks.append(r)
                if log:
                    log(report.summary_lines()[-1])
    return report
