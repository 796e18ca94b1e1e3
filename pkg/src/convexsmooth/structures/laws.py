"""Finite-query law suites for the structure handles, and the reflexivity report."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..verdict import Verdict
from .descriptors import (Cell, Constraint, ConvexDescriptor, OpenSetDesc, open_interval,
                          orthant, real_space, region_X, square_pyramid, unit_interval)
from .handles import (Ch, Di, E, Phi_membership, ProbeFamily, anchors, nonstandard_interval,
                      standard_chen, standard_diffeology)
from .smoothness import func_membership_subspace
from .symbolic import (SymbolicMap, b, b_eps, chi, const, coord, coords, exp, fnode, h, phi,
                       s, step)

__all__ = [
    "ReflexivityEntry",
    "ReflexivityReport",
    "axiom_suite",
    "chen_queries",
    "exhaustion_laws",
    "nonstandard_distinction",
    "real_queries",
    "reflexivity_report",
    "roundtrip_suite",
    "x_queries",
]

HALF = Fraction(1, 2)


def _m(*outs, dom=None, name=""):
    return SymbolicMap.of(*outs, n_in=1, domain=dom, name=name)


def real_queries() -> list:
    """Twenty maps ``R -> R`` with their expected membership in the standard diffeology."""
    t = coord(0)
    yes = [t, t * t, exp(t), s(t), b(t), 1 / (1 + t * t), t * exp(-t), chi(t),
           h(1, t, t), const(3), t ** 3 - t, b_eps(HALF, t)]
    no = [phi(1, t), step(t), phi(2, t), phi(1, t * t), step(t - HALF), phi(1, HALF - t),
          1 / (1 + t * t) + step(t), phi(1, t) * exp(t)]
    return ([(_m(e, name=str(e)), True) for e in yes]
            + [(_m(e, name=str(e)), False) for e in no])


def x_queries() -> list:
    """Twenty plots ``R -> R^2`` with their expected membership in the diffeology of X."""
    t = coord(0)
    yes = [(t, t * t), (t, 1 + t * t), (exp(t), const(0)), (t * t, const(0)), (t, exp(t)),
           (s(t), const(1)), (t, t ** 4), (t ** 3, t * t), (const(1), const(1)), (s(t), s(t))]
    no = [(t, const(0)), (-(t * t), const(0)), (t, t * t - Fraction(1, 100)),
          (t, 1 + phi(2, t)), (t, step(t)), (phi(1, t), const(1)), (t, 1 + step(t)),
          (t - 1, t * t), (b(t), t * t), (1 + t, 1 + phi(1, t))]
    out = []
    for outs, want in [(q, True) for q in yes] + [(q, False) for q in no]:
        out.append((_m(*outs, name="(" + ", ".join(map(str, outs)) + ")"), want))
    return out


def chen_queries() -> list:
    """Maps ``[0,1] -> [0,1]`` with expected membership in the standard and nonstandard
    Chen structures, as ``(map, standard, nonstandard)``."""
    t = coord(0)
    I = unit_interval()
    rows = [
        (t, True, False),
        (t * t, True, False),
        (1 - t, True, False),
        (3 * t * t - 2 * t ** 3, True, True),
        (s(t), True, True),
        (const(0), True, True),
        (const(HALF), True, True),
        ((t + t * t) * HALF, True, False),
        (4 * t * (1 - t), True, False),
        (step(t - HALF), False, False),
        (phi(1, t), False, False),
    ]
    return [(_m(e, dom=I, name=str(e)), a, c) for e, a, c in rows]


# ---------------------------------------------------------------------------
# functor laws


def _row(name, want, got: Verdict, extra=None) -> dict:
    d = {"query": name, "expected": want, "verdict": got.status.name, "accepted": got.ok}
    if extra:
        d.update(extra)
    return d


def roundtrip_suite(which: str = "R", K: int = 3, probes: ProbeFamily | None = None) -> dict:
    """``Di(Ch(D))`` against ``D`` on a twenty-query suite."""
    probes = probes or ProbeFamily()
    S = real_space(1) if which == "R" else region_X()
    D = standard_diffeology(S, K)
    DD = Di(Ch(D, probes), probes)
    queries = real_queries() if which == "R" else x_queries()
    rows = []
    for q, want in queries:
        before = D.member(q)
        after = DD.member(q)
        rows.append({"query": q.name, "expected": want, "before": before.status.name,
                     "after": after.status.name, "agree": before.ok == after.ok,
                     "matches_expected": before.ok == want})
    agree = sum(r["agree"] for r in rows)
    return {"structure": D.name, "queries": len(rows), "agree": agree,
            "passed": agree == len(rows) and all(r["matches_expected"] for r in rows),
            "rows": rows}


def exhaustion_laws(K: int = 3, probes: ProbeFamily | None = None) -> dict:
    """``C <= E(C)`` and ``E(E(C)) == E(C)`` verdict-wise, for both structures on [0,1]."""
    probes = probes or ProbeFamily()
    out = {}
    for C in (standard_chen(unit_interval(), K), nonstandard_interval(K)):
        EC = E(C, probes)
        EEC = E(EC, probes)
        rows = []
        for q, std, ns in chen_queries():
            v = C.member(q)
            ve = EC.member(q)
            vee = EEC.member(q)
            rows.append({"query": q.name, "in_C": v.ok, "in_E": ve.ok, "in_EE": vee.ok,
                         "inclusion": (not v.ok) or ve.ok, "idempotent": ve.ok == vee.ok})
        out[C.name] = {
            "inclusion": all(r["inclusion"] for r in rows),
            "idempotent": all(r["idempotent"] for r in rows),
            "rows": rows,
        }
    out["passed"] = all(v["inclusion"] and v["idempotent"] for v in out.values()
                        if isinstance(v, dict))
    return out


def nonstandard_distinction(K: int = 3, probes: ProbeFamily | None = None) -> dict:
    """The identity of [0,1] separates the two Chen structures; probe compositions do not."""
    probes = probes or ProbeFamily()
    I = unit_interval()
    ident = _m(coord(0), dom=I, name="identity")
    Cs, Cn = standard_chen(I, K), nonstandard_interval(K)
    vs, vn, ve = Cs.member(ident), Cn.member(ident), E(Cn, probes).member(ident)
    probe_rows = []
    for f in probes.open_probes(I):
        q = ident.compose(f)
        probe_rows.append({"probe": f.name, "standard": Cs.member(q).ok,
                           "nonstandard": Cn.member(q).ok})
    obstruction = (vn.witness or {}).get("residual")
    passed = (vs.ok and vn.is_failed and ve.ok and obstruction is not None
              and abs(obstruction - 1.0) < 1e-12
              and all(r["standard"] and r["nonstandard"] for r in probe_rows))
    return {"standard": vs.to_dict(), "nonstandard": vn.to_dict(), "exhaustion": ve.to_dict(),
            "obstruction": obstruction, "probes": probe_rows, "passed": bool(passed)}


# ---------------------------------------------------------------------------
# axiom spot checks


def _reparams_R(rng, n):
    t = coord(0)
    pool = [t * Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            + Fraction(int(rng.integers(-3, 4)), 4) for _ in range(n)]
    pool += [t ** 3, s(t) - HALF, t * t - t, exp(t) - 1, b(t)]
    return [_m(e, name=str(e)) for e in pool]


def _reparams_I():
    t = coord(0)
    I = unit_interval()
    return [_m(e, dom=I, name=str(e)) for e in
            (t * t, s(t), (t + t * t) * HALF, 1 - t, 3 * t * t - 2 * t ** 3, t ** 3)]


def _restrict(p: SymbolicMap, dom) -> SymbolicMap:
    return p.with_domain(dom, f"{p.name}|{dom.name}")


def axiom_suite(K: int = 3, n_pairs: int = 20, seed: int = 0) -> dict:
    """Constants, precomposition stability and locality for every handle kind."""
    rng = np.random.default_rng(seed)
    results = {}
    I = unit_interval()

    # diffeologies on R and X
    for which, S, queries in (("R", real_space(1), real_queries()),
                              ("X", region_X(), x_queries())):
        D = standard_diffeology(S, K)
        consts = [SymbolicMap(tuple(const(Fraction(float(v))) for v in a), 1, None, "const")
                  for a in anchors(S, 3)]
        c_ok = all(D.member(c).ok for c in consts)
        accepted = [q for q, want in queries if D.member(q).ok]
        reps = _reparams_R(rng, 10)
        pairs = []
        for _ in range(n_pairs):
            p = accepted[int(rng.integers(len(accepted)))]
            g = reps[int(rng.integers(len(reps)))]
            pairs.append({"plot": p.name, "reparam": g.name, "ok": D.member(p.compose(g)).ok})
        U = open_interval(-1, 1)
        V1, V2 = open_interval(-1, Fraction(1, 4)), open_interval(Fraction(-1, 4), 1)
        glue = []
        for q, want in queries:
            r1, r2 = D.member(_restrict(q, V1)), D.member(_restrict(q, V2))
            if r1.ok and r2.ok:
                glue.append({"plot": q.name, "ok": D.member(_restrict(q, U)).ok})
        results[D.name] = {
            "D1_constants": c_ok,
            "D2_precomposition": {"pairs": len(pairs), "ok": sum(p["ok"] for p in pairs)},
            "D3_locality": {"glued": len(glue), "ok": sum(g["ok"] for g in glue)},
        }

    # Chen structures on [0,1]
    for C in (standard_chen(I, K), nonstandard_interval(K)):
        consts = [_m(const(v), dom=I) for v in (0, HALF, 1)]
        c_ok = all(C.member(c).ok for c in consts)
        accepted = [q for q, _, _ in chen_queries() if C.member(q).ok]
        reps = _reparams_I()
        pairs = []
        for _ in range(n_pairs):
            p = accepted[int(rng.integers(len(accepted)))]
            g = reps[int(rng.integers(len(reps)))]
            pairs.append({"plot": p.name, "reparam": g.name, "ok": C.member(p.compose(g)).ok})
        left = ConvexDescriptor((Cell((Constraint((-1,), 0), Constraint((1,), Fraction(3, 5), True))),),
                                1, "[0,3/5)", box=((0.0, 0.6),))
        right = ConvexDescriptor((Cell((Constraint((-1,), Fraction(-2, 5), True), Constraint((1,), 1))),),
                                 1, "(2/5,1]", box=((0.4, 1.0),))
        glue = []
        for q, _, _ in chen_queries():
            if C.member(_restrict(q, left)).ok and C.member(_restrict(q, right)).ok:
                glue.append({"plot": q.name, "ok": C.member(q).ok})
        results[C.name] = {
            "C1_constants": c_ok,
            "C2_precomposition": {"pairs": len(pairs), "ok": sum(p["ok"] for p in pairs)},
            "C3_locality": {"glued": len(glue), "ok": sum(g["ok"] for g in glue)},
        }

    # subspace Sikorski structure on X
    X = region_X()
    x, y = coords(2)
    g1 = SymbolicMap.of(x, n_in=2, name="x")
    g2 = SymbolicMap.of(y * exp(x), n_in=2, name="y exp(x)")
    comp = SymbolicMap.of(exp(x) * y * exp(x) + x * x, n_in=2, name="F(g1, g2)")
    s1 = func_membership_subspace(comp, X, witness=comp).ok and all(
        func_membership_subspace(g, X, witness=g).ok for g in (g1, g2))
    lower = OpenSetDesc.basic([SymbolicMap.of(y, n_in=2)], -1.0, 1.0)
    upper = OpenSetDesc.basic([SymbolicMap.of(y, n_in=2)], 0.5, 10.0)
    s2 = func_membership_subspace(g1, X, witness=[(lower, g1), (upper, g1)]).ok
    results["F_sub(X)"] = {"S1_postcomposition": s1, "S2_locality": s2}

    def law_ok(entry):
        ok = True
        for v in entry.values():
            if isinstance(v, bool):
                ok &= v
            else:
                ok &= v["ok"] == v.get("pairs", v.get("glued"))
        return ok

    results["passed"] = all(law_ok(v) for v in results.values())
    return results


# ---------------------------------------------------------------------------
# reflexivity


@dataclass
class ReflexivityEntry:
    name: str
    phi: Verdict
    sikorski: Verdict
    affirmed: bool
    flag: str
    blowup: dict | None = None

    def to_dict(self) -> dict:
        return {"candidate": self.name, "phi": self.phi.to_dict(),
                "sikorski": self.sikorski.to_dict(), "membership_affirmed": self.affirmed,
                "flag": self.flag, "blowup_certificate": self.blowup}


@dataclass
class ReflexivityReport:
    set_name: str
    entries: list = field(default_factory=list)

    @property
    def flag(self) -> str:
        flags = {e.flag for e in self.entries}
        if "tension" in flags:
            return "tension"
        if flags <= {"consistent"}:
            return "consistent"
        return "inconsistent"

    def to_dict(self) -> dict:
        return {"set": self.set_name, "flag": self.flag,
                "entries": [e.to_dict() for e in sorted(self.entries, key=lambda e: e.name)]}


def reflexivity_report(S: ConvexDescriptor, candidates, K: int = 3,
                       blowup_ys=None) -> ReflexivityReport:
    """Compare diffeological smoothness with Sikorski membership for each candidate."""
    from ..counterexample import verify_blowup

    D = standard_diffeology(S, K)
    report = ReflexivityReport(S.name)
    for g in candidates:
        v_phi = Phi_membership(g, D, K)
        global_formula = "f" not in g.uses()
        witness = g.with_domain(None) if global_formula else None
        v_sik = func_membership_subspace(g, S, witness=witness, K=K)
        affirmed = bool(v_sik.details.get("membership_affirmed", False)) and v_sik.ok
        cert = None
        if v_phi.ok and not affirmed and not global_formula:
            ys = np.logspace(-1, -6, 12) if blowup_ys is None else blowup_ys
            cert = verify_blowup(1, ys).to_dict()
            flag = "tension"
        elif v_phi.ok == affirmed:
            flag = "consistent"
        else:
            flag = "inconsistent"
        report.entries.append(ReflexivityEntry(g.name or g.label(), v_phi, v_sik, affirmed,
                                               flag, cert))
    return report


def default_candidates(S: ConvexDescriptor) -> list:
    """Five polynomial/exponential functions on ``S`` (or ``f`` itself on X)."""
    if S.name == "X":
        x, y = coords(2)
        return [SymbolicMap.of(fnode(x, y), n_in=2, name="f")]
    xs = coords(S.dim)
    x = xs[0]
    y = xs[1] if S.dim > 1 else xs[0]
    last = xs[-1]
    exprs = [("x*y", x * y), ("exp(x+y)", exp(x + y)), ("x^2 - y + 1", x * x - y + 1),
             ("x*last^3", x * last ** 3), ("exp(-x)*y^2", exp(-x) * y * y)]
    return [SymbolicMap.of(e, n_in=S.dim, name=n) for n, e in exprs]


PRESET_SETS = {"X": region_X, "pyramid": square_pyramid, "orthant": lambda: orthant(2)}
