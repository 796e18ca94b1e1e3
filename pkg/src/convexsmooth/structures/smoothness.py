"""Numerical smoothness and membership checks for symbolic maps.

Structural reasons give ``Proven``; otherwise finite differences along lines
(Richardson extrapolation over a ladder of steps, batched over all sample
points) give ``PassedSampling`` or a replayable ``FailedWitness``.
"""

from __future__ import annotations

from math import comb
from typing import Callable, Sequence

import numpy as np
import sympy
from scipy.optimize import brentq

from ..errors import (CapabilityError, DomainError, NotDifferentiableError,
                      PreconditionError, WitnessInvalidError)
from ..verdict import Verdict, combine
from .descriptors import ConvexDescriptor, OpenSetDesc
from .symbolic import Expr, SymbolicMap, const, s

__all__ = [
    "STEP_LADDER",
    "boundary_points",
    "bump_build",
    "fd_residuals",
    "func_membership_subspace",
    "is_classically_smooth",
    "kriegl_check",
    "map_smoothness",
    "nonstandard_interval_obstruction",
    "parameter_samples",
    "plot_membership_subset",
    "singular_arguments",
]

STEP_LADDER = (0.02, 0.01, 0.005, 0.0025)
DEFAULT_TOL = 1e-4


# ---------------------------------------------------------------------------
# batched finite differences


def _central(F: Callable, t: np.ndarray, j: int, h: float) -> np.ndarray:
    offs = (j / 2.0 - np.arange(j + 1)) * h
    w = np.array([(-1) ** i * comb(j, i) for i in range(j + 1)], dtype=np.float64)
    vals = F((t[:, None] + offs[None, :]).ravel()).reshape(t.shape[0], j + 1)
    return vals @ w / h ** j


def _richardson(F, t, j, h):
    return (4.0 * _central(F, t, j, h / 2) - _central(F, t, j, h)) / 3.0


def _onesided(F: Callable, t: np.ndarray, j: int, h: float, sgn: float) -> np.ndarray:
    offs = sgn * np.arange(j + 1) * h
    w = np.array([(-1) ** (j - i) * comb(j, i) for i in range(j + 1)], dtype=np.float64)
    vals = F((t[:, None] + offs[None, :]).ravel()).reshape(t.shape[0], j + 1)
    return vals @ w / (sgn * h) ** j


def _onesided_richardson(F, t, j, h, sgn):
    return 2.0 * _onesided(F, t, j, h / 2, sgn) - _onesided(F, t, j, h, sgn)


def _judge(R, D):
    k = np.argmin(R, axis=0)
    cols = np.arange(R.shape[1])
    best = R[k, cols]
    converging = np.all(np.diff(D, axis=0) < 0, axis=0) & (D[-1] <= 0.5 * D[0])
    return np.where(converging, np.minimum(best, 0.0), best), k


def side_residuals(F: Callable, t, j: int, ladder=STEP_LADDER) -> np.ndarray:
    """Disagreement between left and right one-sided order-``j`` estimates (same rules as
    :func:`fd_residuals`)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    rows, diffs = [], []
    for h in ladder:
        hh = h / 2
        rp = _onesided_richardson(F, t, j, hh, 1.0)
        rm = _onesided_richardson(F, t, j, hh, -1.0)
        d = np.abs(rp - rm)
        with np.errstate(invalid="ignore"):
            res = d / np.maximum(1.0, np.maximum(np.abs(rp), np.abs(rm)))
        rows.append(np.where(np.isfinite(res), res, np.inf))
        diffs.append(np.where(np.isfinite(d), d, np.inf))
    return _judge(np.array(rows), np.array(diffs))[0]


def fd_residuals(F: Callable, t, j: int, ladder=STEP_LADDER) -> tuple[np.ndarray, np.ndarray]:
    """Richardson consistency residual per parameter over the step ladder.

    ``F`` maps a flat parameter array to values.  The residual is the best
    one over the ladder, except that estimates which keep converging as the
    step shrinks (the finest-step residual at most half the coarsest) count
    as consistent: that is how an order-``j`` derivative that exists but is
    only Hoelder continuous shows up.  Returns ``(residual, estimate)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    rows, diffs, ests = [], [], []
    for h in ladder:
        r1 = _richardson(F, t, j, h)
        r2 = _richardson(F, t, j, h / 2)
        d = np.abs(r1 - r2)
        with np.errstate(invalid="ignore"):
            res = d / np.maximum(1.0, np.abs(r2))
        rows.append(np.where(np.isfinite(res), res, np.inf))
        diffs.append(np.where(np.isfinite(d), d, np.inf))
        ests.append(r2)
    R, D, E = np.array(rows), np.array(diffs), np.array(ests)
    res, k = _judge(R, D)
    return res, E[k, np.arange(t.shape[0])]


# ---------------------------------------------------------------------------
# sampling


def _window(domain, n: int) -> np.ndarray:
    if domain is None or getattr(domain, "box", None) is None:
        return np.array([(-1.0, 1.0)] * n)
    return domain.window()


def parameter_samples(domain, n: int, n_random: int = 32, seed: int = 0) -> np.ndarray:
    """Grid points (lattice containing 0 where possible) plus random points of ``domain``."""
    W = _window(domain, n)
    lattice_size = {1: 41, 2: 9, 3: 5}.get(n, 3)
    axes = []
    for lo, hi in W:
        ax = np.linspace(lo, hi, lattice_size)
        # keep 0 and the integers exactly on the lattice when they fall inside
        extra = [v for v in (-1.0, 0.0, 1.0, 0.5 * (lo + hi)) if lo <= v <= hi]
        axes.append(np.unique(np.concatenate([ax, extra])))
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    rng = np.random.default_rng(seed)
    rnd = rng.uniform(W[:, 0], W[:, 1], size=(n_random, n))
    P = np.concatenate([mesh, rnd])
    if domain is not None:
        P = P[domain.contains_many(P)]
    return P


def _directions(n: int) -> np.ndarray:
    dirs = list(np.eye(n))
    if n > 1:
        dirs.append(np.ones(n) / np.sqrt(n))
    return np.array(dirs)


def _stencil_ok(domain, P: np.ndarray, v: np.ndarray, reach: float) -> np.ndarray:
    if domain is None:
        return np.ones(P.shape[0], dtype=bool)
    ok = np.ones(P.shape[0], dtype=bool)
    for sgn in (-1.0, 1.0):
        ok &= domain.contains_many(P + sgn * reach * v)
    return ok


def _is_open(domain) -> bool:
    return domain is None or domain.is_open() or getattr(domain, "asserted_open", False)


# ---------------------------------------------------------------------------
# classical smoothness


def singular_arguments(e: Expr) -> list:
    """Argument expressions whose zero set is where a node may fail to be smooth."""
    out = []
    for n in e.walk():
        if n.op in ("phi", "step"):
            out.append(n.args[0])
        elif n.op == "div" and not (n.args[1].op == "const"):
            out.append(n.args[1])
        elif n.op == "f":
            out.append(n.args[1])
    return out


def _add_crossings(m: SymbolicMap, P: np.ndarray, args: list) -> np.ndarray:
    """For one-parameter maps, add the parameters where a singular argument changes sign."""
    if m.n_in != 1 or not args or len(P) < 2:
        return P
    P = P[np.argsort(P[:, 0], kind="stable")]
    extra = []
    for g in args:
        vals = g.value(P)
        for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
            a, b = float(P[i, 0]), float(P[i + 1, 0])
            fn = lambda t, g=g: float(g.value(np.array([[t]]))[0])
            extra.append(brentq(fn, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if not extra:
        return P
    return np.concatenate([P, np.array(extra).reshape(-1, 1)])


def _locus_speed(args: list, P: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Per point, the largest rate at which a vanishing singular argument moves along ``v``
    (rounded up to a power of two, at least 1); steps are divided by it."""
    speed = np.ones(P.shape[0])
    for g in args:
        on = np.abs(g.value(P)) <= 1e-12
        if not on.any():
            continue
        try:
            parts = SymbolicMap((g,), P.shape[1]).partials(P[on], 1)[0]
        except (NotDifferentiableError, DomainError):
            continue
        grad = np.stack([parts[a] for a in sorted(parts, reverse=True) if sum(a) == 1], axis=1)
        rate = np.abs(grad @ v)
        speed[on] = np.maximum(speed[on], rate)
    return 2.0 ** np.ceil(np.log2(np.maximum(speed, 1.0)))


def _on_locus(args: list, P: np.ndarray) -> np.ndarray:
    mask = np.zeros(P.shape[0], dtype=bool)
    for g in args:
        mask |= np.abs(g.value(P)) <= 1e-12
    return mask


def is_classically_smooth(m: SymbolicMap, K: int = 3, sampler: Callable | None = None,
                          tol: float = DEFAULT_TOL, seed: int = 0,
                          ladder=STEP_LADDER) -> Verdict:
    """Smoothness of ``m`` on its open domain up to order ``K``.

    Away from the zero sets of singular arguments the map is a composition
    of smooth functions, so the finite-difference tests run at sampled
    points on those zero sets: central Richardson consistency plus agreement
    of left and right one-sided estimates.
    """
    if not _is_open(m.domain):
        raise DomainError("is_classically_smooth needs an open domain; use the subset or "
                          "subspace operations for other sets")
    if m.is_structurally_smooth():
        return Verdict.proven("expression uses only everywhere-smooth primitives")
    P = sampler() if sampler is not None else parameter_samples(m.domain, m.n_in, seed=seed)
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    reach = (K / 2.0 + 1.0) * max(ladder)
    checked = 0
    for i in range(m.n_out):
        comp = m.outputs[i]
        args = singular_arguments(comp)
        if not args:
            continue
        Pi = _add_crossings(m, P, args)
        Pi = Pi[_on_locus(args, Pi)]
        for v in _directions(m.n_in):
            base = Pi[_stencil_ok(m.domain, Pi, v, reach)]
            if not len(base):
                continue
            speeds = _locus_speed(args, base, v)
            for scale in np.unique(speeds):
                pts = base[speeds == scale]
                lad = tuple(h / scale for h in ladder)
                for j in range(1, K + 1):
                    res, est = _fd_on_lines(comp, pts, v, j, lad)
                    res = np.maximum(res, _fd_on_lines(comp, pts, v, j, lad, sides=True)[0])
                    checked += pts.shape[0]
                    bad = res > tol
                    if np.any(bad):
                        k = int(np.argmax(np.where(bad, res, -np.inf)))
                        pt, vv, jj = pts[k].copy(), v.copy(), j

                        def replay(pt=pt, vv=vv, jj=jj, comp=comp, lad=lad):
                            one = pt[None, :]
                            return float(max(_fd_on_lines(comp, one, vv, jj, lad)[0][0],
                                             _fd_on_lines(comp, one, vv, jj, lad, True)[0][0]))

                        return Verdict.failed(pt, j, float(res[k]),
                                              "finite-difference derivatives are inconsistent",
                                              replay=replay, tolerance=tol, samples=checked,
                                              direction=v, output=i, estimate=float(est[k]),
                                              step_scale=float(scale))
    return Verdict.passed(max(checked, len(P)), K, tol,
                          "finite differences Richardson-consistent near singular loci",
                          singular_points=checked)


def _fd_on_lines(comp: Expr, base: np.ndarray, v: np.ndarray, j: int, ladder, sides=False):
    """Residuals of order-``j`` derivatives of ``comp`` along ``p + t v`` at ``t = 0``."""
    nb = base.shape[0]

    def F(flat):
        k = flat.shape[0] // nb
        pts = np.repeat(base, k, axis=0) + flat.reshape(-1, 1) * v
        return comp.value(pts)

    if sides:
        return side_residuals(F, np.zeros(nb), j, ladder), None
    return fd_residuals(F, np.zeros(nb), j, ladder)


def map_smoothness(m: SymbolicMap, K: int = 3, tol: float = DEFAULT_TOL, seed: int = 0) -> Verdict:
    """Smoothness on an open domain, or diffeological smoothness on a convex one."""
    if m.is_structurally_smooth():
        return Verdict.proven("expression uses only everywhere-smooth primitives")
    if _is_open(m.domain):
        return is_classically_smooth(m, K, tol=tol, seed=seed)
    interior = _interior_view(m.domain)
    v1 = is_classically_smooth(m.with_domain(interior), K, tol=tol, seed=seed)
    if v1.is_failed or m.n_out != 1 or not m.domain.has_interior():
        return v1
    return combine([v1, kriegl_check(m, m.domain, K, n_boundary=40, tol=tol, seed=seed)])


def _interior_view(domain: ConvexDescriptor):
    cells = tuple(type(c)(tuple(type(k)(k.a, k.b, True) for k in c.constraints))
                  for c in domain.cells)
    return ConvexDescriptor(cells, domain.dim, f"int({domain.name})", True, domain.box)


# ---------------------------------------------------------------------------
# subset diffeology: plots into S


def _to_sympy(e: Expr, t):
    op, a = e.op, e.args
    if op == "coord":
        return t
    if op == "const":
        return sympy.Rational(e.param.numerator, e.param.denominator)
    if op == "add":
        return _to_sympy(a[0], t) + _to_sympy(a[1], t)
    if op == "sub":
        return _to_sympy(a[0], t) - _to_sympy(a[1], t)
    if op == "mul":
        return _to_sympy(a[0], t) * _to_sympy(a[1], t)
    if op == "neg":
        return -_to_sympy(a[0], t)
    if op == "pow":
        return _to_sympy(a[0], t) ** e.param
    raise CapabilityError(f"no polynomial form for {op}")


def _critical_parameters(p: SymbolicMap, S: ConvexDescriptor) -> list:
    """Real roots of ``a . p(t) - b`` for every constraint (polynomial one-parameter plots)."""
    if p.n_in != 1 or not p.is_polynomial() or not getattr(S, "polyhedral", False):
        return []
    t = sympy.Symbol("t", real=True)
    comps = [_to_sympy(e, t) for e in p.outputs]
    out = []
    for cell in S.cells:
        for c in cell.constraints:
            expr = sum(sympy.Rational(ai.numerator, ai.denominator) * ci
                       for ai, ci in zip(c.a, comps))
            expr = sympy.expand(expr - sympy.Rational(c.b.numerator, c.b.denominator))
            if expr.is_number:
                continue
            for r in sympy.Poly(expr, t).real_roots():
                out.append(float(r))
    return sorted(set(out))


IMAGE_SLACK = 1e-12  # rounding allowance for float images on closed faces


def plot_membership_subset(p: SymbolicMap, S, K: int = 3, tol: float = DEFAULT_TOL,
                           seed: int = 0) -> Verdict:
    """Is ``p`` a plot of the subset diffeology on ``S``?"""
    if p.n_out != S.dim:
        raise TypeError(f"plot has {p.n_out} outputs but the set lives in R^{S.dim}")
    if p.is_constant():
        pt = p.value(np.zeros((1, p.n_in)))[0]
        if S.contains(pt):
            return Verdict.proven("constant plot at a point of the set")
        return Verdict.failed(pt, 0, 1.0, "constant plot outside the set",
                              replay=lambda: float(not S.contains(pt)), tolerance=0.0)
    T = parameter_samples(p.domain, p.n_in, seed=seed)
    crit = _critical_parameters(p, S)
    if crit:
        extra = np.array([[r + d] for r in crit for d in (-1e-6, 0.0, 1e-6)])
        if p.domain is not None:
            extra = extra[p.domain.contains_many(extra)]
        T = np.concatenate([T, extra])
        T = T[np.argsort(T[:, 0], kind="stable")]
    img = p.value(T)
    inside = S.contains_many(img, slack=IMAGE_SLACK)
    if not inside.all():
        k = int(np.argmin(inside))
        t0, q = T[k].copy(), img[k].copy()
        return Verdict.failed(t0, 0, 1.0, "image leaves the set",
                              replay=lambda: float(not S.contains_many(
                                  p.value(t0[None, :]), slack=IMAGE_SLACK)[0]),
                              tolerance=0.0, samples=int(k) + 1, image=q)
    contain = Verdict.passed(len(T), None, 0.0, "image contained at sampled parameters",
                             critical_parameters=crit)
    return combine([contain, is_classically_smooth(p, K, tol=tol, seed=seed)],
                   reason="sampled containment and smoothness into the ambient space")


# ---------------------------------------------------------------------------
# subspace Sikorski structure: functions on S


def _pieces(witness):
    if isinstance(witness, SymbolicMap):
        return [(None, witness)]
    return list(witness)


def func_membership_subspace(g: SymbolicMap, S: ConvexDescriptor, witness=None, K: int = 3,
                             n: int = 400, tol: float = 1e-9, seed: int = 0) -> Verdict:
    """Is ``g`` locally the restriction of smooth functions on the ambient space?

    Without a witness only necessary conditions are checked, and membership
    is never affirmed.
    """
    if witness is None:
        v = kriegl_check(g, S, K, seed=seed)
        if v.is_failed:
            return v
        return Verdict.passed(v.samples, K, v.tolerance,
                              "necessary conditions hold; membership not affirmed",
                              membership_affirmed=False)
    rng = np.random.default_rng(seed)
    P = np.concatenate([S.sample(n, rng), S.boundary_samples(n // 2, rng)])
    gv = g.value(P)[:, 0]
    covered = np.zeros(P.shape[0], dtype=bool)
    verdicts = []
    for region, w in _pieces(witness):
        mask = np.ones(P.shape[0], dtype=bool) if region is None else region.contains_many(P)
        covered |= mask
        if mask.any():
            wv = w.value(P[mask])[:, 0]
            err = np.abs(wv - gv[mask]) / np.maximum(1.0, np.abs(gv[mask]))
            if np.any(err > tol):
                k = int(np.argmax(err))
                raise WitnessInvalidError("witness disagrees with the function",
                                          witness=P[mask][k].tolist())
        dom = region if isinstance(region, ConvexDescriptor) else None
        if isinstance(region, OpenSetDesc):
            dom = None
        verdicts.append(is_classically_smooth(w.with_domain(dom), K, seed=seed))
    if not covered.all():
        raise WitnessInvalidError("witness cover misses a point of the set",
                                  witness=P[int(np.argmin(covered))].tolist())
    v = combine(verdicts)
    if v.is_failed:
        return v
    if v.is_proven:
        return Verdict.proven("smooth extension witness verified", membership_affirmed=True)
    return Verdict.passed(P.shape[0], K, tol, "extension witness agrees; smoothness sampled",
                          membership_affirmed=True)


# ---------------------------------------------------------------------------
# Kriegl criterion on convex sets with interior


def _is_interior(S: ConvexDescriptor, P: np.ndarray, delta: float = 1e-7) -> np.ndarray:
    rng = np.random.default_rng(12345)
    U = rng.normal(size=(16, S.dim))
    U = np.concatenate([U / np.linalg.norm(U, axis=1, keepdims=True), np.eye(S.dim),
                        -np.eye(S.dim)])
    ok = S.contains_many(P)
    for u in U:
        ok &= S.contains_many(P + delta * u)
    return ok


def _vertices(S: ConvexDescriptor) -> np.ndarray:
    from itertools import combinations

    out = []
    for cell in S.cells:
        cons = cell.constraints
        for idx in combinations(range(len(cons)), S.dim):
            A = np.array([cons[i].a_float for i in idx])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            v = np.linalg.solve(A, np.array([float(cons[i].b) for i in idx]))
            out.append(v)
    if not out:
        return np.zeros((0, S.dim))
    V = np.unique(np.round(np.array(out), 12), axis=0) + 0.0
    return V[S.contains_many(V)]


def boundary_points(S: ConvexDescriptor, n: int, seed: int = 0) -> np.ndarray:
    """Up to ``n`` topological boundary points of ``S`` (vertices first)."""
    rng = np.random.default_rng(seed)
    V = _vertices(S)
    V = V[~_is_interior(S, V)] if len(V) else V
    B = S.boundary_samples(4 * n, rng)
    B = B[~_is_interior(S, B)] if len(B) else B
    P = np.concatenate([V, B])[:n]
    return P


DEFAULT_RADII = tuple(10.0 ** -k for k in range(2, 11))


def kriegl_check(g: SymbolicMap, S: ConvexDescriptor, K: int = 3, n_boundary: int = 200,
                 tol: float = DEFAULT_TOL, seed: int = 0, radii=DEFAULT_RADII,
                 n_sequences: int = 3, sampler: Callable | None = None) -> Verdict:
    """Do all partials of order ``<= K`` extend continuously to the boundary?

    At each boundary point ``s`` derivatives are evaluated along
    ``s + r (c_i - s)`` for interior targets ``c_i`` and decreasing ``r``.
    Each sequence must settle (Cauchy test on the last two radii) and the
    sequences must agree.
    """
    c0 = S.interior_point()
    if c0 is None:
        raise DomainError("set has empty interior; restrict to its affine span first")
    if g.n_out != 1:
        raise TypeError("kriegl_check expects a real-valued function")
    rng = np.random.default_rng(seed)
    pool = S.sample(64, rng)
    pool = pool[_is_interior(S, pool)]
    targets = [np.asarray(c0, dtype=np.float64)] + list(pool[: n_sequences - 1])
    if len(targets) < n_sequences:
        raise DomainError("could not find enough interior points")
    targets = np.array(targets[:n_sequences])
    B = sampler(rng) if sampler is not None else boundary_points(S, n_boundary, seed)
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    r = np.asarray(radii, dtype=np.float64)
    nb, nt, nr = B.shape[0], targets.shape[0], r.shape[0]
    pts = (B[:, None, None, :]
           + r[None, None, :, None] * (targets[None, :, None, :] - B[:, None, None, :]))
    flat = pts.reshape(-1, S.dim)
    try:
        partials = g.partials(flat, K)[0]
    except NotDifferentiableError as exc:
        return Verdict.failed(B[0], K, np.inf, f"derivatives unavailable: {exc}", tolerance=tol)
    order = sorted(partials, key=lambda a: (sum(a), tuple(-x for x in a)))
    for alpha in order:
        V = partials[alpha].reshape(nb, nt, nr)
        last = V[:, :, -1]
        scale = np.maximum(1.0, np.abs(last))
        cauchy = np.max(np.abs(V[:, :, -1] - V[:, :, -2]) / scale, axis=1)
        spread = np.max(np.abs(last - last[:, :1]) / scale, axis=1)
        res = np.maximum(cauchy, spread)
        res = np.where(np.isfinite(res), res, np.inf)
        if np.any(res > tol):
            k = int(np.argmax(res))
            s0 = B[k].copy()

            def replay(s0=s0, alpha=alpha):
                q = (s0[None, None, :] + r[None, :, None] * (targets[:, None, :] - s0))
                vals = g.partials(q.reshape(-1, S.dim), K)[0][alpha].reshape(nt, nr)
                sc = np.maximum(1.0, np.abs(vals[:, -1]))
                c = np.max(np.abs(vals[:, -1] - vals[:, -2]) / sc)
                sp = np.max(np.abs(vals[:, -1] - vals[0, -1]) / sc)
                return float(max(c, sp))

            return Verdict.failed(s0, sum(alpha), float(res[k]),
                                  "boundary limits of a partial derivative disagree or diverge",
                                  replay=replay, tolerance=tol, samples=nb,
                                  alpha=list(alpha), values=V[k, :, -3:].tolist())
    return Verdict.passed(nb, K, tol, "derivatives settle along interior approach sequences",
                          sequences=nt, radii=list(r))


# ---------------------------------------------------------------------------
# nonstandard interval and bumps


def _derivative_at(p: SymbolicMap, t0: np.ndarray) -> np.ndarray:
    try:
        parts = p.partials(t0[None, :], 1)[0]
        return np.array([parts[a][0] for a in parts if sum(a) == 1])
    except NotDifferentiableError:
        h = 1e-6
        out = []
        for i in range(p.n_in):
            e = np.zeros(p.n_in)
            e[i] = h
            sgn = 1.0 if p.domain is None or p.domain.contains(t0 + e) else -1.0
            q1 = p.value((t0 + sgn * e)[None, :])[0, 0]
            q2 = p.value((t0 + 2 * sgn * e)[None, :])[0, 0]
            q0 = p.value(t0[None, :])[0, 0]
            out.append(sgn * (-3 * q0 + 4 * q1 - q2) / (2 * h))
        return np.array(out)


def nonstandard_interval_obstruction(p: SymbolicMap, t0, tol: float = 1e-12) -> Verdict:
    """Necessary condition at a parameter where ``p`` attains 0 or 1: zero derivative."""
    t0 = np.atleast_1d(np.asarray(t0, dtype=np.float64))
    v = float(p.value(t0[None, :])[0, 0])
    if v not in (0.0, 1.0):
        raise PreconditionError(f"p(t0) = {v} is not an extreme value of [0,1]",
                                witness=t0.tolist())
    d = _derivative_at(p, t0)
    mag = float(np.max(np.abs(d))) if d.size else 0.0
    if mag > tol:
        return Verdict.failed(t0, 1, mag, "nonzero derivative at an extreme value: no local "
                              "factorization through a smooth map into [0,1]",
                              replay=lambda: float(np.max(np.abs(_derivative_at(p, t0)))),
                              tolerance=tol, value=v)
    return Verdict.passed(1, 1, tol, "derivative vanishes at the extreme value "
                          "(necessary condition only)", value=v)


def _plateau(z: Expr, c) -> Expr:
    """Smooth function of ``z``: 1 near ``c``, 0 outside a compact subset of ``(0, 1)``."""
    from fractions import Fraction

    c = Fraction(c)
    a1, a2 = c / 3, 2 * c / 3
    a3, a4 = c + (1 - c) / 3, c + 2 * (1 - c) / 3
    rise = s((z - const(a1)) * const(1 / (a2 - a1)))
    fall = s((const(a4) - z) * const(1 / (a4 - a3)))
    return rise * fall


def bump_build(h_list: Sequence[SymbolicMap], x0, target: OpenSetDesc | None = None) -> SymbolicMap:
    """``rho = B o (h_1, ..., h_N)`` with ``rho = 1`` near ``x0`` and support in the basic open."""
    h_list = list(h_list)
    if not h_list:
        raise PreconditionError("need at least one generator")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    target = target or OpenSetDesc.basic(h_list)
    if not target.contains(x0):
        raise PreconditionError("x0 is outside the basic open", witness=x0.tolist())
    centers = [float(hj.value(x0[None, :])[0, 0]) for hj in h_list]
    if not all(0.0 < c < 1.0 for c in centers):
        raise PreconditionError("every h_j(x0) must lie in (0, 1)", witness=centers)
    factors = [_plateau(hj.outputs[0], c) for hj, c in zip(h_list, centers)]
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return SymbolicMap((out,), h_list[0].n_in, None, "bump")
