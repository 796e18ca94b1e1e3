"""Diffeologies, Sikorski structures and Chen structures as membership procedures.

A handle stores a kind tag and either a base set or a parent handle; its
``member`` method returns a :class:`~convexsmooth.verdict.Verdict`.  The
functors ``Di``, ``Ch`` and the exhaustion ``E`` produce ``transformed`` /
``exhaustion`` handles whose membership quantifies over a finite probe
family of smooth maps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

import numpy as np

from ..errors import DomainError
from ..verdict import Verdict, combine
from .descriptors import (ConvexDescriptor, descriptor_from_dict, open_interval,
                          open_unit_square, unit_interval, unit_square)
from .smoothness import (IMAGE_SLACK, _vertices, func_membership_subspace, map_smoothness,
                         nonstandard_interval_obstruction, parameter_samples,
                         plot_membership_subset)
from .symbolic import SymbolicMap, const, coord, coords, s

__all__ = [
    "Ch",
    "ChenHandle",
    "Ch_membership",
    "Di",
    "DiffeologyHandle",
    "Di_membership",
    "E",
    "Phi_membership",
    "Pi_membership",
    "ProbeFamily",
    "SikorskiHandle",
    "anchors",
    "default_generators",
    "exhaustion_membership",
    "handle_from_dict",
    "handle_to_dict",
    "nonstandard_interval",
    "standard_chen",
    "standard_diffeology",
    "subspace_structure",
]

DEFAULT_K = 3


# ---------------------------------------------------------------------------
# probe families


def anchors(S, k: int = 3, seed: int = 0) -> np.ndarray:
    """``k`` deterministic points of ``S``: vertices first, then interior and sampled points."""
    if S is None:
        base = np.array([[-1.0], [1.0], [0.5]])
        return base[:k]
    pts = []
    if S.is_open():
        W = S.window()
        lo, hi = W[:, 0], W[:, 1]
        for w in (0.1, 0.9, 0.5, 0.3, 0.7):
            pts.append(lo + w * (hi - lo))
    else:
        V = _vertices(S)
        pts.extend(list(V))
        c = S.interior_point()
        if c is not None:
            pts.append(np.round(c, 6))
    pts = [p for p in pts if S.contains(p)]
    pts += list(S.sample(max(0, k - len(pts)) + 4, np.random.default_rng(seed)))
    out = []
    for p in pts:
        if not any(np.allclose(p, q) for q in out):
            out.append(np.asarray(p, dtype=np.float64))
        if len(out) == k:
            break
    return np.array(out)


def _qvec(p) -> list:
    return [Fraction(float(v)) for v in np.ravel(p)]


def _affine_curve(p, q, dom, name) -> SymbolicMap:
    t = coord(0)
    P, Q = _qvec(p), _qvec(q)
    return SymbolicMap(tuple(const(a) + (const(b) - const(a)) * t for a, b in zip(P, Q)),
                       1, dom, name)


def _reparam_curve(p, q, shape, dom, name) -> SymbolicMap:
    P, Q = _qvec(p), _qvec(q)
    return SymbolicMap(tuple(const(a) + const(b - a) * shape for a, b in zip(P, Q)), 1, dom, name)


def _triangle(p0, p1, p2, dom, name) -> SymbolicMap:
    u, v = coords(2)
    A, B, C = _qvec(p0), _qvec(p1), _qvec(p2)
    outs = tuple(const(a) + const(b - a) * u + const(c - b) * (u * v)
                 for a, b, c in zip(A, B, C))
    return SymbolicMap(outs, 2, dom, name)


@dataclass(frozen=True)
class ProbeFamily:
    """Finite family of smooth maps from convex sets, built from anchor points.

    ``kinds`` selects among affine segments, quadratic folds (which reach an
    endpoint with zero velocity), bridge reparametrizations (which sit flat
    on both endpoints) and triangle maps from a square.
    """

    kinds: tuple = ("affine", "quadratic", "bridge", "triangle")
    n_anchors: int = 3
    identity: bool = True

    def _build(self, target, open_domain: bool) -> list:
        A = anchors(target, self.n_anchors)
        dom1 = open_interval(0, 1) if open_domain else unit_interval()
        dom2 = open_unit_square() if open_domain else unit_square()
        t = coord(0)
        shapes = {"quadratic": (2 * t - 1) ** 2, "bridge": s(3 * t - 1)}
        out = []
        pairs = [(i, j) for i in range(len(A)) for j in range(i + 1, len(A))]
        for i, j in pairs:
            if "affine" in self.kinds:
                out.append(_affine_curve(A[i], A[j], dom1, f"affine[{i},{j}]"))
            for kind in ("quadratic", "bridge"):
                if kind in self.kinds:
                    out.append(_reparam_curve(A[i], A[j], shapes[kind], dom1, f"{kind}[{i},{j}]"))
        if "triangle" in self.kinds and len(A) >= 3:
            out.append(_triangle(A[0], A[1], A[2], dom2, "triangle"))
        return out

    def _identity(self, target) -> list:
        dim = 1 if target is None else target.dim
        return [SymbolicMap(tuple(coords(dim)), dim, target, "identity")] if self.identity else []

    def open_probes(self, target) -> list:
        """Maps ``V -> target`` with ``V`` convex open."""
        ident = self._identity(target) if target is None or target.is_open() else []
        return self._build(target, True) + ident

    def convex_probes(self, target) -> list:
        """Maps ``C -> target`` with ``C`` convex (the identity of a convex target included)."""
        return self._build(target, False) + self._identity(target)

    def to_dict(self) -> dict:
        return {"kinds": list(self.kinds), "n_anchors": self.n_anchors, "identity": self.identity}

    @classmethod
    def from_dict(cls, d: dict) -> "ProbeFamily":
        return cls(tuple(d.get("kinds", cls.kinds)), int(d.get("n_anchors", 3)),
                   bool(d.get("identity", True)))


DEFAULT_PROBES = ProbeFamily()


def _is_open_domain(p: SymbolicMap) -> bool:
    return p.domain is None or p.domain.is_open()


# ---------------------------------------------------------------------------
# handles


def default_generators(S: ConvexDescriptor, k: int = 3) -> tuple:
    """Constants, affine plots between anchors, and for X the two test plots."""
    A = anchors(S, k)
    gens = [SymbolicMap(tuple(const(Fraction(float(v))) for v in a), 1, None, f"const{i}")
            for i, a in enumerate(A)]
    dom = open_interval(0, 1)
    for i in range(len(A)):
        for j in range(i + 1, len(A)):
            gens.append(_affine_curve(A[i], A[j], dom, f"segment[{i},{j}]"))
    if S.name == "X":
        t = coord(0)
        gens.append(SymbolicMap((t, 1 + t * t), 1, None, "(t, 1+t^2)"))
        gens.append(SymbolicMap((t, t * t), 1, None, "(t, t^2)"))
    return tuple(gens)


@dataclass(frozen=True)
class DiffeologyHandle:
    kind: str
    base: Any = None
    parent: Any = None
    generators: tuple = ()
    K: int = DEFAULT_K
    probes: ProbeFamily = DEFAULT_PROBES
    name: str = ""

    @property
    def underlying(self):
        return self.base if self.parent is None else self.parent.underlying

    def member(self, p: SymbolicMap) -> Verdict:
        if not _is_open_domain(p):
            raise DomainError("plots of a diffeology have open domains")
        if self.kind == "standard-subset":
            return plot_membership_subset(p, self.base, self.K)
        if self.kind == "transformed":
            return Di_membership(p, self.parent, self.probes)
        raise DomainError(f"unknown diffeology kind {self.kind!r}")


@dataclass(frozen=True)
class SikorskiHandle:
    kind: str
    base: Any = None
    generators: tuple = ()
    K: int = DEFAULT_K
    name: str = ""

    @property
    def underlying(self):
        return self.base

    def member(self, g: SymbolicMap, witness=None) -> Verdict:
        if self.kind != "standard-subspace":
            raise DomainError(f"unknown Sikorski kind {self.kind!r}")
        return func_membership_subspace(g, self.base, witness, self.K)


@dataclass(frozen=True)
class ChenHandle:
    kind: str
    base: Any = None
    parent: Any = None
    K: int = DEFAULT_K
    probes: ProbeFamily = DEFAULT_PROBES
    name: str = ""

    @property
    def underlying(self):
        return self.base if self.parent is None else self.parent.underlying

    def member(self, p: SymbolicMap) -> Verdict:
        if p.domain is not None and not p.domain.asserted_convex:
            raise DomainError("Chen plots have convex domains")
        if self.kind == "standard":
            return _chen_standard(p, self.base, self.K)
        if self.kind == "nonstandard-interval":
            return _chen_nonstandard(p, self.K)
        if self.kind == "transformed":
            return Ch_membership(p, self.parent, self.probes)
        if self.kind == "exhaustion":
            return exhaustion_membership(p, self.parent, self.probes)
        raise DomainError(f"unknown Chen kind {self.kind!r}")


def standard_diffeology(S: ConvexDescriptor, K: int = DEFAULT_K, generators=None) -> DiffeologyHandle:
    gens = default_generators(S) if generators is None else tuple(generators)
    return DiffeologyHandle("standard-subset", S, None, gens, K, name=f"D_std({S.name})")


def subspace_structure(S: ConvexDescriptor, K: int = DEFAULT_K) -> SikorskiHandle:
    gens = tuple(SymbolicMap((coord(i),), S.dim, None, f"x{i}") for i in range(S.dim))
    return SikorskiHandle("standard-subspace", S, gens, K, f"F_sub({S.name})")


def standard_chen(S: ConvexDescriptor, K: int = DEFAULT_K) -> ChenHandle:
    return ChenHandle("standard", S, None, K, name=f"C_std({S.name})")


def nonstandard_interval(K: int = DEFAULT_K) -> ChenHandle:
    return ChenHandle("nonstandard-interval", unit_interval(), None, K, name="C_ns([0,1])")


def Di(C: ChenHandle, probes: ProbeFamily = DEFAULT_PROBES) -> DiffeologyHandle:
    return DiffeologyHandle("transformed", None, C, (), C.K, probes, f"Di({C.name})")


def Ch(D: DiffeologyHandle, probes: ProbeFamily = DEFAULT_PROBES) -> ChenHandle:
    return ChenHandle("transformed", None, D, D.K, probes, f"Ch({D.name})")


def E(C: ChenHandle, probes: ProbeFamily = DEFAULT_PROBES) -> ChenHandle:
    return ChenHandle("exhaustion", None, C, C.K, probes, f"E({C.name})")


_TYPES = {DiffeologyHandle: "diffeology", SikorskiHandle: "sikorski", ChenHandle: "chen"}


def handle_to_dict(H) -> dict:
    """Declarative JSON form of a handle (parents nested)."""
    d = {"type": _TYPES[type(H)], "kind": H.kind, "K": H.K, "name": H.name}
    if H.base is not None:
        d["set"] = H.base.to_dict()
    if getattr(H, "parent", None) is not None:
        d["parent"] = handle_to_dict(H.parent)
    if getattr(H, "probes", None) is not None:
        d["probes"] = H.probes.to_dict()
    if getattr(H, "generators", ()):
        d["generators"] = [g.to_dict() for g in H.generators]
    return d


def handle_from_dict(d: dict):
    """Inverse of :func:`handle_to_dict`; ``generators`` default per kind when omitted."""
    try:
        typ, kind = d["type"], d["kind"]
    except KeyError as exc:
        raise DomainError(f"handle definition lacks {exc}") from None
    K = int(d.get("K", DEFAULT_K))
    probes = ProbeFamily.from_dict(d["probes"]) if "probes" in d else DEFAULT_PROBES
    base = descriptor_from_dict(d["set"]) if "set" in d else None
    parent = handle_from_dict(d["parent"]) if "parent" in d else None
    gens = tuple(SymbolicMap.from_dict(g) for g in d.get("generators", ()))
    name = d.get("name", "")
    if typ == "diffeology":
        if kind == "standard-subset":
            H = standard_diffeology(base, K, gens or None)
        elif kind == "transformed":
            H = Di(parent, probes)
        else:
            raise DomainError(f"unknown diffeology kind {kind!r}")
    elif typ == "chen":
        makers = {"standard": lambda: standard_chen(base, K),
                  "nonstandard-interval": lambda: nonstandard_interval(K),
                  "transformed": lambda: Ch(parent, probes),
                  "exhaustion": lambda: E(parent, probes)}
        if kind not in makers:
            raise DomainError(f"unknown Chen kind {kind!r}")
        H = makers[kind]()
    elif typ == "sikorski":
        if kind != "standard-subspace":
            raise DomainError(f"unknown Sikorski kind {kind!r}")
        H = subspace_structure(base, K)
    else:
        raise DomainError(f"unknown handle type {typ!r}")
    return replace(H, name=name) if name else H


# ---------------------------------------------------------------------------
# membership procedures


def _containment(p: SymbolicMap, S: ConvexDescriptor) -> Verdict:
    if p.is_constant():
        pt = p.value(np.zeros((1, p.n_in)))[0]
        if S.contains(pt):
            return Verdict.proven("constant map at a point of the set")
        return Verdict.failed(pt, 0, 1.0, "constant map outside the set",
                              replay=lambda: float(not S.contains(pt)), tolerance=0.0)
    T = parameter_samples(p.domain, p.n_in)
    if p.domain is not None and not p.domain.is_open():
        V = _vertices(p.domain)
        if len(V):
            T = np.concatenate([V, T])
    img = p.value(T)
    # images are float evaluations; allow rounding on closed faces
    inside = S.contains_many(img, slack=IMAGE_SLACK)
    if not inside.all():
        k = int(np.argmin(inside))
        t0 = T[k].copy()
        return Verdict.failed(t0, 0, 1.0, "image leaves the set",
                              replay=lambda: float(not S.contains_many(
                                  p.value(t0[None, :]), slack=IMAGE_SLACK)[0]),
                              tolerance=0.0, image=img[k])
    return Verdict.passed(len(T), None, 0.0, "image contained at sampled parameters")


def _chen_standard(p: SymbolicMap, S: ConvexDescriptor, K: int) -> Verdict:
    if p.n_out != S.dim:
        raise TypeError(f"Chen plot has {p.n_out} outputs but the set lives in R^{S.dim}")
    c = _containment(p, S)
    if c.is_failed:
        return c
    return combine([c, map_smoothness(p, K)])


def _chen_nonstandard(p: SymbolicMap, K: int) -> Verdict:
    v = _chen_standard(p, unit_interval(), K)
    if v.is_failed or p.is_constant():
        return v
    T = parameter_samples(p.domain, p.n_in)
    if p.domain is not None and not p.domain.is_open():
        V = _vertices(p.domain)
        if len(V):
            T = np.concatenate([V, T])
    vals = p.value(T)[:, 0]
    checks = [v]
    for t0 in T[(vals == 0.0) | (vals == 1.0)]:
        w = nonstandard_interval_obstruction(p, t0)
        if w.is_failed:
            return w
        checks.append(w)
    out = combine(checks)
    return Verdict(out.status, "smooth into [0,1]; extreme values attained flatly "
                   "(necessary condition for local factorization)", out.samples, out.max_order,
                   out.tolerance)


def Phi_membership(g: SymbolicMap, D: DiffeologyHandle, K: int | None = None) -> Verdict:
    """AND over generator plots ``p`` of smoothness of ``g o p``."""
    K = D.K if K is None else K
    if g.is_constant():
        return Verdict.proven("constant function")
    gens = D.generators or default_generators(D.underlying)
    verdicts = []
    for p in gens:
        v = map_smoothness(g.compose(p), K)
        if v.is_failed:
            return v
        verdicts.append(v)
    return combine(verdicts, reason="smooth along every generator plot")


def Pi_membership(p: SymbolicMap, F: SikorskiHandle, K: int | None = None) -> Verdict:
    """AND over generator functions ``g`` of smoothness of ``g o p``."""
    K = F.K if K is None else K
    verdicts = []
    for g in F.generators:
        v = map_smoothness(g.compose(p), K)
        if v.is_failed:
            return v
        verdicts.append(v)
    return combine(verdicts, reason="every generator composes smoothly")


def Di_membership(p: SymbolicMap, C: ChenHandle, probes: ProbeFamily = DEFAULT_PROBES) -> Verdict:
    """``p`` is in ``Di(C)`` when ``p o q`` is a ``C``-plot for every convex probe ``q``."""
    if not _is_open_domain(p):
        raise DomainError("Di membership needs a plot with open domain")
    verdicts = []
    for q in probes.convex_probes(p.domain):
        v = C.member(p.compose(q))
        if v.is_failed:
            return Verdict(v.status, f"probe {q.name}: {v.reason}", v.samples, v.max_order,
                           v.tolerance, dict(v.witness or {}, probe=q.name), replay=v.replay)
        verdicts.append(v)
    return combine(verdicts, reason="every convex probe composition is a Chen plot")


def _open_probe_and(p: SymbolicMap, accept, probes: ProbeFamily, what: str) -> Verdict:
    verdicts = []
    for f in probes.open_probes(p.domain):
        v = accept(p.compose(f))
        if v.is_failed:
            return Verdict(v.status, f"probe {f.name}: {v.reason}", v.samples, v.max_order,
                           v.tolerance, dict(v.witness or {}, probe=f.name), replay=v.replay)
        verdicts.append(v)
    return combine(verdicts, reason=what)


def Ch_membership(p: SymbolicMap, D: DiffeologyHandle, probes: ProbeFamily = DEFAULT_PROBES) -> Verdict:
    """``p`` is in ``Ch(D)`` when ``p o f`` is a ``D``-plot for every open convex probe ``f``."""
    return _open_probe_and(p, D.member, probes, "every open probe composition is a plot")


def exhaustion_membership(p: SymbolicMap, C: ChenHandle,
                          probes: ProbeFamily = DEFAULT_PROBES) -> Verdict:
    """``p`` is in ``E(C)`` when ``p o f`` is in ``C`` for every open convex probe ``f``."""
    return _open_probe_and(p, C.member, probes,
                           "every open probe composition is a Chen plot")
