"""Certified derivative bounds and the constants ``c_m``.

``c_m`` bounds every partial derivative of order ``<= m`` (order 0 included)
of the series term ``phi_m o h_m`` over the whole plane.  It is assembled as

* ``P_{m,j} >= sup |phi_m^{(j)}|``: closed form on ``(0, 1]`` (the power
  ``x^{m+1/2}``, whose derivatives of order ``<= m`` increase towards 1) and
  branch-and-bound on the cutoff region ``[1, 2]``;
* ``Q_{m,j} >= sup |d_x^j h_m| = sup |s^{(j)}| / m`` for ``j >= 1``;
* Faa di Bruno: ``|d_x^a d_y^c (phi o h)| <= sum_k P_{c+k} B_{a,k}(Q)``.

All floats reported as upper bounds are rounded upward.
"""

from __future__ import annotations

import hashlib
import os
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from pathlib import Path

import numpy as np

from .bnb import DEFAULT_BUDGET, Box, SupBoundCertificate, branch_and_bound_sup
from .errors import BudgetExceededError, CapabilityError, DomainError
from .interval import Interval, exact_gamma_ratio, falling, fraction_interval, round_up
from .kernels import (
    DEFAULT_KERNELS,
    KernelConfig,
    b_eps_derivs,
    bridge_derivs,
    cutoff_derivs,
    phi_derivs,
    smoothstep_derivs,
)

__all__ = [
    "BoundSettings",
    "CmTable",
    "FaaDiBrunoTable",
    "FunctionId",
    "build_cm_table",
    "c_bound",
    "config_hash",
    "default_table",
    "faa_di_bruno_bound",
    "install_default_table",
    "load_or_build_cm_table",
    "sup_abs_on_box",
    "sup_h_deriv",
    "sup_phi_deriv",
    "sup_smoothstep",
]


# ---------------------------------------------------------------------------
# function registry for branch-and-bound


@dataclass(frozen=True)
class FunctionId:
    """Names a registered kernel, a derivative order and its parameters."""

    name: str
    order: int = 0
    m: int | None = None
    eps: float | None = None

    def label(self) -> str:
        extra = "" if self.m is None else f"_{self.m}"
        extra += "" if self.eps is None else f"[eps={self.eps}]"
        return f"{self.name}{extra}^({self.order})"


def _zero_derivs(x: Interval, K: int):
    z = np.zeros_like(x.lo)
    return [Interval(z, z.copy()) for _ in range(K + 1)]


def _evaluator(fid: FunctionId):
    name = fid.name
    if name == "zero":
        return lambda X, K: _zero_derivs(X[0], K)
    if name == "s":
        return lambda X, K: smoothstep_derivs(X[0], K)
    if name == "b":
        return lambda X, K: bridge_derivs(X[0], K)
    if name == "chi":
        return lambda X, K: cutoff_derivs(X[0], K)
    if name == "b_eps":
        if fid.eps is None:
            raise DomainError("b_eps needs eps")
        eps = Interval.exact(Fraction(fid.eps))
        return lambda X, K: b_eps_derivs(eps, X[0], K)
    if name == "phi":
        if fid.m is None:
            raise DomainError("phi needs m")
        return lambda X, K: phi_derivs(fid.m, X[0], K)
    raise DomainError(f"unknown function {name!r}")


def _sup_orders(fid: FunctionId, box: Box, orders: int, tol: float, rtol: float,
                budget: int) -> list[SupBoundCertificate]:
    ev = _evaluator(fid)
    if box.dim != 1:
        raise DomainError(f"{fid.name} has arity 1, box has {box.dim} axes")
    upper, lower, n = branch_and_bound_sup(lambda X: ev(X, orders), box, orders + 1,
                                           tol=tol, rtol=rtol, budget=budget)
    return [
        SupBoundCertificate(
            function=FunctionId(fid.name, j, fid.m, fid.eps).label(), order=j,
            bound=float(upper[j]), lower=float(lower[j]), method="branch-and-bound",
            tolerance=float(upper[j] - lower[j]), subdivisions=int(n), box=box,
            params={k: v for k, v in (("m", fid.m), ("eps", fid.eps)) if v is not None},
        )
        for j in range(orders + 1)
    ]


def sup_abs_on_box(fn, box: Box, tol: float = 1e-3, rtol: float = 0.0,
                   budget: int = DEFAULT_BUDGET) -> SupBoundCertificate:
    """Certified ``sup_box |fn|`` with gap ``<= max(tol, rtol * lower)``.

    ``fn`` is a :class:`FunctionId`, a ``(name, order)`` tuple, or a callable
    taking a list of batched intervals (one per axis) and returning one
    batched enclosure.
    """
    if callable(fn) and not isinstance(fn, FunctionId):
        upper, lower, n = branch_and_bound_sup(lambda X: [fn(X)], box, 1, tol=tol,
                                               rtol=rtol, budget=budget)
        name = getattr(fn, "__name__", "callable")
        return SupBoundCertificate(name, 0, float(upper[0]), float(lower[0]),
                                   "branch-and-bound", float(upper[0] - lower[0]), int(n), box)
    if isinstance(fn, tuple):
        fn = FunctionId(*fn)
    return _sup_orders(fn, box, fn.order, tol, rtol, budget)[fn.order]


# ---------------------------------------------------------------------------
# settings and the cached sups of the smooth step


@dataclass(frozen=True)
class BoundSettings:
    tol: float = 1e-6
    rtol: float = 5e-3
    budget: int = DEFAULT_BUDGET

    def to_dict(self) -> dict:
        return {"tol": self.tol, "rtol": self.rtol, "budget": self.budget}


DEFAULT_SETTINGS = BoundSettings()


@lru_cache(maxsize=16)
def _smoothstep_certs(K: int, settings: BoundSettings) -> tuple:
    return tuple(_sup_orders(FunctionId("s"), Box.of((0.0, 1.0)), K, settings.tol,
                             settings.rtol, settings.budget))


def sup_smoothstep(j: int, K: int | None = None,
                   settings: BoundSettings = DEFAULT_SETTINGS) -> SupBoundCertificate:
    """``sup |s^{(j)}| = sup |b^{(j)}| = sup |chi^{(j)}|`` (all are shifts of ``s``)."""
    K = max(j, K or 0)
    return _smoothstep_certs(K, settings)[j]


@lru_cache(maxsize=64)
def _phi_cutoff_certs(m: int, K: int, settings: BoundSettings) -> tuple:
    return tuple(_sup_orders(FunctionId("phi", 0, m), Box.of((1.0, 2.0)), K, settings.tol,
                             settings.rtol, settings.budget))


def _phi_closed_form_sup(m: int, j: int) -> Fraction:
    # on (0, 1] the j-th derivative is falling(a, j) x^{a-j} with a - j > 0
    return abs(falling(Fraction(2 * m + 1, 2), j))


def sup_phi_deriv(m: int, j: int, settings: BoundSettings = DEFAULT_SETTINGS,
                  with_certificates: bool = False):
    """Upper bound ``P_{m,j}`` on ``sup_R |phi_m^{(j)}|`` for ``j <= m``."""
    if j > m:
        raise CapabilityError(f"phi_{m}^({j}) is unbounded near 0 (order > m)")
    if j < 0:
        raise DomainError("order must be nonnegative")
    closed = _phi_closed_form_sup(m, j)
    bb = _phi_cutoff_certs(m, m, settings)[j]
    closed_up = round_up(closed)
    cert_closed = SupBoundCertificate(f"phi_{m}^({j})", j, closed_up, float(closed),
                                      "closed-form", 0.0, 0, Box.of((0.0, 1.0)), {"m": m})
    value = max(closed_up, bb.bound)
    if with_certificates:
        return value, [cert_closed, bb]
    return value


def sup_h_deriv(m: int, alpha, settings: BoundSettings = DEFAULT_SETTINGS) -> float:
    """``Q_{m,alpha} >= sup |d^alpha h_m|`` for ``|alpha| >= 1``.

    ``alpha`` is a multi-index ``(a, c)`` or an int meaning the pure-x order.
    """
    if isinstance(alpha, int):
        alpha = (alpha, 0)
    a, c = alpha
    if a < 0 or c < 0:
        raise DomainError("negative multi-index")
    if a + c == 0:
        raise DomainError("h_m itself is unbounded; order must be positive")
    if (a, c) == (0, 1):
        return 1.0
    if c > 0:
        return 0.0
    S = sup_smoothstep(a, settings=settings).bound
    return float((Interval(S) * Interval.exact(Fraction(1, m))).hi)


# ---------------------------------------------------------------------------
# Faa di Bruno coefficients


def _partitions(n: int, maxpart: int | None = None):
    if maxpart is None:
        maxpart = n
    if n == 0:
        yield ()
        return
    for p in range(min(n, maxpart), 0, -1):
        for rest in _partitions(n - p, p):
            yield (p,) + rest


@dataclass(frozen=True)
class FaaDiBrunoTable:
    """Exact partial Bell polynomial coefficients up to order ``K``.

    ``coeffs[(n, k)]`` maps an exponent vector ``e`` (``e[i-1]`` = multiplicity
    of block size ``i``) to ``n! / prod (i!)^{e_i} e_i!``.
    """

    K: int
    coeffs: dict = field(repr=False)

    @classmethod
    def build(cls, K: int) -> "FaaDiBrunoTable":
        coeffs: dict = {(0, 0): {(0,) * K: 1} if K else {(): 1}}
        for n in range(1, K + 1):
            for part in _partitions(n):
                e = [0] * K
                for p in part:
                    e[p - 1] += 1
                denom = 1
                for i, ei in enumerate(e, start=1):
                    denom *= factorial(i) ** ei * factorial(ei)
                coeffs.setdefault((n, len(part)), {})[tuple(e)] = factorial(n) // denom
        return cls(K, coeffs)

    def monomials(self, n: int, k: int) -> dict:
        return self.coeffs.get((n, k), {})

    def bell_upper(self, n: int, k: int, q) -> float:
        """Upward-rounded ``B_{n,k}(q_1, q_2, ...)`` for nonnegative ``q``."""
        acc = Interval(0.0)
        for e, coef in self.monomials(n, k).items():
            term = Interval.exact(coef)
            for i, ei in enumerate(e):
                if ei:
                    qi = Interval(q[i + 1]) if not isinstance(q[i + 1], Interval) else q[i + 1]
                    for _ in range(ei):
                        term = term * qi
            acc = acc + term
        return float(acc.hi)

    def bell_interval(self, n: int, k: int, q) -> Interval:
        acc = Interval(0.0)
        for e, coef in self.monomials(n, k).items():
            term = Interval.exact(coef)
            for i, ei in enumerate(e):
                for _ in range(ei):
                    term = term * q[i + 1]
            acc = acc + term
        return acc


@lru_cache(maxsize=8)
def faa_table(K: int) -> FaaDiBrunoTable:
    return FaaDiBrunoTable.build(K)


def _composition_bound(P, Q, n: int, table: FaaDiBrunoTable) -> float:
    """``max_{a+c=n} sum_k P[c+k] B_{a,k}(Q)`` rounded upward."""
    best = 0.0
    Qi = [None] + [Interval(float(q)) for q in Q[1:]]
    for a in range(n + 1):
        c = n - a
        if a == 0:
            acc = Interval(float(P[c]))
        else:
            acc = Interval(0.0)
            for k in range(1, a + 1):
                acc = acc + Interval(float(P[c + k])) * table.bell_interval(a, k, Qi)
        best = max(best, float(acc.hi))
    return best


def faa_di_bruno_bound(m: int, n: int, settings: BoundSettings = DEFAULT_SETTINGS,
                       P=None, Q=None) -> float:
    """Upper bound on ``max_{|alpha| = n} sup |d^alpha (phi_m o h_m)|``."""
    if n > m:
        raise CapabilityError(f"order {n} exceeds m = {m}; phi_{m} o h_{m} is only C^{m}")
    if n < 0:
        raise DomainError("order must be nonnegative")
    if P is None:
        P = [sup_phi_deriv(m, j, settings) for j in range(n + 1)]
    if Q is None:
        Q = [None] + [sup_h_deriv(m, j, settings) for j in range(1, n + 1)]
    return _composition_bound(P, Q, n, faa_table(max(n, 1)))


# ---------------------------------------------------------------------------
# the table of c_m


def config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CmTable:
    """``c_m`` for ``1 <= m <= max_index`` plus the certificates behind them."""

    values: dict
    smoothstep: tuple
    certificates: dict = field(repr=False)
    kernels: KernelConfig = DEFAULT_KERNELS
    settings: BoundSettings = DEFAULT_SETTINGS

    @property
    def max_index(self) -> int:
        return max(self.values)

    @property
    def hash(self) -> str:
        return table_hash(self.kernels, self.settings, self.max_index)

    def __getitem__(self, m: int) -> float:
        if m not in self.values:
            raise CapabilityError(f"c_{m} not in table (max index {self.max_index})")
        return self.values[m]

    def S(self, j: int) -> float:
        """Certified ``sup |s^{(j)}|``."""
        if j >= len(self.smoothstep):
            raise CapabilityError(f"sup |s^({j})| not tabulated")
        return self.smoothstep[j]

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "hash": self.hash,
            "kernels": self.kernels.to_dict(),
            "settings": self.settings.to_dict(),
            "c": {str(m): v for m, v in sorted(self.values.items())},
            "smoothstep_sup": list(self.smoothstep),
            "certificates": {str(m): [c.to_dict() for c in cs]
                             for m, cs in sorted(self.certificates.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "CmTable":
        s = d["settings"]
        return cls(
            values={int(m): float(v) for m, v in d["c"].items()},
            smoothstep=tuple(float(v) for v in d["smoothstep_sup"]),
            certificates={int(m): [SupBoundCertificate.from_dict(c) for c in cs]
                          for m, cs in d["certificates"].items()},
            kernels=KernelConfig.from_dict(d["kernels"]),
            settings=BoundSettings(s["tol"], s["rtol"], s["budget"]),
        )


def table_hash(kernels: KernelConfig, settings: BoundSettings, max_index: int) -> str:
    return config_hash({"kernels": kernels.to_dict(), "settings": settings.to_dict(),
                        "max_index": max_index})


def c_bound(m: int, settings: BoundSettings = DEFAULT_SETTINGS,
            kernels: KernelConfig = DEFAULT_KERNELS, with_certificates: bool = False):
    """``c_m = max_{0 <= n <= m} faa_di_bruno_bound(m, n)``."""
    if m < 1:
        raise DomainError("m must be a positive integer")
    if m > kernels.max_order:
        raise CapabilityError(f"m = {m} exceeds configured max index {kernels.max_order}")
    certs = []
    P = []
    for j in range(m + 1):
        v, cs = sup_phi_deriv(m, j, settings, with_certificates=True)
        P.append(v)
        certs.extend(cs)
    Q = [None]
    for j in range(1, m + 1):
        Q.append(sup_h_deriv(m, j, settings))
        certs.append(sup_smoothstep(j, settings=settings))
    c = max(faa_di_bruno_bound(m, n, settings, P, Q) for n in range(m + 1))
    if with_certificates:
        return c, certs
    return c


def build_cm_table(max_index: int | None = None, kernels: KernelConfig = DEFAULT_KERNELS,
                   settings: BoundSettings = DEFAULT_SETTINGS) -> CmTable:
    if max_index is None:
        max_index = kernels.max_order
    values, certs = {}, {}
    for m in range(1, max_index + 1):
        try:
            values[m], certs[m] = c_bound(m, settings, kernels, with_certificates=True)
        except BudgetExceededError as exc:
            exc.partial = dict(values)
            raise
    S = tuple(sup_smoothstep(j, kernels.max_order, settings).bound
              for j in range(kernels.max_order + 1))
    return CmTable(values, S, certs, kernels, settings)


def load_or_build_cm_table(cache: str | Path | None = None, max_index: int | None = None,
                           kernels: KernelConfig = DEFAULT_KERNELS,
                           settings: BoundSettings = DEFAULT_SETTINGS) -> CmTable:
    """Read ``cache`` if its hash matches the configuration, else build and write it."""
    mi = kernels.max_order if max_index is None else max_index
    want = table_hash(kernels, settings, mi)
    if cache is not None:
        path = Path(cache)
        if path.exists():
            try:
                d = json.loads(path.read_text())
                if d.get("hash") == want:
                    return CmTable.from_dict(d)
            except (ValueError, KeyError):
                pass
    table = build_cm_table(mi, kernels, settings)
    if cache is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table.to_json())
    return table


_DEFAULT_TABLE: dict = {}


def default_table() -> CmTable:
    """Process-wide table for the default configuration (built on first use)."""
    if "t" not in _DEFAULT_TABLE:
        cache = os.environ.get("CONVEXSMOOTH_CM_CACHE")
        _DEFAULT_TABLE["t"] = load_or_build_cm_table(cache) if cache else build_cm_table()
    return _DEFAULT_TABLE["t"]


def install_default_table(table: CmTable) -> None:
    """Make ``table`` the process-wide default (used by the float evaluators)."""
    _DEFAULT_TABLE["t"] = table


# ---------------------------------------------------------------------------
# term majorants for series tails


@lru_cache(maxsize=None)
def lower_c(m: int) -> float:
    """A lower bound for every admissible ``c_m``.

    ``c_m >= sup |phi_m^{(m)}| >= prod_{i<m} (m + 1/2 - i)`` (value at ``x -> 1-``).
    """
    return float(fraction_interval(exact_gamma_ratio(m)).lo)


@lru_cache(maxsize=4096)
def _global_phi_majorant(m: int, j: int, S: tuple) -> float:
    """Crude ``sup_{[1,2]} |phi_m^{(j)}|`` from Leibniz, any ``j``."""
    a = Fraction(2 * m + 1, 2)
    acc = Interval(0.0)
    for i in range(j + 1):
        # |x^{a-i}| <= max(1, 2^{a-i}) on [1, 2]
        mag = fraction_interval(comb(j, i) * abs(falling(a, i)))
        e = float(a - i)
        two = 2.0 ** e if e > 0 else 1.0
        two = Interval(two, np.nextafter(np.nextafter(two, np.inf), np.inf))
        Sj = Interval(S[j - i]) if j - i > 0 else Interval(1.0)
        acc = acc + mag * two * Sj
    return float(acc.hi)


def phi_majorant(m: int, j: int, h_lo, h_hi, S: tuple):
    """Upper bound of ``|phi_m^{(j)}|`` over ``[h_lo, h_hi]`` (arrays).

    For ``j > m`` the bound is finite only when ``h_lo > 0`` or ``h_hi < 0``.
    """
    h_lo = np.asarray(h_lo, dtype=np.float64)
    h_hi = np.asarray(h_hi, dtype=np.float64)
    a = Fraction(2 * m + 1, 2)
    e = float(a - j)
    coef = round_up(abs(falling(a, j)))
    with np.errstate(under="ignore", invalid="ignore", divide="ignore", over="ignore"):
        top = np.clip(h_hi, 0.0, 1.0)
        bot = np.clip(h_lo, 0.0, 1.0)
        base = top if e >= 0 else bot
        powr = np.power(base, e) * (1 + 1e-13)
        powr = np.where(base > 0, np.nextafter(powr, np.inf), 0.0 if e > 0 else np.inf)
        local = np.nextafter(coef * powr, np.inf)
    local = np.where(h_hi > 0, local, 0.0 if j <= m else np.where(h_hi < 0, 0.0, np.inf))
    glob = _global_phi_majorant(m, j, S)
    touches_cut = (h_hi > 1.0) & (h_lo < 2.0)
    out = np.where(touches_cut, np.maximum(np.where(h_lo < 1.0, local, 0.0), glob), local)
    out = np.where((h_hi < 0.0) | (h_lo >= 2.0) | ((h_hi <= 0.0) & (j <= m)), 0.0, out)
    return out


def term_derivative_majorant(m: int, alpha, h_lo, h_hi, S: tuple):
    """Upper bound of ``|d^alpha (phi_m o h_m)|`` at points where ``h_m in [h_lo, h_hi]``.

    Uses ``|d_x^i h_m| <= S_i / m``.  Any point satisfies
    ``h_m in [y, y + 1/m]``.
    """
    a, c = alpha
    h_lo = np.asarray(h_lo, dtype=np.float64)
    h_hi = np.asarray(h_hi, dtype=np.float64)
    if a == 0:
        return phi_majorant(m, c, h_lo, h_hi, S)
    table = faa_table(max(a, 1))
    Sq = [None] + [Interval(S[i]) for i in range(1, a + 1)]
    acc = np.zeros(np.broadcast(h_lo, h_hi).shape)
    for k in range(1, a + 1):
        bell = table.bell_interval(a, k, Sq).hi
        scale = float((Interval(bell) * Interval.exact(Fraction(1, m ** k))).hi)
        with np.errstate(invalid="ignore", over="ignore"):
            acc = acc + phi_majorant(m, c + k, h_lo, h_hi, S) * scale
    return np.nextafter(acc * (1 + 1e-14), np.inf)
