"""Building-block functions of the counterexample and their derivatives.

* ``s`` -- the exp-based smooth step, ``s = psi(t) / (psi(t) + psi(1 - t))``
  with ``psi(t) = exp(-1/t)``; 0 on ``t <= 0`` and 1 on ``t >= 1``.
* ``b(x) = -s(x + 1)`` -- the bridge (0 left of -1, -1 right of 0).
* ``b_eps(x) = eps * b(x - 1 + eps)``.
* ``chi(x) = 1 - s(x - 1)`` -- cutoff, 1 left of 1 and 0 right of 2.
* ``phi_m(x) = x**(m + 1/2) * chi(x)`` for ``x > 0`` and 0 otherwise.
* ``h_m(x, y) = y - b_{1/m}(x)``.

Derivatives of ``psi`` are ``exp(-u) P_j(u)`` with ``u = 1/t`` and integer
polynomials ``P_{j+1}(u) = u^2 (P_j(u) - P_j'(u))``; evaluating these term
by term as ``exp(n log u - u)`` never overflows and lets interval boxes touch
the flat ends (``u = inf``) without special cases.

Every function accepts a float, a numpy array or an
:class:`~convexsmooth.interval.Interval` (scalar or batched).  Returned
derivatives are raw derivatives (not Taylor coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import CapabilityError, DomainError, NotDifferentiableError
from .interval import Interval, as_interval, hull, ipow
from .jets import Jet2, bell_table, raw_to_taylor, taylor_div, taylor_to_raw

__all__ = [
    "BridgeSpec",
    "CutoffSpec",
    "KernelConfig",
    "b_eps_eval",
    "bridge_derivs",
    "bridge_eval",
    "cutoff_derivs",
    "cutoff_eval",
    "h_eval",
    "h_value",
    "phi_derivs",
    "phi_eval",
    "smoothstep_derivs",
    "term_jet",
    "term_partials",
]

BRIDGE_IDS = ("exp-smoothstep",)
CUTOFF_IDS = ("bridge-complement",)


@dataclass(frozen=True)
class BridgeSpec:
    identifier: str = "exp-smoothstep"

    def __post_init__(self):
        if self.identifier not in BRIDGE_IDS:
            raise CapabilityError(f"unknown bridge {self.identifier!r}; known: {BRIDGE_IDS}")


@dataclass(frozen=True)
class CutoffSpec:
    identifier: str = "bridge-complement"

    def __post_init__(self):
        if self.identifier not in CUTOFF_IDS:
            raise CapabilityError(f"unknown cutoff {self.identifier!r}; known: {CUTOFF_IDS}")


@dataclass(frozen=True)
class KernelConfig:
    bridge: BridgeSpec = BridgeSpec()
    cutoff: CutoffSpec = CutoffSpec()
    max_order: int = 12

    def check_order(self, j: int) -> None:
        if j < 0:
            raise DomainError(f"derivative order must be nonnegative, got {j}")
        if j > self.max_order:
            raise CapabilityError(
                f"derivative order {j} exceeds configured maximum {self.max_order}")

    def to_dict(self) -> dict:
        return {"bridge": self.bridge.identifier, "cutoff": self.cutoff.identifier,
                "max_order": self.max_order}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        return cls(BridgeSpec(d.get("bridge", "exp-smoothstep")),
                   CutoffSpec(d.get("cutoff", "bridge-complement")),
                   int(d.get("max_order", 12)))


DEFAULT_KERNELS = KernelConfig()


def _check_index(m) -> int:
    if int(m) != m or m < 1:
        raise DomainError(f"kernel index must be a positive integer, got {m!r}")
    return int(m)


@lru_cache(maxsize=None)
def psi_poly(j: int) -> tuple[int, ...]:
    """Integer coefficients of ``P_j`` (index = power of u)."""
    if j == 0:
        return (1,)
    prev = psi_poly(j - 1)
    deriv = [n * c for n, c in enumerate(prev)][1:] + [0]
    diff = [c - d for c, d in zip(prev, deriv)]
    return tuple([0, 0] + diff)


# ---------------------------------------------------------------------------
# e^{-u} u^n, point values (floats) and exact ranges (intervals)


def _monomial_float(u, n: int):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if n == 0:
            return np.exp(-u)
        return np.exp(n * np.log(u) - u)


def _monomial_point_bounds(u, n: int):
    val = _monomial_float(u, n)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logu = np.abs(np.log(u)) if n else 0.0
        rel = (n * logu + u + 2.0) * 4.5e-16 + 2e-15
        lo = val * (1.0 - rel)
        hi = val * (1.0 + rel)
    inf = np.isinf(u)
    lo = np.where(inf, 0.0, np.maximum(lo, 0.0))
    hi = np.where(inf, 0.0, np.where(hi == 0, 5e-324, np.nextafter(hi, np.inf)))
    return lo, hi


def _monomial_range(ulo, uhi, n: int) -> Interval:
    """Enclosure of ``{exp(-u) u^n : ulo <= u <= uhi}`` for ``0 < ulo``."""
    llo, lhi = _monomial_point_bounds(ulo, n)
    hlo, hhi = _monomial_point_bounds(uhi, n)
    lo = np.minimum(llo, hlo)
    hi = np.maximum(lhi, hhi)
    if n > 0:
        peak = (ulo <= n) & (n <= uhi)
        _, phi = _monomial_point_bounds(np.float64(n), n)
        hi = np.where(peak, np.maximum(hi, phi), hi)
    return Interval(lo, hi)


def _psi_derivs_float(u, K: int, sign: bool) -> list:
    out = []
    for j in range(K + 1):
        acc = 0.0
        for n, c in enumerate(psi_poly(j)):
            if c:
                acc = acc + c * _monomial_float(u, n)
        if sign and j % 2:
            acc = -acc
        out.append(acc)
    return out


@lru_cache(maxsize=None)
def _int_interval(c: int) -> Interval:
    return Interval.exact(c)


def _psi_derivs_interval(ulo, uhi, K: int, sign: bool) -> list:
    cache: dict[int, Interval] = {}
    out = []
    for j in range(K + 1):
        acc = None
        for n, c in enumerate(psi_poly(j)):
            if not c:
                continue
            if n not in cache:
                cache[n] = _monomial_range(ulo, uhi, n)
            term = cache[n] * _int_interval(c)
            acc = term if acc is None else acc + term
        if sign and j % 2:
            acc = -acc
        out.append(acc)
    return out


def _quotient_raw(A: list, B: list, K: int) -> list:
    a = raw_to_taylor(A)
    bb = raw_to_taylor(B)
    d = [x + y for x, y in zip(a, bb)]
    return taylor_to_raw(taylor_div(a, d, K))


def _smoothstep_float(t, K: int) -> list:
    t = np.asarray(t, dtype=np.float64)
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    u = 1.0 / tc
    v = 1.0 / (1.0 - tc)
    s = _quotient_raw(_psi_derivs_float(u, K, False), _psi_derivs_float(v, K, True), K)
    out = []
    for j, sj in enumerate(s):
        flat = np.where(t >= 1, 1.0, 0.0) if j == 0 else 0.0
        val = np.where(inside, sj, flat)
        out.append(float(val) if val.ndim == 0 else val)
    return out


def _smoothstep_interval_core(lo, hi, K: int) -> list:
    """Enclosures on boxes ``[lo, hi]`` with ``0 <= lo <= hi <= 1``."""
    with np.errstate(divide="ignore", over="ignore"):
        ulo = np.nextafter(1.0 / hi, -np.inf)
        uhi = np.where(lo == 0, np.inf, np.nextafter(1.0 / lo, np.inf))
        om_lo = np.nextafter(1.0 - hi, -np.inf)  # 1 - t over the box, outward
        om_hi = np.nextafter(1.0 - lo, np.inf)
        om_lo = np.where(hi == 1, 0.0, np.maximum(om_lo, 0.0))
        vlo = np.nextafter(1.0 / om_hi, -np.inf)
        vhi = np.where(om_lo == 0, np.inf, np.nextafter(1.0 / om_lo, np.inf))
    A = _psi_derivs_interval(ulo, uhi, K, False)
    B = _psi_derivs_interval(vlo, vhi, K, True)
    return _quotient_raw(A, B, K)


def _smoothstep_interval_natural(t: Interval, K: int) -> list:
    lo = np.asarray(t.lo, dtype=np.float64)
    hi = np.asarray(t.hi, dtype=np.float64)
    scalar = lo.ndim == 0
    lo = np.atleast_1d(lo)
    hi = np.atleast_1d(hi)
    clo = np.clip(lo, 0.0, 1.0)
    chi = np.clip(hi, 0.0, 1.0)
    has_inside = (hi > 0) & (lo < 1)
    core_lo = np.where(has_inside, clo, 0.5)
    core_hi = np.where(has_inside, chi, 0.5)
    core = _smoothstep_interval_core(core_lo, core_hi, K)
    out = []
    for j in range(K + 1):
        c = core[j]
        clo_j = np.where(has_inside, c.lo, np.inf)
        chi_j = np.where(has_inside, c.hi, -np.inf)
        if j == 0:
            left = lo <= 0
            right = hi >= 1
            flo = np.where(left, 0.0, np.where(right, 1.0, np.inf))
            fhi = np.where(right, 1.0, np.where(left, 0.0, -np.inf))
        else:
            flat = (lo <= 0) | (hi >= 1)
            flo = np.where(flat, 0.0, np.inf)
            fhi = np.where(flat, 0.0, -np.inf)
        rlo = np.minimum(clo_j, flo)
        rhi = np.maximum(chi_j, fhi)
        if scalar:
            rlo, rhi = rlo[0], rhi[0]
        out.append(Interval(rlo, rhi))
    return out


def mean_value_refine(natural, box: Interval, K: int) -> list:
    """Intersect natural enclosures with the mean-value form.

    ``natural(X, order)`` must return raw-derivative enclosures ``0..order``
    on ``X``.  Order ``j`` is tightened with ``f_j(mid) + f_{j+1}(X) (X - mid)``.
    """
    wide = natural(box, K + 1)
    mid = box.mid
    point = natural(Interval(mid, mid), K)
    delta = Interval(np.nextafter(box.lo - mid, -np.inf) * (box.lo != mid),
                     np.nextafter(box.hi - mid, np.inf) * (box.hi != mid))
    out = []
    for j in range(K + 1):
        mv = point[j] + wide[j + 1] * delta
        lo = np.maximum(wide[j].lo, mv.lo)
        hi = np.minimum(wide[j].hi, mv.hi)
        out.append(Interval(np.minimum(lo, hi), np.maximum(lo, hi)))
    return out


def smoothstep_derivs(t, K: int, refine: bool = True) -> list:
    """``[s(t), s'(t), ..., s^{(K)}(t)]``."""
    if isinstance(t, Interval):
        if refine and np.any(t.hi > t.lo):
            return mean_value_refine(_smoothstep_interval_natural, t, K)
        return _smoothstep_interval_natural(t, K)
    return _smoothstep_float(t, K)


# ---------------------------------------------------------------------------
# bridge, b_eps, cutoff


def bridge_derivs(x, K: int) -> list:
    """``[b(x), ..., b^{(K)}(x)]`` with ``b(x) = -s(x + 1)``."""
    t = x + 1.0 if not isinstance(x, Interval) else x + Interval(1.0)
    return [-v for v in smoothstep_derivs(t, K)]


def cutoff_derivs(x, K: int) -> list:
    """``[chi(x), ..., chi^{(K)}(x)]`` with ``chi(x) = 1 - s(x - 1)``."""
    t = x - 1.0 if not isinstance(x, Interval) else x - Interval(1.0)
    s = smoothstep_derivs(t, K)
    return [1.0 - s[0]] + [-v for v in s[1:]]


def bridge_eval(x, j: int, config: KernelConfig = DEFAULT_KERNELS):
    config.check_order(j)
    return bridge_derivs(x, j)[j]


def _eps_arg(eps, x):
    if isinstance(x, Interval) or isinstance(eps, Interval):
        return as_interval(x) + (as_interval(eps) - Interval(1.0))
    return x - 1.0 + eps


def _check_eps(eps):
    e = eps.hi if isinstance(eps, Interval) else eps
    el = eps.lo if isinstance(eps, Interval) else eps
    if not (el > 0 and e <= 1):
        raise DomainError(f"eps must lie in (0, 1], got {eps!r}")


def b_eps_derivs(eps, x, K: int) -> list:
    _check_eps(eps)
    return [eps * v for v in bridge_derivs(_eps_arg(eps, x), K)]


def b_eps_eval(eps, x, j: int, config: KernelConfig = DEFAULT_KERNELS):
    config.check_order(j)
    return b_eps_derivs(eps, x, j)[j]


def cutoff_eval(x, j: int, config: KernelConfig = DEFAULT_KERNELS):
    config.check_order(j)
    return cutoff_derivs(x, j)[j]


def inverse_index(m: int, interval: bool):
    """``1/m`` as a float or as a tight enclosure."""
    if interval:
        return Interval.exact(Fraction(1, m))
    return 1.0 / m


# ---------------------------------------------------------------------------
# phi_m


def _power_derivs_float(x, a: float, K: int) -> list:
    out = []
    coeff = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(K + 1):
            out.append(coeff * np.power(x, a - j))
            coeff *= a - j
    return out


def _power_derivs_interval(x: Interval, a: Fraction, K: int) -> list:
    out = []
    coeff = Fraction(1)
    for j in range(K + 1):
        if coeff == 0:
            out.append(Interval(np.zeros_like(x.lo), np.zeros_like(x.hi)))
        else:
            out.append(Interval.exact(coeff) * ipow(x, float(a - j)))
        coeff *= a - j
    return out


def _leibniz(P: list, C: list, K: int) -> list:
    out = []
    for j in range(K + 1):
        acc = None
        for i in range(j + 1):
            term = P[i] * C[j - i]
            if 0 < i < j:
                term = term * comb(j, i)
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _phi_float(m: int, x, K: int) -> list:
    x = np.asarray(x, dtype=np.float64)
    a = m + 0.5
    pos = (x > 0) & (x < 2)
    xc = np.where(pos, x, 1.0)
    P = _power_derivs_float(xc, a, K)
    C = cutoff_derivs(xc, K)
    vals = _leibniz(P, C, K)
    out = []
    for j in range(K + 1):
        v = np.where(pos, vals[j], 0.0)
        out.append(float(v) if v.ndim == 0 else v)
    return out


def _phi_interval_natural(m: int, x: Interval, K: int) -> list:
    """Enclosures of phi_m derivatives over ``x`` (scalar interval)."""
    a = Fraction(2 * m + 1, 2)
    pieces = []
    lo, hi = float(x.lo), float(x.hi)
    zero = Interval(0.0, 0.0)
    if lo <= 0:
        if K > m and hi >= 0:
            raise NotDifferentiableError(
                f"phi_{m} is only C^{m} at 0; order {K} requested on {x!r}")
        pieces.append([zero] * (K + 1))
    if hi >= 2:
        pieces.append([zero] * (K + 1))
    plo, phi_ = max(lo, 0.0), min(hi, 2.0)
    if plo < phi_ or (plo == phi_ and 0 < plo < 2):
        if plo < 1:
            seg = Interval(plo, min(phi_, 1.0))
            if seg.lo == 0:
                # closed form tends to 0 at 0+ for j <= m
                P = _power_derivs_interval(Interval(max(seg.lo, 5e-324), seg.hi), a, K)
                P = [hull(p, zero) for p in P]
            else:
                P = _power_derivs_interval(seg, a, K)
            pieces.append(P)
        if phi_ > 1 or (plo == phi_ == 1):
            seg = Interval(max(plo, 1.0), phi_)
            P = _power_derivs_interval(seg, a, K)
            C = cutoff_derivs(seg, K)
            pieces.append(_leibniz(P, C, K))
    return [hull(*[p[j] for p in pieces]) for j in range(K + 1)]


def _phi_box_batch(m: int, x: Interval, K: int) -> list:
    """Batched enclosures on boxes inside ``[1, 2]`` (branch-and-bound path)."""
    a = Fraction(2 * m + 1, 2)
    P = _power_derivs_interval(x, a, K)
    C = cutoff_derivs(x, K)
    return _leibniz(P, C, K)


def phi_derivs(m: int, x, K: int) -> list:
    """``[phi_m(x), ..., phi_m^{(K)}(x)]``.

    Raises :class:`NotDifferentiableError` when ``x <= 0`` and ``K > m``.
    """
    m = _check_index(m)
    if isinstance(x, Interval):
        if np.ndim(x.lo):
            return _phi_box_batch(m, x, K)
        if x.hi > x.lo and x.lo >= 1 and x.hi <= 2:
            return mean_value_refine(lambda X, k: _phi_box_batch(m, X, k), x, K)
        return _phi_interval_natural(m, x, K)
    if K > m and np.any(np.asarray(x) <= 0):
        raise NotDifferentiableError(
            f"phi_{m} is only C^{m} on (-inf, 0]; order {K} requested at x <= 0")
    return _phi_float(m, x, K)


def phi_eval(m: int, x, j: int, config: KernelConfig = DEFAULT_KERNELS):
    config.check_order(j)
    return phi_derivs(m, x, j)[j]


# ---------------------------------------------------------------------------
# h_m and the series terms phi_m o h_m


def h_eval(m: int, x, y, alpha: tuple[int, int], config: KernelConfig = DEFAULT_KERNELS):
    m = _check_index(m)
    a, c = alpha
    config.check_order(a + c)
    interval = isinstance(x, Interval) or isinstance(y, Interval)
    eps = inverse_index(m, interval)
    if a == 0 and c == 0:
        return y - b_eps_derivs(eps, x, 0)[0]
    if a == 0 and c == 1:
        return Interval(1.0) if interval else 1.0
    if c == 0:
        return -b_eps_derivs(eps, x, a)[a]
    return Interval(0.0) if interval else 0.0


def h_value(m: int, x, y):
    interval = isinstance(x, Interval) or isinstance(y, Interval)
    return y - b_eps_derivs(inverse_index(m, interval), x, 0)[0]


def term_partials(m: int, x, y, K: int) -> dict:
    """``{(a, c): d_x^a d_y^c (phi_m o h_m)(x, y)}`` for ``a + c <= K``.

    ``h`` is affine in ``y`` with unit slope, so
    ``d_x^a d_y^c (phi o h) = sum_k phi^{(c+k)}(h) B_{a,k}(h_x, h_xx, ...)``.
    Works on floats, arrays and scalar intervals.
    """
    m = _check_index(m)
    interval = isinstance(x, Interval) or isinstance(y, Interval)
    eps = inverse_index(m, interval)
    bd = b_eps_derivs(eps, x, K)
    g0 = y - bd[0]
    zero = Interval(0.0, 0.0) if interval else 0.0

    if interval:
        if g0.lo >= 2 or g0.hi < 0:
            return {(a, n - a): zero for n in range(K + 1) for a in range(n + 1)}
        if g0.lo <= 0 and K > m:
            raise NotDifferentiableError(
                f"term {m} is only C^{m} where h_{m} <= 0; order {K} requested")
    else:
        g0a = np.asarray(g0)
        if K > m and np.any(g0a <= 0):
            raise NotDifferentiableError(
                f"term {m} is only C^{m} where h_{m} <= 0; order {K} requested")
        if g0a.ndim == 0 and (g0a >= 2 or g0a < 0):
            return {(a, n - a): 0.0 for n in range(K + 1) for a in range(n + 1)}

    phi = phi_derivs(m, g0, K)
    g = [g0] + [-v for v in bd[1:]]
    B = bell_table(g, K)
    out = {}
    for c in range(K + 1):
        out[(0, c)] = phi[c]
        for a in range(1, K - c + 1):
            acc = None
            for k in range(1, a + 1):
                term = phi[c + k] * B[a][k]
                acc = term if acc is None else acc + term
            out[(a, c)] = acc
    return out


def term_jet(m: int, p, K: int, config: KernelConfig = DEFAULT_KERNELS,
             interval: bool = False) -> Jet2:
    """Jet of the ``m``-th series term ``phi_m o h_m`` at ``p = (x, y)``."""
    config.check_order(K)
    x, y = p
    if interval:
        x, y = as_interval(x), as_interval(y)
    return Jet2(base=(x, y), order=K, partials=term_partials(m, x, y, K))


# derivative factorial helper re-exported for callers building Taylor data
fact = factorial
