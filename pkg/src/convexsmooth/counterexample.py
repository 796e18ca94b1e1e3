"""The function ``f = sum_m phi_m o h_m / (c_m 2^m)`` restricted to ``X``.

``X = {y > 0} u {(x, 0) : x >= 0}`` and ``U_m = {h_m > 0}``; each ``U_m`` is
open, the ``U_m`` decrease in ``m``, and their intersection contains ``X``.
On ``U_k`` the terms ``m <= k`` are smooth and the remainder is
``C^{k+1}``, which is how derivatives of ``f`` at points of ``X`` (including
the boundary ray) are evaluated: as derivatives of the partial-sum plus tail
extension on an open neighbourhood.

Constants ``c_m`` come from a :class:`~convexsmooth.bounds.CmTable`.  Terms
beyond the table enter only through a tail bound that holds for *every*
admissible choice of ``c_m`` (any ``c_m`` bounding the derivatives of order
``<= m`` is at least ``prod_{i<m} (m + 1/2 - i)``), so enclosures do not
depend on how the sequence is continued.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .bounds import CmTable, default_table, lower_c, term_derivative_majorant
from .errors import CapabilityError, DomainError, NotDifferentiableError, PreconditionError
from .interval import Interval
from .kernels import h_value, term_partials
from .verdict import Verdict

__all__ = [
    "BlowupCertificate",
    "CertifiedValue",
    "CkCertificate",
    "blowup_closed_form",
    "contrast_sweep",
    "f_eval",
    "f_partial",
    "f_partials_float",
    "f_values_float",
    "in_U",
    "in_X",
    "origin_samples",
    "plot_composition_check",
    "verify_blowup",
    "verify_ck_bounded",
]

# terms beyond the table that are summed explicitly before the geometric remainder
TAIL_TERMS = 80


# ---------------------------------------------------------------------------
# regions


def in_X(p) -> bool:
    x, y = float(p[0]), float(p[1])
    return y > 0 or (y == 0 and x >= 0)


def in_U(k: int, p) -> bool:
    """``h_k(p) > 0``, decided from a certified enclosure when possible."""
    x, y = float(p[0]), float(p[1])
    h = h_value(k, Interval(x), Interval(y))
    if h.lo > 0:
        return True
    if h.hi <= 0:
        return False
    return bool(h_value(k, x, y) > 0)


def limiting_index(p, kmax: int = 64) -> int:
    """Largest ``k <= kmax`` with ``p`` in ``U_k`` (0 if none); the ``U_k`` decrease."""
    last = 0
    for k in range(1, kmax + 1):
        if not in_U(k, p):
            break
        last = k
    return last


# ---------------------------------------------------------------------------
# certified values


@dataclass(frozen=True)
class CertifiedValue:
    """Enclosure of ``f`` or ``d^alpha f`` at a point.

    Terms ``m <= M`` are evaluated in interval arithmetic; ``tail`` bounds
    the remaining terms.  The enclosure is intersected over all admissible
    truncations ``<= M``, so raising ``M`` never enlarges it.
    """

    enclosure: Interval
    M: int
    tail: float
    alpha: tuple = (0, 0)
    point: tuple = (0.0, 0.0)

    @property
    def lo(self) -> float:
        return float(self.enclosure.lo)

    @property
    def hi(self) -> float:
        return float(self.enclosure.hi)

    @property
    def width(self) -> float:
        return float(self.enclosure.hi - self.enclosure.lo)

    def contains(self, v) -> bool:
        return bool(self.enclosure.contains(v))

    def to_dict(self) -> dict:
        return {"point": list(self.point), "alpha": list(self.alpha), "lo": self.lo,
                "hi": self.hi, "M": self.M, "tail": self.tail}


def _coeff(m: int, table: CmTable) -> Interval:
    """Enclosure of ``1 / (c_m 2^m)`` for the tabulated float ``c_m``."""
    return (Interval(table[m]) * Interval(2.0 ** m)).reciprocal()


def _up_add(a, b):
    s = a + b
    return np.where(s == 0, s, np.nextafter(s, np.inf))


def tail_table(y, alpha, first: int, table: CmTable) -> dict:
    """``{M: upper bound of sum_{m > M} |d^alpha term_m| / (c_m 2^m)}`` for ``M >= first``.

    Evaluated at ordinates ``y`` (arrays allowed).  Requires
    ``first >= |alpha| - 1`` so every tail term has ``m >= |alpha|`` and is
    dominated by ``2^{-m}``.
    """
    a, c = alpha
    n = a + c
    if first < n - 1:
        raise CapabilityError("tail bound needs M >= |alpha| - 1")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    S = table.smoothstep
    if n >= len(S):
        raise CapabilityError(f"order {n} beyond tabulated smooth-step bounds")
    cap = table.max_index
    stop = max(first, cap) + TAIL_TERMS
    # every h_m >= y >= 2, or every h_m <= y + 1/stop < 0: the rest vanishes identically
    vanish = (y >= 2.0) | (y + 1.0 / stop < 0)
    total = np.where(vanish, 0.0, 2.0 ** (-stop))
    out = {}
    for m in range(stop, first, -1):
        c_lo = table[m] if m <= cap else lower_c(m)
        scale = float((Interval(c_lo) * Interval(2.0 ** m)).reciprocal().hi)
        h_hi = np.nextafter(y + 1.0 / m * (1 + 1e-15), np.inf)
        with np.errstate(invalid="ignore", over="ignore"):
            maj = term_derivative_majorant(m, alpha, y, h_hi, S) * scale
        maj = np.nextafter(maj, np.inf)
        total = _up_add(total, np.minimum(maj, 2.0 ** (-m)))
        if m - 1 <= cap:
            out[m - 1] = total.copy()
    return out


def tail_bounds(y, alpha, M: int, table: CmTable):
    return tail_table(y, alpha, M, table)[M]


def _term_enclosures(x: float, y: float, alpha, table: CmTable, upto: int) -> list:
    n = alpha[0] + alpha[1]
    X, Y = Interval(x), Interval(y)
    out = []
    for m in range(1, upto + 1):
        tp = term_partials(m, X, Y, n)
        out.append(tp[tuple(alpha)] * _coeff(m, table))
    return out


def _nested(parts: list, tails: list, first: int, nonneg: bool):
    """Enclosures ``E_j`` for ``j >= first`` intersected cumulatively."""
    acc_lo, acc_hi = 0.0, 0.0
    running = []
    for j, tm in enumerate(parts, start=1):
        lo, hi = float(tm.lo), float(tm.hi)
        if nonneg:
            lo = max(lo, 0.0)
        acc_lo = float(np.nextafter(acc_lo + lo, -np.inf)) if (acc_lo + lo) != 0 else 0.0
        acc_hi = float(np.nextafter(acc_hi + hi, np.inf)) if (acc_hi + hi) != 0 else 0.0
        running.append((acc_lo, acc_hi))
    out = {}
    cur_lo, cur_hi = -np.inf, np.inf
    for j in range(first, len(parts) + 1):
        s_lo, s_hi = running[j - 1]
        t = float(tails[j])
        e_lo = s_lo if nonneg else float(np.nextafter(s_lo - t, -np.inf)) if t else s_lo
        e_hi = float(np.nextafter(s_hi + t, np.inf)) if t else s_hi
        cur_lo, cur_hi = max(cur_lo, e_lo), min(cur_hi, e_hi)
        out[j] = (cur_lo, cur_hi)
    return out


def _select(encls: dict, tol: float, M: int | None, what: str):
    if M is not None:
        if M not in encls:
            raise CapabilityError(f"truncation M={M} outside available range {min(encls)}..{max(encls)}")
        return M
    for j in sorted(encls):
        lo, hi = encls[j]
        if hi - lo <= tol:
            return j
    j = max(encls)
    raise CapabilityError(
        f"{what}: tolerance {tol:g} unreachable within table range "
        f"(best width {encls[j][1] - encls[j][0]:.3g} at M={j})")


def f_eval(p, tol: float = 1e-8, M: int | None = None, table: CmTable | None = None) -> CertifiedValue:
    """Certified ``f(p)`` for ``p`` in ``X``.

    Without ``M`` the smallest truncation meeting ``tol`` is used.
    """
    x, y = float(p[0]), float(p[1])
    if not in_X((x, y)):
        raise DomainError(f"{(x, y)} is not in X")
    table = table or default_table()
    cap = table.max_index
    if y >= 2.0:
        # h_m >= y >= 2 for all m: every term vanishes
        return CertifiedValue(Interval(0.0, 0.0), M or 1, 0.0, (0, 0), (x, y))
    parts = _term_enclosures(x, y, (0, 0), table, cap)
    tails = {j: float(v[0]) for j, v in tail_table(y, (0, 0), 1, table).items()}
    encls = _nested(parts, tails, 1, nonneg=True)
    j = _select(encls, tol, M, "f_eval")
    lo, hi = encls[j]
    return CertifiedValue(Interval(lo, hi), j, tails[j], (0, 0), (x, y))


def f_partial(p, alpha, tol: float = 1e-8, M: int | None = None,
              table: CmTable | None = None) -> CertifiedValue:
    """Certified ``d^alpha f(p)`` through the ``U_k`` extension.

    Needs ``|alpha| <= k + 1`` for the largest ``k`` with ``p`` in ``U_k``.
    """
    x, y = float(p[0]), float(p[1])
    a, c = int(alpha[0]), int(alpha[1])
    if a < 0 or c < 0:
        raise DomainError("negative multi-index")
    n = a + c
    table = table or default_table()
    cap = table.max_index
    if n > table.kernels.max_order:
        raise CapabilityError(f"order {n} exceeds configured max order {table.kernels.max_order}")
    if y > 2.0:
        return CertifiedValue(Interval(0.0, 0.0), max(M or 1, n, 1), 0.0, (a, c), (x, y))
    if n >= 1:
        k = limiting_index((x, y), kmax=max(n, 1))
        if k < n - 1:
            raise NotDifferentiableError(
                f"point {(x, y)} lies in U_{k} only; derivatives of order <= {k + 1} exist there, "
                f"order {n} requested")
    first = max(1, n)
    if first > cap:
        raise CapabilityError("order beyond table range")
    parts = _term_enclosures(x, y, (a, c), table, cap)
    tails = {j: float(v[0]) for j, v in tail_table(y, (a, c), first, table).items()}
    encls = _nested(parts, tails, first, nonneg=(n == 0))
    j = _select(encls, tol, M, "f_partial")
    lo, hi = encls[j]
    return CertifiedValue(Interval(lo, hi), j, tails[j], (a, c), (x, y))


# ---------------------------------------------------------------------------
# fast float evaluation (partial sums through the table)


@lru_cache(maxsize=8)
def _coeffs_float(table_id: int, values: tuple) -> tuple:
    return tuple(1.0 / (c * 2.0 ** m) for m, c in values)


def _float_coeffs(table: CmTable) -> tuple:
    vals = tuple(sorted(table.values.items()))
    return _coeffs_float(id(table), vals)


def f_values_float(x, y, table: CmTable | None = None, M: int | None = None):
    """Partial sum ``sum_{m <= M} phi_m(h_m) / (c_m 2^m)`` (vectorized floats)."""
    table = table or default_table()
    M = M or table.max_index
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    co = _float_coeffs(table)
    total = np.zeros(np.broadcast(x, y).shape)
    for m in range(1, M + 1):
        total = total + term_partials(m, x, y, 0)[(0, 0)] * co[m - 1]
    return total if total.ndim else float(total)


def f_partials_float(x, y, K: int, table: CmTable | None = None, M: int | None = None) -> dict:
    """``{alpha: d^alpha (partial sum)}`` for ``|alpha| <= K`` (vectorized floats)."""
    table = table or default_table()
    M = M or table.max_index
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    co = _float_coeffs(table)
    shape = np.broadcast(x, y).shape
    out = {(a, nn - a): np.zeros(shape) for nn in range(K + 1) for a in range(nn + 1)}
    for m in range(1, M + 1):
        tp = term_partials(m, np.broadcast_to(x, shape), np.broadcast_to(y, shape), K)
        for key in out:
            out[key] = out[key] + tp[key] * co[m - 1]
    return out


# ---------------------------------------------------------------------------
# blow-up of the (k+1)-st y-derivative of the k-th term


def blowup_closed_form(k: int, y):
    """``prod_{i=0}^{k} (k + 1/2 - i) * y^{-1/2}``."""
    coef = 1.0
    for i in range(k + 1):
        coef *= k + 0.5 - i
    return coef * np.power(np.asarray(y, dtype=np.float64), -0.5)


@dataclass(frozen=True)
class BlowupCertificate:
    k: int
    ys: tuple
    values: tuple
    closed_form: tuple
    residuals: tuple
    slope: float
    monotone: bool
    rel_tol: float = 1e-9
    slope_tol: float = 0.02

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        # a single ordinate has no slope; the closed-form residual still decides
        slope_ok = np.isnan(self.slope) or abs(self.slope + 0.5) <= self.slope_tol
        return self.max_residual <= self.rel_tol and self.monotone and bool(slope_ok)

    def to_dict(self) -> dict:
        return {"k": self.k, "y": list(self.ys), "value": list(self.values),
                "closed_form": list(self.closed_form), "residual": list(self.residuals),
                "slope": self.slope, "monotone": self.monotone,
                "max_residual": self.max_residual, "passed": self.passed}

    def rows(self):
        return list(zip(self.ys, self.values, self.closed_form, self.residuals))


def loglog_slope(xs, vs) -> float:
    lx = np.log(np.asarray(xs, dtype=np.float64))
    lv = np.log(np.abs(np.asarray(vs, dtype=np.float64)))
    slope, _ = np.polyfit(lx, lv, 1)
    return float(slope)


def verify_blowup(k: int, y_list) -> BlowupCertificate:
    """Jet values of ``d_y^{k+1} (phi_k o h_k)(-1/k, y)`` against the closed form."""
    ys = np.asarray(list(y_list), dtype=np.float64)
    if ys.size == 0 or np.any(ys <= 0) or np.any(ys >= 1):
        raise DomainError("y values must lie in (0, 1)")
    if np.any(np.diff(ys) >= 0):
        raise DomainError("y values must be strictly decreasing")
    x = -1.0 / k
    tp = term_partials(k, np.full_like(ys, x), ys, k + 1)
    vals = np.asarray(tp[(0, k + 1)], dtype=np.float64)
    closed = blowup_closed_form(k, ys)
    res = np.abs(vals - closed) / np.abs(closed)
    mono = bool(np.all(np.diff(np.abs(vals)) > 0))
    slope = loglog_slope(ys, vals) if ys.size > 1 else float("nan")
    return BlowupCertificate(k, tuple(ys.tolist()), tuple(vals.tolist()), tuple(closed.tolist()),
                             tuple(res.tolist()), slope, mono)


# ---------------------------------------------------------------------------
# C^{k+1} boundedness on U_k near the origin


def origin_samples(k: int, n: int = 1000, radius: float = 0.5, seed: int = 0) -> np.ndarray:
    """``n`` points of ``U_k`` inside the disc of ``radius``, accumulating at the origin.

    Radii are ``radius * u^3`` for uniform ``u`` so sample density grows
    towards the origin; about a third of the points approach along the axis
    ``y = 0`` from either side.
    """
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        u = rng.random()
        r = radius * u ** 3
        mode = rng.integers(0, 3)
        if mode == 0:
            theta = rng.uniform(0, 2 * np.pi)
            q = (r * np.cos(theta), r * np.sin(theta))
        elif mode == 1:
            q = (r * rng.choice([-1.0, 1.0]), 0.0)
        else:
            q = (r * rng.uniform(-1, 1), r * rng.uniform(0, 1) ** 2)
        if in_U(k, q):
            pts.append(q)
    return np.asarray(pts)


def multi_indices(K: int):
    return [(a, n - a) for n in range(K + 1) for a in range(n, -1, -1)]


def analytic_bound(points: np.ndarray, alpha, table: CmTable) -> np.ndarray:
    """``sum_m`` of termwise bounds on ``|d^alpha term_m| / (c_m 2^m)``.

    Terms with ``m >= |alpha|`` contribute ``2^{-m}`` (``c_m`` domination);
    lower terms use the pointwise majorant at ``h_m(p)``.
    """
    a, c = alpha
    n = a + c
    S = table.smoothstep
    cap = table.max_index
    x, y = points[:, 0], points[:, 1]
    total = np.zeros(len(points))
    for m in range(1, cap + 1):
        if m >= n:
            total = _up_add(total, np.full(len(points), 2.0 ** (-m)))
            continue
        h = h_value(m, Interval(x, x), Interval(y, y))
        scale = float(_coeff(m, table).hi)
        maj = term_derivative_majorant(m, alpha, h.lo, h.hi, S) * scale
        total = _up_add(total, np.nextafter(maj, np.inf))
    return _up_add(total, np.full(len(points), 2.0 ** (-cap)))


@dataclass(frozen=True)
class CkCertificate:
    k: int
    sample_spec: dict
    observed: dict
    bound: dict
    margin: float
    contrast: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return self.margin > 0 and all(np.isfinite(v) for v in self.bound.values())

    @property
    def passed(self) -> bool:
        return self.bounded and bool(self.contrast.get("growing", True))

    def to_dict(self) -> dict:
        key = lambda al: f"{al[0]},{al[1]}"
        return {"k": self.k, "sample_spec": self.sample_spec,
                "observed": {key(a): v for a, v in self.observed.items()},
                "bound": {key(a): v for a, v in self.bound.items()},
                "margin": self.margin, "contrast": self.contrast,
                "bounded": self.bounded, "passed": self.passed}


def contrast_sweep(k: int, ys=None, table: CmTable | None = None) -> dict:
    """``|d_y^{k+2} f|`` along ``x = -1/(k+1)`` as ``y -> 0+``."""
    table = table or default_table()
    if ys is None:
        # close enough to the axis that the (k+1)-st term dominates the bounded rest
        ys = np.logspace(-14, -22, 25)
    ys = np.asarray(ys, dtype=np.float64)
    order = k + 2
    if order > table.kernels.max_order:
        raise CapabilityError("contrast order beyond configured max order")
    vals = f_partials_float(np.full_like(ys, -1.0 / (k + 1)), ys, order, table)[(0, order)]
    mags = np.abs(vals)
    return {"x": -1.0 / (k + 1), "order": order, "y": ys.tolist(), "abs_value": mags.tolist(),
            "growth": float(mags[-1] / mags[0]), "monotone": bool(np.all(np.diff(mags) > 0)),
            "growing": bool(np.all(np.diff(mags) > 0) and mags[-1] / mags[0] > 1e3)}


def verify_ck_bounded(k: int, samples=None, n: int = 1000, radius: float = 0.5, seed: int = 0,
                      table: CmTable | None = None, contrast: bool = True) -> CkCertificate:
    """Derivatives of order ``<= k+1`` stay below the analytic series bound on samples of ``U_k``."""
    table = table or default_table()
    if k < 1:
        raise DomainError("k must be a positive integer")
    if k + 1 > table.kernels.max_order:
        raise CapabilityError("order k+1 beyond configured max order")
    if samples is None:
        samples = origin_samples(k, n, radius, seed)
        spec = {"kind": "origin-accumulating", "n": int(n), "radius": radius, "seed": seed}
    else:
        samples = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
        spec = {"kind": "explicit", "n": int(len(samples))}
    for q in samples:
        if not in_U(k, q):
            raise DomainError(f"sample {tuple(q)} is not in U_{k}")
    K = k + 1
    parts = f_partials_float(samples[:, 0], samples[:, 1], K, table)
    observed, bound = {}, {}
    margin = np.inf
    for al in multi_indices(K):
        tail = tail_bounds(samples[:, 1], al, table.max_index, table)
        obs = np.abs(parts[al]) + tail
        bnd = analytic_bound(samples, al, table)
        observed[al] = float(obs.max())
        bound[al] = float(bnd.max())
        margin = min(margin, float(np.min(bnd - obs)))
    sweep = contrast_sweep(k, table=table) if contrast else {}
    return CkCertificate(k, spec, observed, bound, margin, sweep)


# ---------------------------------------------------------------------------
# smoothness of f along plots into X


def _curve(plot):
    if hasattr(plot, "curve"):
        return plot.curve()
    return plot


def central_difference(F, t: float, j: int, h: float) -> float:
    """Order-``j`` central difference with nodes ``t + (j/2 - i) h``."""
    nodes = t + (j / 2.0 - np.arange(j + 1)) * h
    w = np.array([(-1) ** i * comb(j, i) for i in range(j + 1)], dtype=np.float64)
    return float(np.dot(w, F(nodes)) / h ** j)


def richardson(F, t: float, j: int, h: float) -> float:
    return (4.0 * central_difference(F, t, j, h / 2) - central_difference(F, t, j, h)) / 3.0


def _fd_residual(F, t: float, j: int, h: float) -> tuple[float, float]:
    r1 = richardson(F, t, j, h)
    r2 = richardson(F, t, j, h / 2)
    return abs(r1 - r2) / max(1.0, abs(r2)), r2


STEP_LADDER = (0.02, 0.01, 0.005, 0.0025)


def fd_consistency(F, t: float, j: int, ladder=STEP_LADDER) -> tuple[float, float, float]:
    """Best Richardson consistency over a ladder of base steps: ``(residual, estimate, step)``."""
    best = (np.inf, np.nan, np.nan)
    for h in ladder:
        res, est = _fd_residual(F, t, j, h)
        if res < best[0]:
            best = (res, est, h)
    return best


MP_LADDER = (0.002, 0.001, 0.0005, 0.00025)


def _fd_consistency_mp(F, t, j: int, ladder=MP_LADDER) -> tuple[float, float, float]:
    """:func:`fd_consistency` with ``F`` evaluated in multiprecision."""
    import mpmath as mp

    w = [(-1) ** i * comb(j, i) for i in range(j + 1)]

    def central(h):
        return mp.fsum(wi * F(t + (mp.mpf(j) / 2 - i) * h) for i, wi in enumerate(w)) / h ** j

    def rich(h):
        return (4 * central(h / 2) - central(h)) / 3

    best = (np.inf, np.nan, np.nan)
    for h0 in ladder:
        h = mp.mpf(h0)
        r1, r2 = rich(h), rich(h / 2)
        res = float(abs(r1 - r2) / max(1, abs(r2)))
        if res < best[0]:
            best = (res, float(r2), h0)
    return best


def plot_composition_check(plot, K: int, params=None, tol: float = 1e-4,
                           table: CmTable | None = None, ladder=None,
                           precision: str = "double") -> Verdict:
    """Richardson consistency of finite-difference derivatives of ``f o p`` up to order ``K``.

    ``plot`` maps a parameter array to ``(x, y)`` arrays (or exposes ``curve()``).
    The image at every sampled parameter and stencil node must lie in ``X``.
    With ``precision="mp"`` both ``p`` and ``f`` are evaluated in multiprecision
    on a finer step ladder; the plot must then be symbolic or accept mpmath scalars.
    """
    if precision not in ("double", "mp"):
        raise DomainError(f"precision must be 'double' or 'mp', got {precision!r}")
    table = table or default_table()
    curve = _curve(plot)
    if ladder is None:
        ladder = MP_LADDER if precision == "mp" else STEP_LADDER
    if params is None:
        params = np.linspace(-0.9, 0.9, 13)
    params = np.asarray(params, dtype=np.float64)

    def image(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        pts = [np.broadcast_to(np.asarray(v, dtype=np.float64), ts.shape) for v in curve(ts)]
        return pts[0], pts[1]

    if precision == "mp":
        import mpmath as mp

        from .precise import DEFAULT_DPS, f_value_mp, plot_mp

        pm = plot_mp(plot)
        memo: dict = {}  # stencils of different orders and steps share nodes

        def F1(t):
            if t not in memo:
                memo[t] = f_value_mp(*pm(t), table)
            return memo[t]

        def consistency(t, j):
            with mp.workdps(DEFAULT_DPS):
                return _fd_consistency_mp(F1, mp.mpf(t), j, ladder)
    else:
        def F(ts):
            xs, ys = image(ts)
            return np.atleast_1d(f_values_float(xs, ys, table))

        def consistency(t, j):
            return fd_consistency(F, t, j, ladder)

    hmax = max(ladder)
    for t in params:
        nodes = t + np.linspace(-K / 2.0, K / 2.0, 8 * K + 1) * hmax
        xs, ys = image(np.concatenate([[t], nodes]))
        for xv, yv in zip(xs, ys):
            if not in_X((xv, yv)):
                raise PreconditionError(f"plot leaves X near parameter {t}",
                                        witness=(float(xv), float(yv)))
    worst, values = 0.0, {}
    for t in params:
        for j in range(1, K + 1):
            res, est, h = consistency(float(t), j)
            values[(float(t), j)] = est
            worst = max(worst, res)
            if not res <= tol:
                tt, jj = float(t), j
                return Verdict.failed(tt, jj, res, "finite differences not Richardson-consistent",
                                      replay=lambda: consistency(tt, jj)[0],
                                      tolerance=tol, samples=len(params), estimate=est)
    return Verdict.passed(len(params), K, tol, "f o p finite differences Richardson-consistent",
                          max_residual=worst, precision=precision,
                          derivatives={f"{t}:{j}": v for (t, j), v in values.items()})
