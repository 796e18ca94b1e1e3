"""Truncated Taylor arithmetic.

Two coefficient conventions appear here and it matters which one a given
function speaks:

* *Taylor coefficients* ``c_k = f^{(k)}(x0) / k!`` are what the arithmetic
  recurrences (product, quotient) operate on.
* *Raw derivatives* ``f^{(k)}(x0)`` are what ``Jet1``/``Jet2`` store and what
  every public kernel operation returns.  Convert with :func:`taylor_to_raw`
  and :func:`raw_to_taylor` (multiply / divide by ``k!``).

The univariate helpers are written against ``+ - * /`` only, so their
coefficient lists may hold floats, numpy arrays (a batch of base points) or
:class:`~convexsmooth.interval.Interval` objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Any, Sequence

import numpy as np
from scipy.signal import convolve

from .interval import Interval

__all__ = [
    "Jet1",
    "Jet2",
    "MJet",
    "bell_table",
    "compose_raw",
    "raw_to_taylor",
    "taylor_div",
    "taylor_mul",
    "taylor_to_raw",
    "BatchJet",
    "compose_bivariate",
]


def _fact(k: int, like: Any):
    f = factorial(k)
    if isinstance(like, Interval):
        return Interval.exact(f)
    return float(f)


def taylor_to_raw(coeffs: Sequence) -> list:
    return [c * _fact(k, c) if k > 1 else c for k, c in enumerate(coeffs)]


def raw_to_taylor(derivs: Sequence) -> list:
    return [d / _fact(k, d) if k > 1 else d for k, d in enumerate(derivs)]


def taylor_mul(a: Sequence, b: Sequence, K: int | None = None) -> list:
    if K is None:
        K = min(len(a), len(b)) - 1
    out = []
    for k in range(K + 1):
        acc = a[0] * b[k]
        for i in range(1, k + 1):
            acc = acc + a[i] * b[k - i]
        out.append(acc)
    return out


def taylor_div(a: Sequence, d: Sequence, K: int | None = None) -> list:
    """Taylor coefficients of ``a / d``; ``d[0]`` must be nonzero."""
    if K is None:
        K = min(len(a), len(d)) - 1
    q: list = []
    for k in range(K + 1):
        acc = a[k]
        for i in range(1, k + 1):
            acc = acc - d[i] * q[k - i]
        q.append(acc / d[0])
    return q


def bell_table(g: Sequence, K: int) -> list[list]:
    """Partial Bell polynomials ``B[n][k](g_1, ..., g_{n-k+1})`` for ``n <= K``.

    ``g`` holds raw derivatives of the inner function; ``g[0]`` is unused.
    Recurrence: ``B[n][k] = sum_i C(n-1, i-1) g_i B[n-i][k-1]``.
    """
    B: list[list] = [[None] * (K + 1) for _ in range(K + 1)]
    B[0][0] = 1.0
    for n in range(1, K + 1):
        for k in range(1, n + 1):
            acc = None
            for i in range(1, n - k + 2):
                prev = B[n - i][k - 1]
                if prev is None:
                    continue
                term = g[i] * prev
                if i > 1:
                    term = term * comb(n - 1, i - 1)
                acc = term if acc is None else acc + term
            B[n][k] = acc
    return B


def compose_raw(outer: Sequence, g: Sequence, K: int, bell: list[list] | None = None) -> list:
    """Raw derivatives of ``F(g(t))`` from raw derivatives of ``F`` at ``g(t0)``
    and of ``g`` at ``t0`` (Faa di Bruno)."""
    if bell is None:
        bell = bell_table(g, K)
    out = [outer[0]]
    for n in range(1, K + 1):
        acc = None
        for k in range(1, n + 1):
            term = outer[k] * bell[n][k]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


@dataclass(frozen=True)
class Jet1:
    """Raw derivatives ``f(x0), f'(x0), ..., f^{(K)}(x0)``."""

    base: float
    derivs: tuple

    @property
    def order(self) -> int:
        return len(self.derivs) - 1

    def __getitem__(self, j: int):
        return self.derivs[j]

    def taylor(self) -> list:
        return raw_to_taylor(self.derivs)


@dataclass(frozen=True)
class Jet2:
    """Mixed partials ``d^a/dx^a d^c/dy^c f(p)`` for ``a + c <= K``.

    One slot per multi-index, so symmetry of mixed partials is structural.
    """

    base: tuple
    order: int
    partials: dict = field(repr=False)

    def __getitem__(self, alpha: tuple[int, int]):
        a, c = alpha
        if a < 0 or c < 0 or a + c > self.order:
            raise KeyError(f"multi-index {alpha} outside jet of order {self.order}")
        return self.partials[(a, c)]

    def multi_indices(self):
        return [(a, n - a) for n in range(self.order + 1) for a in range(n, -1, -1)]

    def max_abs(self, n: int | None = None):
        vals = [np.max(np.abs(_hi_mag(v))) for (a, c), v in self.partials.items()
                if n is None or a + c == n]
        return float(max(vals)) if vals else 0.0


def _hi_mag(v):
    if isinstance(v, Interval):
        return v.mag()
    return v


# ---------------------------------------------------------------------------
# Dense multivariate jets (float), used by the smooth-structures evaluator.


@lru_cache(maxsize=None)
def _degree_mask(n: int, K: int) -> np.ndarray:
    grids = np.indices((K + 1,) * n)
    return grids.sum(axis=0) <= K


@lru_cache(maxsize=None)
def _factorial_grid(n: int, K: int) -> np.ndarray:
    grids = np.indices((K + 1,) * n)
    out = np.ones((K + 1,) * n)
    for g in grids:
        out = out * np.vectorize(factorial)(g)
    return out


class MJet:
    """Truncated Taylor polynomial in ``n`` variables up to total degree ``K``.

    ``coef[alpha]`` is the Taylor coefficient ``d^alpha f / alpha!``.
    """

    __slots__ = ("coef", "n", "K")

    def __init__(self, coef: np.ndarray, n: int, K: int):
        self.coef = coef
        self.n = n
        self.K = K

    @classmethod
    def constant(cls, value: float, n: int, K: int) -> "MJet":
        c = np.zeros((K + 1,) * n)
        c[(0,) * n] = value
        return cls(c, n, K)

    @classmethod
    def variable(cls, i: int, value: float, n: int, K: int, direction=None) -> "MJet":
        c = np.zeros((K + 1,) * n)
        c[(0,) * n] = value
        if K >= 1:
            idx = [0] * n
            idx[i] = 1
            c[tuple(idx)] = 1.0
        return cls(c, n, K)

    @property
    def value(self) -> float:
        return float(self.coef[(0,) * self.n])

    def partial(self, alpha: Sequence[int]) -> float:
        alpha = tuple(alpha)
        f = 1
        for a in alpha:
            f *= factorial(a)
        return float(self.coef[alpha] * f)

    def _lift(self, other) -> "MJet":
        if isinstance(other, MJet):
            return other
        return MJet.constant(float(other), self.n, self.K)

    def __add__(self, other):
        other = self._lift(other)
        return MJet(self.coef + other.coef, self.n, self.K)

    __radd__ = __add__

    def __neg__(self):
        return MJet(-self.coef, self.n, self.K)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MJet):
            return MJet(self.coef * float(other), self.n, self.K)
        full = convolve(self.coef, other.coef, method="direct")
        sl = tuple(slice(0, self.K + 1) for _ in range(self.n))
        return MJet(full[sl] * _degree_mask(self.n, self.K), self.n, self.K)

    __rmul__ = __mul__

    def centered(self) -> "MJet":
        c = self.coef.copy()
        c[(0,) * self.n] = 0.0
        return MJet(c, self.n, self.K)

    def compose(self, outer_raw: Sequence[float]) -> "MJet":
        """``F(self)`` given raw derivatives of ``F`` at ``self.value``."""
        d = self.centered()
        result = MJet.constant(float(outer_raw[0]), self.n, self.K)
        power = None
        for k in range(1, self.K + 1):
            power = d if power is None else power * d
            if outer_raw[k] != 0:
                result = result + power * (float(outer_raw[k]) / factorial(k))
        return result

    def reciprocal(self) -> "MJet":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("reciprocal of jet with zero value")
        raw = [(-1) ** k * factorial(k) / v ** (k + 1) for k in range(self.K + 1)]
        return self.compose(raw)

    def __truediv__(self, other):
        if not isinstance(other, MJet):
            return MJet(self.coef / float(other), self.n, self.K)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def raw_partials(self) -> dict:
        out = {}
        grid = _factorial_grid(self.n, self.K)
        for idx in zip(*np.nonzero(_degree_mask(self.n, self.K))):
            out[tuple(int(i) for i in idx)] = float(self.coef[idx] * grid[idx])
        return out


# ---------------------------------------------------------------------------
# Batched multivariate jets (one jet per evaluation point)


@lru_cache(maxsize=None)
def _multi_indices(n: int, K: int) -> tuple:
    """Multi-indices of total degree ``<= K`` ordered by degree."""
    out = []

    def rec(prefix, left, dims):
        if dims == 0:
            out.append(tuple(prefix))
            return
        for a in range(left + 1):
            rec(prefix + [a], left - a, dims - 1)

    for deg in range(K + 1):
        level = []
        out_len = len(out)
        rec([], deg, n)
        level = [m for m in out[out_len:] if sum(m) == deg]
        del out[out_len:]
        out.extend(sorted(level, reverse=True))
    return tuple(out)


@lru_cache(maxsize=None)
def _product_table(n: int, K: int):
    idx = _multi_indices(n, K)
    pos = {m: i for i, m in enumerate(idx)}
    ia, ib, ic = [], [], []
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            c = tuple(x + y for x, y in zip(a, b))
            if sum(c) <= K:
                ia.append(i)
                ib.append(j)
                ic.append(pos[c])
    return np.array(ia), np.array(ib), np.array(ic)


@lru_cache(maxsize=None)
def _index_factorials(n: int, K: int) -> np.ndarray:
    out = []
    for m in _multi_indices(n, K):
        f = 1
        for a in m:
            f *= factorial(a)
        out.append(float(f))
    return np.array(out)


class BatchJet:
    """Truncated Taylor polynomials in ``n`` variables at ``N`` base points.

    ``coef[i]`` holds, for the ``i``-th multi-index of
    ``_multi_indices(n, K)``, the Taylor coefficients ``d^alpha f / alpha!``
    at every base point.
    """

    __slots__ = ("coef", "n", "K")

    def __init__(self, coef: np.ndarray, n: int, K: int):
        self.coef = coef
        self.n = n
        self.K = K

    @classmethod
    def constant(cls, value, n: int, K: int, N: int) -> "BatchJet":
        c = np.zeros((len(_multi_indices(n, K)), N))
        c[0] = value
        return cls(c, n, K)

    @classmethod
    def variable(cls, i: int, values, n: int, K: int) -> "BatchJet":
        values = np.asarray(values, dtype=np.float64)
        c = np.zeros((len(_multi_indices(n, K)), values.shape[0]))
        c[0] = values
        if K >= 1:
            unit = tuple(1 if d == i else 0 for d in range(n))
            c[_multi_indices(n, K).index(unit)] = 1.0
        return cls(c, n, K)

    @property
    def N(self) -> int:
        return self.coef.shape[1]

    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    def indices(self):
        return _multi_indices(self.n, self.K)

    def partial(self, alpha) -> np.ndarray:
        alpha = tuple(alpha)
        i = _multi_indices(self.n, self.K).index(alpha)
        return self.coef[i] * _index_factorials(self.n, self.K)[i]

    def raw_partials(self) -> dict:
        fac = _index_factorials(self.n, self.K)
        return {m: self.coef[i] * fac[i] for i, m in enumerate(self.indices())}

    def _lift(self, other) -> "BatchJet":
        if isinstance(other, BatchJet):
            return other
        return BatchJet.constant(np.broadcast_to(np.asarray(other, dtype=np.float64), (self.N,)),
                                 self.n, self.K, self.N)

    def __add__(self, other):
        other = self._lift(other)
        return BatchJet(self.coef + other.coef, self.n, self.K)

    __radd__ = __add__

    def __neg__(self):
        return BatchJet(-self.coef, self.n, self.K)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, BatchJet):
            return BatchJet(self.coef * np.asarray(other, dtype=np.float64), self.n, self.K)
        ia, ib, ic = _product_table(self.n, self.K)
        out = np.zeros_like(self.coef)
        np.add.at(out, ic, self.coef[ia] * other.coef[ib])
        return BatchJet(out, self.n, self.K)

    __rmul__ = __mul__

    def centered(self) -> "BatchJet":
        c = self.coef.copy()
        c[0] = 0.0
        return BatchJet(c, self.n, self.K)

    def compose(self, outer_raw) -> "BatchJet":
        """``F(self)`` from raw derivatives ``F^{(k)}(self.value)`` (arrays over points)."""
        d = self.centered()
        out = BatchJet.constant(np.asarray(outer_raw[0], dtype=np.float64) * np.ones(self.N),
                                self.n, self.K, self.N)
        power = None
        for k in range(1, self.K + 1):
            power = d if power is None else power * d
            out = out + power * (np.asarray(outer_raw[k], dtype=np.float64) / factorial(k))
        return out

    def reciprocal(self) -> "BatchJet":
        v = self.value
        if np.any(v == 0):
            raise ZeroDivisionError("reciprocal of jet with zero value")
        raw = [(-1) ** k * factorial(k) / v ** (k + 1) for k in range(self.K + 1)]
        return self.compose(raw)

    def __truediv__(self, other):
        if not isinstance(other, BatchJet):
            return BatchJet(self.coef / np.asarray(other, dtype=np.float64), self.n, self.K)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()


def compose_bivariate(X: BatchJet, Y: BatchJet, partials: dict) -> BatchJet:
    """``F(X, Y)`` from raw partials ``{(a, c): d_x^a d_y^c F}`` at ``(X.value, Y.value)``."""
    K = X.K
    dx, dy = X.centered(), Y.centered()
    px = [BatchJet.constant(1.0, X.n, K, X.N)]
    py = [BatchJet.constant(1.0, X.n, K, X.N)]
    for _ in range(K):
        px.append(px[-1] * dx)
        py.append(py[-1] * dy)
    out = BatchJet.constant(0.0, X.n, K, X.N)
    for (a, c), v in partials.items():
        if a + c > K:
            continue
        w = np.asarray(v, dtype=np.float64) / (factorial(a) * factorial(c))
        out = out + (px[a] * py[c]) * w
    return out
