"""Outward-rounded interval arithmetic.

Endpoints are float64 scalars or numpy arrays of equal shape, so a single
``Interval`` can stand for a batch of boxes (this is how the branch-and-bound
evaluates a whole generation of boxes at once).

Basic operations (+, -, *, /) round each endpoint one ulp outward, which is
sound because IEEE-754 results are correctly rounded.  Transcendental
functions (exp, log, pow) trust libm to within a few ulps and are widened by
``_LIBM_REL`` relative plus one extra ulp.

Exact zeros are kept exact where that is provably safe (a sum that rounds
to zero is exactly zero; a product with a zero factor is zero), so that
flat-region shortcuts produce the degenerate interval [0, 0].
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Integral, Real

import numpy as np

__all__ = ["Interval", "as_interval", "hull", "iexp", "ilog", "ipow", "isqrt"]

_TINY = 5e-324
_LIBM_REL = 2e-15
_INF = np.inf


def _dn(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _dn_sum(x):
    # a rounded sum of two doubles is zero only if the exact sum is zero
    return np.where(x == 0, x, _dn(x))


def _up_sum(x):
    return np.where(x == 0, x, _up(x))


def _scalarize(x):
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return np.float64(x)
    return x


def _bracket_fraction(q: Fraction):
    f = float(q)
    if Fraction(f) == q:
        return f, f
    if Fraction(f) < q:
        return f, float(_up(f))
    return float(_dn(f)), f


class Interval:
    """Closed interval ``[lo, hi]`` (or a batch of them)."""

    __slots__ = ("lo", "hi")
    __array_priority__ = 1000  # keep ndarray * Interval on our side

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = _scalarize(np.asarray(lo, dtype=np.float64))
        hi = _scalarize(np.asarray(hi, dtype=np.float64))
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("interval endpoint is NaN")
        if np.any(lo > hi):
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo, hi) -> "Interval":
        # trusted endpoints from internal arithmetic: skip validation
        obj = object.__new__(cls)
        obj.lo = _scalarize(lo)
        obj.hi = _scalarize(hi)
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def exact(cls, value) -> "Interval":
        """Tight enclosure of an int, Fraction or float (floats are exact)."""
        if isinstance(value, Interval):
            return value
        if isinstance(value, Integral):
            return cls(*_bracket_fraction(Fraction(int(value))))
        if isinstance(value, Fraction):
            return cls(*_bracket_fraction(value))
        return cls(value, value)

    @classmethod
    def entire(cls, shape=()) -> "Interval":
        return cls(np.full(shape, -_INF), np.full(shape, _INF))

    # -- queries ------------------------------------------------------
    @property
    def shape(self):
        return np.shape(self.lo)

    @property
    def mid(self):
        with np.errstate(over="ignore", invalid="ignore"):
            return _scalarize(0.5 * self.lo + 0.5 * self.hi)

    @property
    def width(self):
        return _scalarize(self.hi - self.lo)

    def mag(self):
        """Upper bound of ``|x|`` over the interval."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        """Lower bound of ``|x|`` over the interval."""
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0,
                        np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def abs(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    def contains(self, x) -> bool | np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (self.lo <= x) & (x <= self.hi)

    def subset_of(self, other: "Interval"):
        return (other.lo <= self.lo) & (self.hi <= other.hi)

    def is_zero(self):
        return (self.lo == 0) & (self.hi == 0)

    def intersect(self, other: "Interval") -> "Interval":
        other = as_interval(other)
        return Interval(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def __getitem__(self, idx) -> "Interval":
        return Interval(np.asarray(self.lo)[idx], np.asarray(self.hi)[idx])

    def __len__(self):
        return len(np.asarray(self.lo))

    def __repr__(self):
        if np.ndim(self.lo) == 0:
            return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"
        return f"Interval(lo={self.lo!r}, hi={self.hi!r})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return bool(np.all(self.lo == other.lo) and np.all(self.hi == other.hi))

    __hash__ = None

    # -- arithmetic ---------------------------------------------------
    def __neg__(self):
        return Interval._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = as_interval(other)
        with np.errstate(invalid="ignore"):
            lo = _dn_sum(self.lo + other.lo)
            hi = _up_sum(self.hi + other.hi)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("interval endpoint is NaN")
        return Interval._raw(lo, hi)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_interval(other))

    def __rsub__(self, other):
        return as_interval(other) + (-self)

    def __mul__(self, other):
        other = as_interval(other)
        with np.errstate(invalid="ignore", over="ignore", under="ignore"):
            p1 = self.lo * other.lo
            p2 = self.lo * other.hi
            p3 = self.hi * other.lo
            p4 = self.hi * other.hi
            lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
            hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        # fast path: no zero product (exact or underflowed) and no 0 * inf
        if not (np.any(p1 == 0) or np.any(p2 == 0) or np.any(p3 == 0) or np.any(p4 == 0)
                or np.any(np.isnan(lo)) or np.any(np.isnan(hi))):
            return Interval._raw(_dn(lo), _up(hi))
        return self._mul_careful(other)

    def _mul_careful(self, other):
        a = (self.lo, self.lo, self.hi, self.hi)
        b = (other.lo, other.hi, other.lo, other.hi)
        los, his = [], []
        with np.errstate(invalid="ignore", over="ignore", under="ignore"):
            for x, y in zip(a, b):
                p = x * y
                exact0 = (x == 0) | (y == 0)
                p = np.where(exact0, 0.0, p)  # 0 * inf := 0
                los.append(np.where(p == 0, np.where(exact0, 0.0, -_TINY), _dn(p)))
                his.append(np.where(p == 0, np.where(exact0, 0.0, _TINY), _up(p)))
        lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
        hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
        return Interval._raw(lo, hi)

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        straddle = (self.lo <= 0) & (self.hi >= 0)
        if np.any(straddle):
            if np.ndim(self.lo) == 0:
                raise ZeroDivisionError(f"division by interval containing zero: {self!r}")
            with np.errstate(divide="ignore"):
                lo = np.where(straddle, -_INF, _dn(1.0 / np.where(straddle, 1.0, self.hi)))
                hi = np.where(straddle, _INF, _up(1.0 / np.where(straddle, 1.0, self.lo)))
            return Interval(lo, hi)
        with np.errstate(divide="ignore", under="ignore", over="ignore"):
            lo = 1.0 / self.hi
            hi = 1.0 / self.lo
            lo = np.where(lo == 0, np.where(np.isinf(self.hi), 0.0, -_TINY), _dn(lo))
            hi = np.where(hi == 0, np.where(np.isinf(self.lo), 0.0, _TINY), _up(hi))
        return Interval(lo, hi)

    def __truediv__(self, other):
        other = as_interval(other)
        if np.ndim(self.lo) == 0 and np.ndim(other.lo) == 0 and self.is_zero() \
                and not (other.lo <= 0 <= other.hi):
            return Interval(0.0, 0.0)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return as_interval(other) / self

    def __pow__(self, n):
        return ipow(self, n)

    def sqr(self) -> "Interval":
        lo2 = self.mig()
        hi2 = self.mag()
        with np.errstate(over="ignore", under="ignore"):
            lo = lo2 * lo2
            hi = hi2 * hi2
        lo = np.where(lo2 == 0, 0.0, np.where(lo == 0, 0.0, _dn(lo)))
        lo = np.maximum(lo, 0.0)
        hi = np.where(hi2 == 0, 0.0, np.where(hi == 0, _TINY, _up(hi)))
        return Interval(lo, hi)


def as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, Fraction) or isinstance(x, Integral):
        return Interval.exact(x)
    if isinstance(x, Real) or isinstance(x, np.ndarray):
        return Interval(x, x)
    raise TypeError(f"cannot convert {type(x).__name__} to Interval")


def hull(*items) -> Interval:
    lo = items[0].lo
    hi = items[0].hi
    for it in items[1:]:
        lo = np.minimum(lo, it.lo)
        hi = np.maximum(hi, it.hi)
    return Interval(lo, hi)


def _widen_rel(lo, hi, allow_negative=True):
    with np.errstate(invalid="ignore", over="ignore"):
        lo2 = _dn(lo - np.abs(lo) * _LIBM_REL)
        hi2 = _up(hi + np.abs(hi) * _LIBM_REL)
    lo2 = np.where(np.isneginf(lo), lo, lo2)
    hi2 = np.where(np.isposinf(hi), hi, hi2)
    if not allow_negative:
        lo2 = np.maximum(lo2, 0.0)
    return lo2, hi2


def iexp(x) -> Interval:
    x = as_interval(x)
    with np.errstate(over="ignore", under="ignore"):
        lo, hi = _widen_rel(np.exp(x.lo), np.exp(x.hi), allow_negative=False)
    # exp(-inf) == 0 and exp(0) == 1 exactly
    lo = np.where(x.lo == 0, 1.0, lo)
    hi = np.where(x.hi == 0, 1.0, hi)
    lo = np.where(x.lo == -_INF, 0.0, lo)
    hi = np.where(x.hi == -_INF, 0.0, hi)
    return Interval(lo, hi)


def ilog(x) -> Interval:
    x = as_interval(x)
    if np.any(x.lo < 0):
        raise ValueError("log of interval with negative part")
    with np.errstate(divide="ignore"):
        lo, hi = _widen_rel(np.log(x.lo), np.log(x.hi))
    lo = np.where(x.lo == 1, 0.0, lo)
    hi = np.where(x.hi == 1, 0.0, hi)
    return Interval(lo, hi)


def isqrt(x) -> Interval:
    x = as_interval(x)
    if np.any(x.lo < 0):
        raise ValueError("sqrt of interval with negative part")
    lo = _dn(np.sqrt(x.lo))
    hi = _up(np.sqrt(x.hi))
    return Interval(np.where(x.lo == 0, 0.0, np.maximum(lo, 0.0)), hi)


def ipow(x, a) -> Interval:
    """``x**a`` for real ``a``; non-integer ``a`` needs ``x >= 0``."""
    x = as_interval(x)
    if isinstance(a, Integral):
        n = int(a)
        if n == 0:
            return Interval(np.ones_like(x.lo), np.ones_like(x.hi))
        if n < 0:
            return ipow(x, -n).reciprocal()
        result = None
        base = x
        k = n
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base.sqr()
        return result
    a = float(a)
    if np.any(x.lo < 0):
        raise ValueError("fractional power of interval with negative part")
    with np.errstate(divide="ignore", over="ignore"):
        plo = np.power(x.lo, a)
        phi = np.power(x.hi, a)
    if a < 0:
        plo, phi = phi, plo
    lo, hi = _widen_rel(plo, phi, allow_negative=False)
    if a > 0:
        lo = np.where(x.lo == 0, 0.0, lo)
    lo = np.where(np.isinf(plo) & (plo > 0), plo, lo)
    return Interval(lo, hi)


def exact_gamma_ratio(m: int) -> Fraction:
    """``prod_{i=0}^{m-1} (m + 1/2 - i)`` as an exact rational."""
    q = Fraction(1)
    for i in range(m):
        q *= Fraction(2 * m + 1 - 2 * i, 2)
    return q


def falling(a: Fraction, j: int) -> Fraction:
    """Falling factorial ``a (a-1) ... (a-j+1)`` as an exact rational."""
    q = Fraction(1)
    for i in range(j):
        q *= a - i
    return q


def fraction_interval(q: Fraction) -> Interval:
    return Interval(*_bracket_fraction(Fraction(q)))


def round_up(q) -> float:
    """Smallest convenient float >= the exact rational/number ``q``."""
    if isinstance(q, Interval):
        return float(q.hi)
    return _bracket_fraction(Fraction(q))[1]

