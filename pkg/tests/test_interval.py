from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexsmooth.interval import Interval, hull, iexp, ilog, ipow, isqrt

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False)


def interval_from(a, b):
    return Interval(min(a, b), max(a, b))


def encloses(iv: Interval, q) -> bool:
    """``q`` (Fraction or mpf) lies in ``iv`` in exact arithmetic."""
    lo, hi = float(iv.lo), float(iv.hi)
    if isinstance(q, Fraction):
        return ((lo == -np.inf or Fraction(lo) <= q) and (hi == np.inf or q <= Fraction(hi)))
    return mpmath.mpf(lo) <= q <= mpmath.mpf(hi)


@given(finite, finite, finite, finite, st.floats(0, 1), st.floats(0, 1))
def test_arithmetic_encloses_exact_results(a, b, c, d, u, v):
    X, Y = interval_from(a, b), interval_from(c, d)
    # exact points inside each operand
    x = Fraction(float(X.lo)) + (Fraction(float(X.hi)) - Fraction(float(X.lo))) * Fraction(u)
    y = Fraction(float(Y.lo)) + (Fraction(float(Y.hi)) - Fraction(float(Y.lo))) * Fraction(v)
    assert encloses(X + Y, x + y)
    assert encloses(X - Y, x - y)
    assert encloses(X * Y, x * y)
    if Y.lo > 0 or Y.hi < 0:
        assert encloses(X / Y, x / y)


@given(finite)
def test_exact_construction_from_fractions(a):
    q = Fraction(a) / 3
    iv = Interval.exact(q)
    assert encloses(iv, q)
    assert iv.hi - iv.lo <= 2 * np.spacing(abs(float(q))) + 1e-320


@settings(max_examples=200)
@given(st.floats(min_value=-50, max_value=50, allow_nan=False))
def test_exp_encloses_multiprecision(x):
    with mpmath.workdps(40):
        assert encloses(iexp(x), mpmath.exp(mpmath.mpf(x)))


@settings(max_examples=200)
@given(positive)
def test_log_sqrt_pow_enclose_multiprecision(x):
    with mpmath.workdps(40):
        X = mpmath.mpf(x)
        assert encloses(ilog(x), mpmath.log(X))
        assert encloses(isqrt(x), mpmath.sqrt(X))
        assert encloses(ipow(x, 2.5), X ** mpmath.mpf(2.5))
        assert encloses(ipow(x, -3), X ** -3)


def test_exact_special_values():
    assert iexp(0.0).lo == 1.0 and iexp(0.0).hi == 1.0
    assert ilog(1.0).lo == 0.0 and ilog(1.0).hi == 0.0
    assert isqrt(0.0).lo == 0.0
    assert iexp(Interval(-np.inf, -np.inf)).hi == 0.0


def test_invalid_intervals_rejected():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(np.nan)
    with pytest.raises(ValueError):
        ilog(Interval(-1.0, 1.0))


def test_hull_and_batches():
    a = Interval(np.array([0.0, 2.0]), np.array([1.0, 3.0]))
    b = Interval(np.array([-1.0, 2.5]), np.array([0.5, 4.0]))
    h = hull(a, b)
    assert np.array_equal(h.lo, [-1.0, 2.0]) and np.array_equal(h.hi, [1.0, 4.0])
    prod = a * b
    assert np.all(prod.lo <= np.array([0.0 * 0.5, 2.0 * 2.5]))
