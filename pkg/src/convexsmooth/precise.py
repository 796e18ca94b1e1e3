"""Multiprecision evaluation of the kernels, of ``f`` and of symbolic expressions.

Used where double rounding swamps high-order finite differences: the
order-``j`` difference quotient amplifies evaluation noise by ``~2^j / h^j``.
Scalar and unvectorized; meant for small sample counts.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .errors import DomainError

__all__ = ["DEFAULT_DPS", "expr_value_mp", "f_value_mp", "mp_b", "mp_b_eps", "mp_chi",
           "mp_phi", "mp_s", "plot_mp"]

DEFAULT_DPS = 30
_EXP_CAP = 2 ** 40


def _mpf(v):
    if isinstance(v, Fraction):
        return mp.mpf(v.numerator) / v.denominator
    return mp.mpf(v)


def mp_s(t):
    t = _mpf(t)
    if t <= 0:
        return mp.mpf(0)
    if t >= 1:
        return mp.mpf(1)
    d = 1 / t - 1 / (1 - t)
    # e^{-2^40} is far below any working precision; mpmath cannot exp such arguments
    if abs(d) > _EXP_CAP:
        return mp.mpf(0) if d > 0 else mp.mpf(1)
    return 1 / (1 + mp.exp(d))


def mp_b(x):
    return -mp_s(_mpf(x) + 1)


def mp_chi(x):
    return 1 - mp_s(_mpf(x) - 1)


def mp_b_eps(eps, x):
    eps = _mpf(eps)
    return eps * mp_b(_mpf(x) - 1 + eps)


def mp_phi(m: int, x):
    x = _mpf(x)
    if x <= 0:
        return mp.mpf(0)
    return x ** (m + mp.mpf(1) / 2) * mp_chi(x)


def mp_h(m: int, x, y):
    return _mpf(y) - mp_b_eps(Fraction(1, m), x)


def f_value_mp(x, y, table, M: int | None = None):
    """Partial sum ``sum_{m <= M} phi_m(h_m) / (c_m 2^m)`` with the tabulated ``c_m``."""
    x, y = _mpf(x), _mpf(y)
    if not (y > 0 or (y == 0 and x >= 0)):
        raise DomainError(f"f is only defined on X; got ({float(x)}, {float(y)})")
    M = M or table.max_index
    total = mp.mpf(0)
    for m in range(1, M + 1):
        total += mp_phi(m, mp_h(m, x, y)) / (mp.mpf(table[m]) * 2 ** m)
    return total


def expr_value_mp(e, point, table=None):
    """Value of a symbolic :class:`Expr` at ``point`` (a sequence of numbers)."""
    op, a = e.op, e.args
    ev = lambda i: expr_value_mp(a[i], point, table)
    if op == "coord":
        return _mpf(point[e.param])
    if op == "const":
        return _mpf(e.param)
    if op == "add":
        return ev(0) + ev(1)
    if op == "sub":
        return ev(0) - ev(1)
    if op == "mul":
        return ev(0) * ev(1)
    if op == "div":
        den = ev(1)
        if den == 0:
            raise DomainError(f"division by zero in {e}")
        return ev(0) / den
    if op == "neg":
        return -ev(0)
    if op == "pow":
        return ev(0) ** e.param
    if op == "exp":
        return mp.exp(ev(0))
    if op == "s":
        return mp_s(ev(0))
    if op == "b":
        return mp_b(ev(0))
    if op == "chi":
        return mp_chi(ev(0))
    if op == "b_eps":
        return mp_b_eps(e.param, ev(0))
    if op == "phi":
        return mp_phi(e.param, ev(0))
    if op == "h":
        return mp_h(e.param, ev(0), ev(1))
    if op == "step":
        return mp.mpf(1) if ev(0) > 0 else mp.mpf(0)
    if op == "f":
        if table is None:
            from .bounds import default_table

            table = default_table()
        return f_value_mp(ev(0), ev(1), table)
    raise DomainError(f"unknown operation {op!r}")


def plot_mp(plot):
    """``t -> (x, y)`` in multiprecision for a one-parameter plot.

    Accepts a :class:`SymbolicMap` or a callable that works on mpmath scalars.
    """
    outputs = getattr(plot, "outputs", None)
    if outputs is not None:
        return lambda t: tuple(expr_value_mp(o, (t,)) for o in outputs)

    def call(t):
        out = plot(t)
        return tuple(_mpf(v.item() if hasattr(v, "item") else v) for v in out)

    return call
