"""A small expression grammar for plots, functions and Chen plots.

Plots ``U -> X``, functions ``X -> R`` and Chen plots ``C -> X`` are all
:class:`SymbolicMap` objects; what tells them apart is the domain
descriptor.  Expressions are immutable trees of :class:`Expr` nodes and can
be evaluated as values or as batched jets (all partial derivatives up to a
fixed order at many points at once).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .. import kernels
from ..errors import DomainError
from ..jets import BatchJet, compose_bivariate

__all__ = [
    "Expr",
    "SymbolicMap",
    "b",
    "b_eps",
    "chi",
    "const",
    "coord",
    "coords",
    "exp",
    "fnode",
    "h",
    "phi",
    "s",
    "step",
]

# nodes with a single argument evaluated through a univariate derivative list
_UNARY_KERNELS = {"exp", "s", "b", "chi", "b_eps", "phi", "step"}
_SMOOTH_OPS = {"coord", "const", "add", "sub", "mul", "neg", "pow", "exp",
               "s", "b", "chi", "b_eps", "h"}
_POLY_OPS = {"coord", "const", "add", "sub", "mul", "neg", "pow"}


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v)
    return Fraction(v)


@dataclass(frozen=True)
class Expr:
    """One node: an operation tag, argument nodes and an optional parameter."""

    op: str
    args: tuple = ()
    param: Any = None

    # -- construction sugar
    def _wrap(self, other) -> "Expr":
        return other if isinstance(other, Expr) else const(other)

    def __add__(self, other):
        return Expr("add", (self, self._wrap(other)))

    def __radd__(self, other):
        return Expr("add", (self._wrap(other), self))

    def __sub__(self, other):
        return Expr("sub", (self, self._wrap(other)))

    def __rsub__(self, other):
        return Expr("sub", (self._wrap(other), self))

    def __mul__(self, other):
        return Expr("mul", (self, self._wrap(other)))

    def __rmul__(self, other):
        return Expr("mul", (self._wrap(other), self))

    def __truediv__(self, other):
        return Expr("div", (self, self._wrap(other)))

    def __rtruediv__(self, other):
        return Expr("div", (self._wrap(other), self))

    def __neg__(self):
        return Expr("neg", (self,))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise DomainError("only non-negative integer powers are supported")
        return Expr("pow", (self,), n)

    # -- structure queries
    def walk(self):
        yield self
        for a in self.args:
            yield from a.walk()

    def uses(self) -> set:
        return {n.op for n in self.walk()}

    def max_coord(self) -> int:
        idx = [n.param for n in self.walk() if n.op == "coord"]
        return max(idx) if idx else -1

    def is_structurally_smooth(self) -> bool:
        for n in self.walk():
            if n.op in _SMOOTH_OPS:
                continue
            if n.op == "div" and n.args[1].op == "const" and n.args[1].param != 0:
                continue
            return False
        return True

    def is_polynomial(self) -> bool:
        return self.uses() <= _POLY_OPS

    def substitute(self, inner: Sequence["Expr"]) -> "Expr":
        if self.op == "coord":
            return inner[self.param]
        if not self.args:
            return self
        return Expr(self.op, tuple(a.substitute(inner) for a in self.args), self.param)

    # -- serialization
    def to_dict(self) -> dict:
        d: dict = {"op": self.op}
        if self.args:
            d["args"] = [a.to_dict() for a in self.args]
        if self.param is not None:
            d["param"] = str(self.param) if isinstance(self.param, Fraction) else self.param
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Expr":
        op = d["op"]
        param = d.get("param")
        if op in ("const", "b_eps") and param is not None:
            param = Fraction(param)
        args = tuple(cls.from_dict(a) for a in d.get("args", ()))
        return cls(op, args, param)

    def __str__(self):
        op, a, p = self.op, self.args, self.param
        if op == "coord":
            return f"x{p}"
        if op == "const":
            return str(p)
        infix = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
        if op in infix:
            return f"({a[0]} {infix[op]} {a[1]})"
        if op == "neg":
            return f"-{a[0]}"
        if op == "pow":
            return f"{a[0]}^{p}"
        if op in ("phi", "b_eps", "h"):
            return f"{op}[{p}]({', '.join(map(str, a))})"
        return f"{op}({', '.join(map(str, a))})"

    # -- evaluation
    def value(self, X: np.ndarray) -> np.ndarray:
        """Values at the rows of ``X`` (shape ``(N, n)``)."""
        op, a = self.op, self.args
        if op == "coord":
            return X[:, self.param]
        if op == "const":
            return np.full(X.shape[0], float(self.param))
        if op == "add":
            return a[0].value(X) + a[1].value(X)
        if op == "sub":
            return a[0].value(X) - a[1].value(X)
        if op == "mul":
            return a[0].value(X) * a[1].value(X)
        if op == "div":
            den = a[1].value(X)
            if np.any(den == 0):
                raise DomainError(f"division by zero in {self}")
            return a[0].value(X) / den
        if op == "neg":
            return -a[0].value(X)
        if op == "pow":
            return a[0].value(X) ** self.param
        if op == "h":
            return kernels.h_value(self.param, a[0].value(X), a[1].value(X))
        if op == "f":
            from ..counterexample import f_values_float

            x, y = a[0].value(X), a[1].value(X)
            _check_in_X(x, y)
            return np.asarray(f_values_float(x, y), dtype=np.float64) * np.ones(X.shape[0])
        return np.asarray(_unary_derivs(op, self.param, a[0].value(X), 0)[0],
                          dtype=np.float64) * np.ones(X.shape[0])

    def jet(self, X: np.ndarray, K: int, memo: dict | None = None) -> BatchJet:
        """Batched jet of order ``K`` at the rows of ``X``."""
        memo = {} if memo is None else memo
        key = id(self)
        if key in memo:
            return memo[key]
        n = X.shape[1]
        op, a = self.op, self.args
        if op == "coord":
            out = BatchJet.variable(self.param, X[:, self.param], n, K)
        elif op == "const":
            out = BatchJet.constant(float(self.param), n, K, X.shape[0])
        elif op in ("add", "sub", "mul", "div"):
            u, v = a[0].jet(X, K, memo), a[1].jet(X, K, memo)
            if op == "div" and np.any(v.value == 0):
                raise DomainError(f"division by zero in {self}")
            out = {"add": u.__add__, "sub": u.__sub__, "mul": u.__mul__,
                   "div": u.__truediv__}[op](v)
        elif op == "neg":
            out = -a[0].jet(X, K, memo)
        elif op == "pow":
            u = a[0].jet(X, K, memo)
            out = BatchJet.constant(1.0, n, K, X.shape[0])
            for _ in range(self.param):
                out = out * u
        elif op == "h":
            u, v = a[0].jet(X, K, memo), a[1].jet(X, K, memo)
            eps = 1.0 / self.param
            out = v - u.compose(kernels.b_eps_derivs(eps, u.value, K))
        elif op == "f":
            from ..counterexample import f_partials_float

            u, v = a[0].jet(X, K, memo), a[1].jet(X, K, memo)
            _check_in_X(u.value, v.value)
            out = compose_bivariate(u, v, f_partials_float(u.value, v.value, K))
        else:
            u = a[0].jet(X, K, memo)
            out = u.compose(_unary_derivs(op, self.param, u.value, K))
        memo[key] = out
        return out


def _check_in_X(x, y):
    x, y = np.asarray(x), np.asarray(y)
    bad = ~((y > 0) | ((y == 0) & (x >= 0)))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"f is only defined on X; got ({float(np.ravel(x)[i])}, "
                          f"{float(np.ravel(y)[i])})")


def _unary_derivs(op: str, param, u, K: int) -> list:
    u = np.asarray(u, dtype=np.float64)
    if op == "exp":
        e = np.exp(u)
        return [e] * (K + 1)
    if op == "s":
        return kernels.smoothstep_derivs(u, K)
    if op == "b":
        return kernels.bridge_derivs(u, K)
    if op == "chi":
        return kernels.cutoff_derivs(u, K)
    if op == "b_eps":
        return kernels.b_eps_derivs(float(param), u, K)
    if op == "phi":
        if K > param and np.any(u == 0):
            from ..errors import NotDifferentiableError

            raise NotDifferentiableError(f"phi_{param} is only C^{param} at 0")
        return kernels._phi_float(param, u, K)
    if op == "step":
        v = (u > 0).astype(np.float64)
        return [v] + [np.zeros_like(u)] * K
    raise DomainError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# constructors


def const(v) -> Expr:
    return Expr("const", (), _frac(v))


def coord(i: int) -> Expr:
    return Expr("coord", (), int(i))


def coords(n: int) -> list:
    return [coord(i) for i in range(n)]


def exp(e: Expr) -> Expr:
    return Expr("exp", (e,))


def s(e: Expr) -> Expr:
    return Expr("s", (e,))


def b(e: Expr) -> Expr:
    return Expr("b", (e,))


def chi(e: Expr) -> Expr:
    return Expr("chi", (e,))


def b_eps(eps, e: Expr) -> Expr:
    eps = _frac(eps)
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    return Expr("b_eps", (e,), eps)


def phi(m: int, e: Expr) -> Expr:
    if m < 1:
        raise DomainError("phi_m needs m >= 1")
    return Expr("phi", (e,), int(m))


def h(m: int, ex: Expr, ey: Expr) -> Expr:
    if m < 1:
        raise DomainError("h_m needs m >= 1")
    return Expr("h", (ex, ey), int(m))


def fnode(ex: Expr, ey: Expr) -> Expr:
    """The counterexample ``f`` as an opaque symbol, defined on X only."""
    return Expr("f", (ex, ey))


def step(e: Expr) -> Expr:
    """Indicator of ``e > 0`` (discontinuous)."""
    return Expr("step", (e,))


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True)
class SymbolicMap:
    """A map ``dom -> R^n_out`` given by one expression per output.

    ``domain`` is a descriptor with ``contains``/``dim`` (``None`` means all
    of ``R^n_in``).
    """

    outputs: tuple
    n_in: int
    domain: Any = None
    name: str = ""

    def __post_init__(self):
        if not self.outputs:
            raise DomainError("a map needs at least one output")
        for e in self.outputs:
            if e.max_coord() >= self.n_in:
                raise DomainError(f"output {e} uses a coordinate beyond arity {self.n_in}")
        if self.domain is not None and getattr(self.domain, "dim", self.n_in) != self.n_in:
            raise DomainError("domain dimension does not match input arity")

    @classmethod
    def of(cls, *outputs, n_in: int = 1, domain=None, name: str = "") -> "SymbolicMap":
        outs = tuple(o if isinstance(o, Expr) else const(o) for o in outputs)
        return cls(outs, n_in, domain, name)

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    def label(self) -> str:
        return self.name or "(" + ", ".join(map(str, self.outputs)) + ")"

    def _points(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=np.float64)
        if P.ndim == 0:
            P = P.reshape(1, 1)
        elif P.ndim == 1:
            P = P.reshape(-1, 1) if self.n_in == 1 else P.reshape(1, -1)
        if P.shape[1] != self.n_in:
            raise DomainError(f"expected points with {self.n_in} coordinates")
        return P

    def value(self, P) -> np.ndarray:
        """Values as an array of shape ``(N, n_out)``."""
        X = self._points(P)
        return np.stack([e.value(X) for e in self.outputs], axis=1)

    __call__ = value

    def jets(self, P, K: int) -> list:
        X = self._points(P)
        memo: dict = {}
        return [e.jet(X, K, memo) for e in self.outputs]

    def partials(self, P, K: int) -> list:
        """Per output, ``{alpha: array of d^alpha}`` for ``|alpha| <= K``."""
        return [j.raw_partials() for j in self.jets(P, K)]

    def curve(self) -> Callable:
        """``ts -> tuple of output arrays`` for one-parameter maps."""
        if self.n_in != 1:
            raise DomainError("curve() needs a one-parameter map")

        def F(ts):
            v = self.value(np.asarray(ts, dtype=np.float64).reshape(-1, 1))
            return tuple(v[:, i] for i in range(self.n_out))

        return F

    def component(self, i: int) -> "SymbolicMap":
        return SymbolicMap((self.outputs[i],), self.n_in, self.domain, f"{self.label()}[{i}]")

    def compose(self, inner: "SymbolicMap", name: str = "") -> "SymbolicMap":
        """``self o inner`` on ``inner``'s domain."""
        if inner.n_out != self.n_in:
            raise TypeError(f"cannot compose: inner has {inner.n_out} outputs, "
                            f"outer takes {self.n_in}")
        outs = tuple(e.substitute(inner.outputs) for e in self.outputs)
        return SymbolicMap(outs, inner.n_in, inner.domain,
                           name or f"{self.label()} o {inner.label()}")

    def with_domain(self, domain, name: str | None = None) -> "SymbolicMap":
        return SymbolicMap(self.outputs, self.n_in, domain, self.name if name is None else name)

    def is_structurally_smooth(self) -> bool:
        return all(e.is_structurally_smooth() for e in self.outputs)

    def is_polynomial(self) -> bool:
        return all(e.is_polynomial() for e in self.outputs)

    def is_constant(self) -> bool:
        return all(e.max_coord() < 0 and e.is_structurally_smooth() for e in self.outputs)

    def uses(self) -> set:
        out: set = set()
        for e in self.outputs:
            out |= e.uses()
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_in": self.n_in,
            "outputs": [e.to_dict() for e in self.outputs],
            "domain": None if self.domain is None else self.domain.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SymbolicMap":
        from .descriptors import descriptor_from_dict

        dom = d.get("domain")
        return cls(tuple(Expr.from_dict(e) for e in d["outputs"]), int(d["n_in"]),
                   None if dom is None else descriptor_from_dict(dom), d.get("name", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
