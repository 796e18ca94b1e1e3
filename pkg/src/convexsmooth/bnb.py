"""Interval branch-and-bound for certified suprema of ``|g|`` on a box.

Boxes are processed a generation at a time: every live box is evaluated in
one batched interval call, so the Python overhead is per generation rather
than per box.  Several outputs (typically all derivative orders of one
function) share the same tree; a box stays alive while any output still has
a gap above tolerance on it.

Results merge by max-reduction only, so the outcome does not depend on the
order in which boxes are visited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError
from .interval import Interval

__all__ = ["Box", "SupBoundCertificate", "branch_and_bound_sup"]

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, one ``(lo, hi)`` pair per axis."""

    bounds: tuple

    def __post_init__(self):
        if not self.bounds:
            raise DomainError("box needs at least one axis")
        for lo, hi in self.bounds:
            if not lo <= hi:
                raise DomainError(f"empty axis [{lo}, {hi}]")

    @classmethod
    def of(cls, *axes) -> "Box":
        return cls(tuple((float(a), float(b)) for a, b in axes))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def to_list(self):
        return [list(b) for b in self.bounds]


@dataclass(frozen=True)
class SupBoundCertificate:
    """Certified ``sup |g|`` over ``box``: ``lower <= sup <= bound``."""

    function: str
    order: int
    bound: float
    lower: float
    method: str
    tolerance: float
    subdivisions: int
    box: Box | None = None
    params: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.bound - self.lower

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "order": self.order,
            "bound": self.bound,
            "lower": self.lower,
            "method": self.method,
            "tolerance": self.tolerance,
            "subdivisions": self.subdivisions,
            "box": None if self.box is None else self.box.to_list(),
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SupBoundCertificate":
        box = None if d.get("box") is None else Box(tuple(tuple(b) for b in d["box"]))
        return cls(d["function"], d["order"], d["bound"], d["lower"], d["method"],
                   d["tolerance"], d["subdivisions"], box, d.get("params", {}))


BatchFn = Callable[[Sequence[Interval]], Sequence[Interval]]


def branch_and_bound_sup(
    fn: BatchFn,
    box: Box,
    n_outputs: int,
    tol: float = 1e-3,
    rtol: float = 0.0,
    budget: int = DEFAULT_BUDGET,
    max_generations: int = 200,
):
    """Certified upper bounds on ``sup_box |fn_j|`` for ``j < n_outputs``.

    ``fn`` receives one batched :class:`Interval` per axis and returns one
    batched enclosure per output.  Returns ``(upper, lower, boxes_evaluated)``
    with ``upper[j] - lower[j] <= max(tol, rtol * lower[j])``.  ``lower`` is a
    rigorous lower bound of the supremum (taken from point evaluations).
    """
    d = box.dim
    lo = np.array([[b[0]] for b in box.bounds], dtype=np.float64)
    hi = np.array([[b[1]] for b in box.bounds], dtype=np.float64)
    lower = np.zeros(n_outputs)
    retired = np.full(n_outputs, -np.inf)
    evaluated = 0

    def allowed(low):
        return np.maximum(tol, rtol * low)

    for _ in range(max_generations):
        n = lo.shape[1]
        evaluated += n
        if evaluated > budget:
            ub = np.maximum(lower, retired)
            raise BudgetExceededError(
                f"branch-and-bound exceeded budget of {budget} boxes", best=ub)
        encl = fn([Interval(lo[i], hi[i]) for i in range(d)])
        mids = 0.5 * lo + 0.5 * hi
        pts = fn([Interval(mids[i], mids[i]) for i in range(d)])
        ubs = np.stack([np.atleast_1d(np.asarray(e.mag(), dtype=np.float64)) * np.ones(n)
                        for e in encl])
        lbs = np.stack([np.atleast_1d(np.asarray(p.mig(), dtype=np.float64)) * np.ones(n)
                        for p in pts])
        lower = np.maximum(lower, lbs.max(axis=1))
        slack = allowed(lower)[:, None]
        open_mask = ubs > lower[:, None] + slack
        alive = open_mask.any(axis=0)
        # retire outputs on boxes that no longer need work for them
        done_vals = np.where(open_mask, -np.inf, ubs)
        retired = np.maximum(retired, done_vals.max(axis=1))
        if not alive.any():
            break
        lo, hi = lo[:, alive], hi[:, alive]
        # split along the widest axis
        widths = hi - lo
        axis = np.argmax(widths, axis=0)
        cols = np.arange(lo.shape[1])
        cut = 0.5 * lo[axis, cols] + 0.5 * hi[axis, cols]
        lo_a, hi_a = lo.copy(), hi.copy()
        hi_a[axis, cols] = cut
        lo_b, hi_b = lo.copy(), hi.copy()
        lo_b[axis, cols] = cut
        lo = np.concatenate([lo_a, lo_b], axis=1)
        hi = np.concatenate([hi_a, hi_b], axis=1)
        if np.any(widths.max(axis=0) == 0):
            raise BudgetExceededError("boxes collapsed to points without convergence",
                                      best=np.maximum(lower, ubs.max(axis=1)))
    else:
        raise BudgetExceededError("generation limit reached", best=np.maximum(lower, retired))
    upper = np.maximum(retired, lower)
    return upper, lower, evaluated
