"""Three-valued outcome of a membership or smoothness check.

``PROVEN`` comes from structure (e.g. the expression only uses smooth
primitives); ``PASSED`` means every sampled test agreed; ``FAILED`` carries a
witness that can be re-evaluated.  Aggregation takes the most pessimistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Iterable

import numpy as np

__all__ = ["Status", "Verdict", "combine"]


class Status(IntEnum):
    PROVEN = 0
    PASSED = 1
    FAILED = 2


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: str = ""
    samples: int = 0
    max_order: int | None = None
    tolerance: float | None = None
    witness: dict | None = None
    details: dict = field(default_factory=dict, compare=False)
    replay: Callable[[], float] | None = field(default=None, compare=False, repr=False)

    # -- constructors
    @classmethod
    def proven(cls, reason: str, **details) -> "Verdict":
        return cls(Status.PROVEN, reason, details=details)

    @classmethod
    def passed(cls, samples: int, max_order: int | None = None, tolerance: float | None = None,
               reason: str = "", **details) -> "Verdict":
        return cls(Status.PASSED, reason, samples, max_order, tolerance, details=details)

    @classmethod
    def failed(cls, point, order: int | None, residual: float, reason: str = "",
               replay: Callable[[], float] | None = None, tolerance: float | None = None,
               samples: int = 0, **extra) -> "Verdict":
        witness = {"point": _jsonable(point), "order": order, "residual": float(residual)}
        witness.update(_jsonable(extra))
        return cls(Status.FAILED, reason, samples, order, tolerance, witness, replay=replay)

    # -- queries
    @property
    def ok(self) -> bool:
        return self.status != Status.FAILED

    @property
    def is_proven(self) -> bool:
        return self.status == Status.PROVEN

    @property
    def is_failed(self) -> bool:
        return self.status == Status.FAILED

    def replay_check(self) -> bool:
        """Re-run the witness; true when the recomputed residual still exceeds tolerance."""
        if self.status != Status.FAILED or self.replay is None:
            return False
        r = float(self.replay())
        tol = self.tolerance if self.tolerance is not None else 0.0
        return bool(r > tol)

    def to_dict(self) -> dict:
        return {
            "status": self.status.name,
            "reason": self.reason,
            "samples": int(self.samples),
            "max_order": None if self.max_order is None else int(self.max_order),
            "tolerance": None if self.tolerance is None else float(self.tolerance),
            "witness": self.witness,
            "details": _jsonable(self.details),
        }

    def __str__(self):
        head = {Status.PROVEN: "Proven", Status.PASSED: "PassedSampling",
                Status.FAILED: "FailedWitness"}[self.status]
        if self.witness:
            return f"{head}({self.reason}; witness={self.witness})"
        return f"{head}({self.reason})"


def combine(verdicts: Iterable[Verdict], reason: str = "") -> Verdict:
    """AND of verdicts: the most pessimistic wins; sample counts add up."""
    vs = list(verdicts)
    if not vs:
        return Verdict.proven(reason or "vacuous")
    worst = max(vs, key=lambda v: int(v.status))
    if worst.status == Status.FAILED:
        return worst
    total = sum(v.samples for v in vs)
    orders = [v.max_order for v in vs if v.max_order is not None]
    tols = [v.tolerance for v in vs if v.tolerance is not None]
    if worst.status == Status.PROVEN:
        return Verdict.proven(reason or worst.reason)
    return Verdict.passed(total, max(orders) if orders else None,
                          max(tols) if tols else None, reason or worst.reason)
