"""Reports, the expected-outcome manifest and CSV/JSON writers."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"

__all__ = [
    "CheckResult",
    "Report",
    "SCHEMA_VERSION",
    "dumps",
    "expected_outcomes",
    "fmt",
    "write_csv",
    "write_json",
]


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, non-finite floats as strings."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def fmt(v) -> str:
    """Full-precision decimal text for a CSV cell (``repr`` round-trips doubles exactly)."""
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def expected_outcomes() -> dict:
    """``{check name: "pass" | "fail"}`` shipped with the package."""
    text = resources.files("convexsmooth").joinpath("expected_outcomes.json").read_text()
    return json.loads(text)["checks"]


@dataclass
class CheckResult:
    """One named check; ``passed`` is the raw outcome, ``expected`` what the manifest says."""

    name: str
    passed: bool
    expected: str = "pass"
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def as_expected(self) -> bool:
        return self.passed == (self.expected == "pass")

    @property
    def outcome(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {"name": self.name, "outcome": self.outcome, "expected": self.expected,
                "as_expected": self.as_expected, "details": self.details}


@dataclass
class Report:
    suite: str
    config_hash: str
    config: dict
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.as_expected for c in self.checks)

    def timings(self) -> dict:
        return {"suite": self.suite, "config_hash": self.config_hash,
                "seconds": {c.name: round(c.seconds, 3) for c in self.checks}}

    def to_dict(self) -> dict:
        # timings live in a separate file so the report itself is reproducible byte for byte
        return {"schema": SCHEMA_VERSION, "suite": self.suite, "config_hash": self.config_hash,
                "config": self.config, "ok": self.ok,
                "checks": [c.to_dict() for c in self.checks]}

    def summary_lines(self) -> list:
        out = []
        for c in self.checks:
            mark = "ok  " if c.as_expected else "FAIL"
            out.append(f"{mark} {c.name}: {c.outcome} (expected {c.expected}, {c.seconds:.2f}s)")
        return out
