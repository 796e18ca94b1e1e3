"""Run configuration shared by the command-line tools."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .bounds import (DEFAULT_SETTINGS, BoundSettings, CmTable, config_hash, install_default_table,
                     load_or_build_cm_table)
from .errors import DomainError
from .kernels import DEFAULT_KERNELS, KernelConfig
from .structures.handles import ProbeFamily

__all__ = ["RunConfig", "load_config"]

CACHE_ENV = "CONVEXSMOOTH_CM_CACHE"


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines the numbers a run produces.

    ``cm_cache`` and ``out`` say where things are stored, not what is
    computed, so they are left out of :meth:`hash`.
    """

    kernels: KernelConfig = DEFAULT_KERNELS
    bounds: BoundSettings = DEFAULT_SETTINGS
    cm_cache: str | None = None
    tol: float = 1e-8
    fd_tol: float = 1e-4
    structure_order: int = 3
    ck_samples: int = 1000
    n_boundary: int = 200
    oracle_samples: int = 100_000
    eval_points: int = 100
    probes: ProbeFamily = field(default_factory=ProbeFamily)
    seed: int = 0
    out: str = "out"

    def hashed_fields(self) -> dict:
        d = self.to_dict()
        d.pop("cm_cache")
        d.pop("out")
        return d

    def hash(self) -> str:
        return config_hash(self.hashed_fields())

    def __hash__(self):
        return hash(self.hash())

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("kernels", "bounds", "probes")}
        d["kernels"] = self.kernels.to_dict()
        d["bounds"] = self.bounds.to_dict()
        d["probes"] = self.probes.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown configuration keys: {sorted(extra)}")
        kw = dict(d)
        if "kernels" in kw:
            kw["kernels"] = KernelConfig.from_dict(kw["kernels"])
        if "bounds" in kw:
            b = kw["bounds"]
            kw["bounds"] = BoundSettings(float(b["tol"]), float(b["rtol"]), int(b["budget"]))
        if "probes" in kw:
            kw["probes"] = ProbeFamily.from_dict(kw["probes"])
        return cls(**kw)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def cache_path(self) -> Path:
        if self.cm_cache:
            return Path(self.cm_cache)
        if os.environ.get(CACHE_ENV):
            return Path(os.environ[CACHE_ENV])
        return Path(self.out) / "cm_table.json"

    def table(self) -> CmTable:
        """Load the c_m table (building and caching it when missing) and make it the default."""
        table = load_or_build_cm_table(self.cache_path(), self.kernels.max_order, self.kernels,
                                       self.bounds)
        install_default_table(table)
        return table


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a JSON configuration file (keys as in :meth:`RunConfig.to_dict`)."""
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read configuration {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError("configuration must be a JSON object")
    return RunConfig.from_dict(data)
