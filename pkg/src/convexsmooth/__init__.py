"""Certified numerics for a smooth function on a non-locally-closed convex set."""

from .bounds import CmTable, build_cm_table, c_bound, default_table, load_or_build_cm_table
from .counterexample import (f_eval, f_partial, plot_composition_check, verify_blowup,
                             verify_ck_bounded)
from .errors import (BudgetExceededError, CapabilityError, ConvexSmoothError, DomainError,
                     NotDifferentiableError, PreconditionError, WitnessInvalidError)
from .interval import Interval
from .kernels import DEFAULT_KERNELS, KernelConfig
from .verdict import Status, Verdict

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "CapabilityError", "CmTable", "ConvexSmoothError", "DEFAULT_KERNELS",
    "DomainError", "Interval", "KernelConfig", "NotDifferentiableError", "PreconditionError",
    "Status", "Verdict", "WitnessInvalidError", "build_cm_table", "c_bound", "default_table",
    "f_eval", "f_partial", "load_or_build_cm_table", "plot_composition_check", "verify_blowup",
    "verify_ck_bounded",
]
