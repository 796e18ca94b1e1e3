"""Symbolic maps, convex-set descriptors and decidable-approximation structure handles."""

from .descriptors import (ConvexDescriptor, OpenSetDesc, PRESETS, halfspace, locally_closed_at,
                          open_interval, orthant, real_space, region_X, square_pyramid,
                          unit_interval)
from .handles import (Ch, ChenHandle, Di, DiffeologyHandle, E, ProbeFamily, SikorskiHandle,
                      nonstandard_interval, standard_chen, standard_diffeology,
                      subspace_structure)
from .laws import reflexivity_report
from .smoothness import (bump_build, func_membership_subspace, is_classically_smooth,
                         kriegl_check, map_smoothness, nonstandard_interval_obstruction,
                         plot_membership_subset)
from .symbolic import Expr, SymbolicMap

__all__ = [
    "Ch", "ChenHandle", "ConvexDescriptor", "Di", "DiffeologyHandle", "E", "Expr",
    "OpenSetDesc", "PRESETS", "ProbeFamily", "SikorskiHandle", "SymbolicMap", "bump_build",
    "func_membership_subspace", "halfspace", "is_classically_smooth", "kriegl_check",
    "locally_closed_at", "map_smoothness", "nonstandard_interval", "nonstandard_interval_obstruction",
    "open_interval", "orthant", "plot_membership_subset", "real_space", "reflexivity_report",
    "region_X", "square_pyramid", "standard_chen", "standard_diffeology", "subspace_structure",
    "unit_interval",
]
