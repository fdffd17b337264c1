"""Truthful envy-free-for-mixed-goods mechanisms with exact arithmetic and brute-force audits."""

from .core import (
    Allocation,
    Bundle,
    FairDivisionError,
    Instance,
    Mode,
    is_ef,
    is_ef1,
    is_efm_pos,
    is_efm_zero,
    leximin_compare,
    lorenz_dominates,
    nash_welfare,
    value_of,
)
from .mechanisms import mechanism1, mechanism2, mechanism3, mechanism3_naive_multi
from .mnwtie import leximin_profile, mnw_tie_allocate

__all__ = [
    "Allocation", "Bundle", "FairDivisionError", "Instance", "Mode",
    "is_ef", "is_ef1", "is_efm_pos", "is_efm_zero", "leximin_compare", "lorenz_dominates",
    "nash_welfare", "value_of", "mechanism1", "mechanism2", "mechanism3",
    "mechanism3_naive_multi", "leximin_profile", "mnw_tie_allocate",
]
