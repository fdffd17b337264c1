"""Brute-force ground truth for the mechanisms.

Everything here enumerates indivisible assignments outright and is only meant
for small instances; an :class:`OracleBudget` guards against accidental
blow-ups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Callable, Iterator

from .core import (
    ONE,
    ZERO,
    Allocation,
    FairDivisionError,
    Instance,
    InvalidInstanceError,
    Mode,
    PreconditionError,
    UtilityProfile,
    nash_welfare_of,
    utilities,
)
from .mnwtie import Assignment, assignment_utilities


class BudgetExceededError(FairDivisionError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_assignments: int = 200_000
    grid_denominator: int = 4

    def __post_init__(self):
        if self.max_assignments <= 0 or self.grid_denominator <= 0:
            raise ValueError("oracle budget fields must be positive")


DEFAULT_BUDGET = OracleBudget()


def _choices(inst: Instance) -> list[tuple[int | None, ...]]:
    out = []
    for k in range(inst.m):
        valuers = tuple(i for i in range(inst.n) if inst.v_ind[i][k] > 0)
        out.append(valuers or (None,))
    return out


def count_wasteless(inst: Instance) -> int:
    return prod(len(c) for c in _choices(inst))


def wasteless_assignments(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET
                          ) -> Iterator[Assignment]:
    """Every assignment giving each valued good to an agent that values it,
    in lexicographic owner-vector order."""
    total = count_wasteless(inst)
    if total > budget.max_assignments:
        raise BudgetExceededError(
            f"{total} wasteless assignments exceed the budget of {budget.max_assignments}")
    return product(*_choices(inst))


def all_assignments(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET
                    ) -> Iterator[Assignment]:
    """Every way of handing each indivisible good to some agent, wasteful ones included."""
    total = inst.n ** inst.m
    if total > budget.max_assignments:
        raise BudgetExceededError(
            f"{total} assignments exceed the budget of {budget.max_assignments}")
    return product(range(inst.n), repeat=inst.m)


def _require_identical(inst: Instance) -> None:
    if inst.mode is not Mode.BINARY_IND_IDENTICAL_DIV or inst.u is None:
        raise InvalidInstanceError("needs a binary-ind-identical-div instance with u set")


def water_level(start: list[Fraction], amount: Fraction) -> Fraction:
    """Height h with sum over agents of max(h - start_i, 0) equal to ``amount``."""
    levels = sorted(start)
    total = ZERO
    for count, c in enumerate(levels, start=1):
        total += c
        h = (amount + total) / count
        if count == len(levels) or h <= levels[count]:
            return h
    raise PreconditionError("water level needs at least one agent")


def water_fill(inst: Instance, assignment: Assignment) -> Allocation:
    """Complete ``assignment`` by water-filling the identical divisible good.

    Computed from the closed-form water level rather than by simulating the
    loop, so it can serve as an independent check of :func:`mechanism1`.
    """
    _require_identical(inst)
    u = inst.u
    start = list(assignment_utilities(inst, assignment))
    h = water_level(start, u)
    fractions = [((h - c) / u,) if c < h else (ZERO,) for c in start]
    return Allocation.from_owners(assignment, fractions)


def check_water_filling_property(inst: Instance, alloc: Allocation) -> bool:
    """Positive-share agents sit on one common level and nobody else is below it."""
    _require_identical(inst)
    util = utilities(inst, alloc)
    wet = {util[i] for i, b in enumerate(alloc.bundles) if b.fractions[0] > 0}
    if len(wet) > 1:
        return False
    if not wet:
        return True
    level = wet.pop()
    return all(util[i] >= level for i, b in enumerate(alloc.bundles) if b.fractions[0] == 0)


def potential_phi(inst: Instance, alloc: Allocation) -> Fraction:
    """The water level of an allocation with the water-filling property."""
    if not check_water_filling_property(inst, alloc):
        raise PreconditionError("allocation does not satisfy the water-filling property")
    util = utilities(inst, alloc)
    for i, b in enumerate(alloc.bundles):
        if b.fractions[0] > 0:
            return util[i]
    # No divisible share anywhere, so utilities are the indivisible values.
    return min(util)


def brute_leximin_mixed(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET
                        ) -> tuple[UtilityProfile, Allocation]:
    """Leximin-best sorted profile over water-filled wasteless assignments, with a witness."""
    _require_identical(inst)
    best: UtilityProfile | None = None
    witness = None
    for owner in wasteless_assignments(inst, budget):
        alloc = water_fill(inst, owner)
        profile = tuple(sorted(utilities(inst, alloc)))
        if best is None or profile > best:
            best, witness = profile, alloc
    return best, witness


def brute_mnw_indivisible(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET
                          ) -> tuple[int, Fraction, Assignment]:
    """Lexicographically first wasteless assignment maximizing (count, product)."""
    best = None
    for owner in wasteless_assignments(inst, budget):
        score = nash_welfare_of(assignment_utilities(inst, owner))
        if best is None or score > best[:2]:
            best = (*score, owner)
    return best


def brute_leximin_indivisible(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET
                              ) -> UtilityProfile:
    """Leximin-best sorted profile over all assignments, wasteful ones included."""
    return max(tuple(sorted(assignment_utilities(inst, owner)))
               for owner in all_assignments(inst, budget))


def grid_allocations(inst: Instance, assignment: Assignment, denominator: int
                     ) -> Iterator[Allocation]:
    """Every split of the single divisible good into multiples of ``1/denominator``."""
    if inst.m_bar != 1:
        raise PreconditionError("grid splits are defined for one divisible good")

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first, *rest)

    for counts in compositions(denominator, inst.n):
        yield Allocation.from_owners(
            assignment, [(Fraction(c, denominator),) for c in counts])


def mnw_single_binary_divisible(
        inst: Instance,
        keep: Callable[[Assignment], bool] | None = None,
        budget: OracleBudget = DEFAULT_BUDGET,
) -> tuple[int, Fraction, Allocation] | None:
    """Exact MNW over allocations with one divisible good valued 0 or 1 by each agent.

    For a fixed assignment the Nash-optimal split of a good worth the same to
    everyone who values it is the water-filling over those agents, so only
    the indivisible assignments need enumerating. ``keep`` filters assignments.
    Returns ``None`` when ``keep`` rejects everything.
    """
    if inst.m_bar != 1 or any(row[0] not in (ZERO, ONE) for row in inst.v_div):
        raise PreconditionError("needs exactly one divisible good with binary values")
    takers = [i for i in range(inst.n) if inst.v_div[i][0] == 1]
    best = None
    for owner in wasteless_assignments(inst, budget):
        if keep is not None and not keep(owner):
            continue
        start = assignment_utilities(inst, owner)
        fractions = [[ZERO] for _ in range(inst.n)]
        disposed = ()
        if takers:
            h = water_level([start[i] for i in takers], ONE)
            for i in takers:
                if start[i] < h:
                    fractions[i][0] = h - start[i]
        else:
            disposed = (0,)
        alloc = Allocation.from_owners(owner, fractions, disposed_div=disposed)
        score = nash_welfare_of(utilities(inst, alloc))
        if best is None or score > best[:2]:
            best = (*score, alloc)
    return best
