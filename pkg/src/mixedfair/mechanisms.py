"""The three EFM mechanisms built on top of MNW^tie.

* :func:`mechanism1` - binary indivisible goods plus one divisible good that
  every agent values at the same ``u``; water-fills the divisible good.
* :func:`mechanism2` - two agents, binary values on everything.
* :func:`mechanism3` - any number of agents, binary values, one divisible good.

Each returns the allocation together with a trace of its internal choices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    ONE,
    ZERO,
    Allocation,
    Instance,
    Mode,
    ModeError,
)
from .mnwtie import assignment_utilities, mnw_tie_allocate


class Unbounded(enum.Enum):
    """Marks the gap to the next water level when every agent is already at the minimum."""

    INFINITE = "infinite"

    def __repr__(self) -> str:
        return "Unbounded.INFINITE"


@dataclass(frozen=True)
class WaterFillStep:
    t1: frozenset[int]
    t2: frozenset[int]
    delta: Fraction | Unbounded
    y: Fraction
    increment: Fraction


@dataclass(frozen=True)
class WaterFillTrace:
    iterations: tuple[WaterFillStep, ...]


@dataclass(frozen=True)
class TwoAgentTrace:
    i_star: int | None
    k_bar_star: int | None


@dataclass(frozen=True)
class MinSetTrace:
    t: frozenset[int]


def _require(inst: Instance, mode: Mode, what: str) -> None:
    if inst.mode is not mode:
        raise ModeError(f"{what} needs a {mode.value} instance, got {inst.mode.value}")


def water_fill_loop(start: Sequence[Fraction], u: Fraction
                    ) -> tuple[tuple[Fraction, ...], WaterFillTrace]:
    """Pour one unit of a divisible good worth ``u`` to everyone onto the lowest levels.

    ``start`` holds each agent's utility before any divisible share. Returns
    the per-agent fractions and one trace step per loop iteration.
    """
    n = len(start)
    x = [ZERO] * n
    steps = []
    while (y := ONE - sum(x)) > 0:
        level = [start[i] + u * x[i] for i in range(n)]
        low = min(level)
        t1 = frozenset(i for i in range(n) if level[i] == low)
        if len(t1) < n:
            second = min(level[i] for i in range(n) if i not in t1)
            t2 = frozenset(i for i in range(n) if level[i] == second)
            delta: Fraction | Unbounded = second - low
            increment = min(delta / u, y / len(t1))
        else:
            t2 = frozenset()
            delta = Unbounded.INFINITE
            increment = y / len(t1)
        for i in t1:
            x[i] += increment
        steps.append(WaterFillStep(t1, t2, delta, y, increment))
    return tuple(x), WaterFillTrace(tuple(steps))


def mechanism1(inst: Instance) -> tuple[Allocation, WaterFillTrace]:
    """MNW^tie on the indivisible goods, then water-filling of the identical divisible good."""
    _require(inst, Mode.BINARY_IND_IDENTICAL_DIV, "mechanism 1")
    owner = mnw_tie_allocate(inst)
    fractions, trace = water_fill_loop(assignment_utilities(inst, owner), inst.u)
    alloc = Allocation.from_owners(owner, [(x,) for x in fractions])
    return alloc, trace


def mechanism2(inst: Instance) -> tuple[Allocation, TwoAgentTrace]:
    """Two-agent mechanism: compensate the poorer agent with one valued divisible good,
    then split each remaining divisible good among the agents that value it."""
    _require(inst, Mode.BINARY_ALL, "mechanism 2")
    if inst.n != 2:
        raise ModeError(f"mechanism 2 is defined for exactly 2 agents, got {inst.n}")
    owner = mnw_tie_allocate(inst)
    ind = assignment_utilities(inst, owner)
    x = [[ZERO] * inst.m_bar for _ in range(2)]

    i_star = k_star = None
    if ind[0] != ind[1]:
        i_star = 0 if ind[0] < ind[1] else 1
        # Lowest index among the divisible goods i* values.
        k_star = next((k for k in range(inst.m_bar) if inst.v_div[i_star][k] == 1), None)
        if k_star is not None:
            x[i_star][k_star] = ONE

    half = Fraction(1, 2)
    disposed = set()
    for k in range(inst.m_bar):
        if k == k_star:
            continue
        first, second = inst.v_div[0][k] == 1, inst.v_div[1][k] == 1
        if first and second:
            x[0][k] = x[1][k] = half
        elif first:
            x[0][k] = ONE
        elif second:
            x[1][k] = ONE
        else:
            disposed.add(k)
    alloc = Allocation.from_owners(owner, x, disposed_div=disposed)
    return alloc, TwoAgentTrace(i_star, k_star)


def _min_set(inst: Instance, owner) -> frozenset[int]:
    ind = assignment_utilities(inst, owner)
    low = min(ind)
    return frozenset(i for i in range(inst.n) if ind[i] == low)


def _split_over(inst: Instance, owner, t: frozenset[int]) -> Allocation:
    share = Fraction(1, len(t))
    worthless = inst.valued_by_nobody_div()
    x = [[ZERO if (i not in t or k in worthless) else share for k in range(inst.m_bar)]
         for i in range(inst.n)]
    return Allocation.from_owners(owner, x, disposed_div=worthless)


def mechanism3(inst: Instance) -> tuple[Allocation, MinSetTrace]:
    """Single binary divisible good, split evenly among agents with the least indivisible value.

    Members of that set get their share even if they value the divisible good
    at zero. A divisible good nobody values is disposed, which leaves plain
    MNW^tie.
    """
    _require(inst, Mode.BINARY_ALL, "mechanism 3")
    if inst.m_bar != 1:
        raise ModeError(f"mechanism 3 needs exactly one divisible good, got {inst.m_bar}")
    owner = mnw_tie_allocate(inst)
    t = _min_set(inst, owner)
    return _split_over(inst, owner, t), MinSetTrace(t)


def mechanism3_naive_multi(inst: Instance) -> Allocation:
    """Mechanism 3 applied blindly to every divisible good; carries no fairness guarantee."""
    _require(inst, Mode.BINARY_ALL, "mechanism 3 (multi)")
    owner = mnw_tie_allocate(inst)
    return _split_over(inst, owner, _min_set(inst, owner))
