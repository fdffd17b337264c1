"""Leximin / maximum-Nash-welfare allocation of binary indivisible goods.

With binary valuations the achievable utility vectors of wasteless
assignments are the integer points of a polymatroid, so the leximin profile
can be reached greedily: keep raising the currently poorest agent by one
good while a bipartite b-matching certifies the raised vector is feasible.

Ties between leximin-optimal assignments are broken by choosing the
lexicographically smallest owner vector (good 0 first, lower agent index
preferred).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .core import (
    Allocation,
    Instance,
    InvalidInstanceError,
    UtilityProfile,
)

Assignment = tuple[int | None, ...]
"""Owner of each indivisible good; ``None`` marks a disposed good."""

_Valuers = tuple[tuple[int, ...], ...]


def _valuers(inst: Instance) -> _Valuers:
    if not inst.ind_is_binary():
        raise InvalidInstanceError("MNW^tie needs binary values on indivisible goods")
    return tuple(
        tuple(i for i in range(inst.n) if inst.v_ind[i][k] == 1) for k in range(inst.m))


def _can_meet(goods: Sequence[tuple[int, ...]], demand: Sequence[int]) -> bool:
    """Can every agent i be matched to ``demand[i]`` distinct goods it values?"""
    need = sum(demand)
    if need == 0:
        return True
    if need > len(goods):
        return False
    n = len(demand)
    agent_goods: list[list[int]] = [[] for _ in range(n)]
    for g, valuers in enumerate(goods):
        for i in valuers:
            agent_goods[i].append(g)
    holder: list[int | None] = [None] * len(goods)

    def augment(i: int, seen: set[int]) -> bool:
        for g in agent_goods[i]:
            if g in seen:
                continue
            seen.add(g)
            if holder[g] is None or augment(holder[g], seen):
                holder[g] = i
                return True
        return False

    for i in range(n):
        for _ in range(demand[i]):
            if not augment(i, set()):
                return False
    return True


def _greedy_leximin(goods: Sequence[tuple[int, ...]], base: Sequence[int]) -> tuple[int, ...]:
    """Leximin-optimal utilities when agent i already holds ``base[i]`` goods."""
    levels = list(base)
    active = [True] * len(base)
    while any(active):
        i = min((j for j in range(len(base)) if active[j]), key=lambda j: levels[j])
        levels[i] += 1
        demand = [max(t - b, 0) for t, b in zip(levels, base)]
        if not _can_meet(goods, demand):
            levels[i] -= 1
            active[i] = False
    return tuple(levels)


@lru_cache(maxsize=1 << 16)
def _solve(valuers: _Valuers, n: int) -> tuple[tuple[int, ...], Assignment]:
    live = [vs for vs in valuers if vs]
    target = sorted(_greedy_leximin(live, [0] * n))

    base = [0] * n
    owner: list[int | None] = []
    for k, vs in enumerate(valuers):
        if not vs:
            owner.append(None)
            continue
        rest = [w for w in valuers[k + 1:] if w]
        for i in vs:
            base[i] += 1
            if sorted(_greedy_leximin(rest, base)) == target:
                owner.append(i)
                break
            base[i] -= 1
        else:  # pragma: no cover - an optimal completion always exists
            raise AssertionError("no leximin-optimal completion found")
    return tuple(target), tuple(owner)


def leximin_profile(inst: Instance) -> UtilityProfile:
    """Ascending leximin-optimal utility profile of the indivisible part of ``inst``."""
    target, _ = _solve(_valuers(inst), inst.n)
    return tuple(Fraction(t) for t in target)


def mnw_tie_allocate(inst: Instance) -> Assignment:
    """Deterministic MNW/leximin owner vector with free disposal of worthless goods.

    Only the indivisible part of ``inst`` is read. Every good valued by some
    agent goes to an agent that values it; goods nobody values come back as
    ``None``.
    """
    _, owner = _solve(_valuers(inst), inst.n)
    return owner


def mnw_tie_no_disposal(inst: Instance) -> Assignment:
    """Variant without free disposal: worthless goods are handed to agent 0.

    Kept only to reproduce the manipulation that free disposal rules out.
    """
    return tuple(0 if o is None else o for o in mnw_tie_allocate(inst))


def assignment_to_allocation(inst: Instance, owner: Assignment) -> Allocation:
    """Wrap an owner vector as an allocation of ``inst.indivisible_projection()``."""
    return Allocation.from_owners(owner, [()] * inst.n)


def assignment_utilities(inst: Instance, owner: Assignment) -> tuple[Fraction, ...]:
    totals = [Fraction(0)] * inst.n
    for k, i in enumerate(owner):
        if i is not None:
            totals[i] += inst.v_ind[i][k]
    return tuple(totals)
