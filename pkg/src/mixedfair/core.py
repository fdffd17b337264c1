"""Data model and fairness predicates for mixed divisible/indivisible goods.

All quantities are :class:`fractions.Fraction`; nothing in here ever touches a
float. Agents and goods are 0-based internally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from math import prod
from typing import Iterable, Sequence

Rational = Fraction
UtilityProfile = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class FairDivisionError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstanceError(FairDivisionError, ValueError):
    pass


class InvalidAllocationError(FairDivisionError, ValueError):
    pass


class IndexOutOfRangeError(FairDivisionError, IndexError):
    pass


class ModeError(FairDivisionError):
    """A mechanism was handed an instance outside its declared mode."""


class PreconditionError(FairDivisionError, ValueError):
    pass


class Mode(str, enum.Enum):
    BINARY_ALL = "binary-all"
    BINARY_IND_IDENTICAL_DIV = "binary-ind-identical-div"
    GENERAL_TWO_BY_TWO = "general-2x2"


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass an int, Fraction or 'p/q' string")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _matrix(rows: Iterable[Iterable]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(as_rational(x) for x in row) for row in rows)


def _row_key(row: tuple[Fraction, ...]) -> tuple[tuple[int, int], ...]:
    return tuple(x.as_integer_ratio() for x in row)


_BINARY = frozenset((ZERO, ONE))


@dataclass(frozen=True, eq=False)
class Instance:
    """A valuation profile together with its declared mode.

    ``v_ind[i][k]`` is agent i's value for indivisible good k and
    ``v_div[i][k]`` its value for the whole of divisible good k.
    """

    v_ind: tuple[tuple[Fraction, ...], ...]
    v_div: tuple[tuple[Fraction, ...], ...]
    mode: Mode = Mode.BINARY_ALL
    u: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "v_ind", _matrix(self.v_ind))
        object.__setattr__(self, "v_div", _matrix(self.v_div))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.u is not None:
            object.__setattr__(self, "u", as_rational(self.u))
        self._validate()
        object.__setattr__(self, "_key", (
            self.mode, None if self.u is None else self.u.as_integer_ratio(),
            tuple(map(_row_key, self.v_ind)), tuple(map(_row_key, self.v_div))))

    # Audits hash thousands of profiles; integer keys are far cheaper than Fractions.
    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @property
    def n(self) -> int:
        return len(self.v_ind)

    @property
    def m(self) -> int:
        return len(self.v_ind[0]) if self.v_ind else 0

    @property
    def m_bar(self) -> int:
        return len(self.v_div[0]) if self.v_div else 0

    def _validate(self) -> None:
        n = len(self.v_ind)
        if n < 1:
            raise InvalidInstanceError("an instance needs at least one agent")
        if len(self.v_div) != n:
            raise InvalidInstanceError(
                f"v_ind has {n} rows but v_div has {len(self.v_div)}")
        for name, mat in (("v_ind", self.v_ind), ("v_div", self.v_div)):
            widths = {len(row) for row in mat}
            if len(widths) > 1:
                raise InvalidInstanceError(f"{name} rows have unequal lengths {sorted(widths)}")
            if any(x < 0 for row in mat for x in row):
                raise InvalidInstanceError(f"{name} contains a negative value")

        binary = {ZERO, ONE}
        ind_binary = all(x in binary for row in self.v_ind for x in row)
        if self.mode is Mode.BINARY_ALL:
            if not ind_binary or not all(x in binary for row in self.v_div for x in row):
                raise InvalidInstanceError("binary-all requires every value in {0, 1}")
            if self.u is not None:
                raise InvalidInstanceError("binary-all takes no identical divisible value u")
        elif self.mode is Mode.BINARY_IND_IDENTICAL_DIV:
            if not ind_binary:
                raise InvalidInstanceError("indivisible values must be binary")
            if self.u is None or self.u <= 0:
                raise InvalidInstanceError("identical divisible value u must be given and > 0")
            if self.m_bar != 1 or any(row != (self.u,) for row in self.v_div):
                raise InvalidInstanceError(
                    "binary-ind-identical-div requires exactly one divisible good valued u by all")
        elif self.mode is Mode.GENERAL_TWO_BY_TWO:
            if n != 2 or self.m != 1 or self.m_bar != 1:
                raise InvalidInstanceError("general-2x2 requires 2 agents, 1 + 1 goods")
            if any(row != (ONE,) for row in self.v_ind):
                raise InvalidInstanceError("general-2x2 requires both agents to value the good 1")
            a, b = self.v_div[0][0], self.v_div[1][0]
            if not b > a > 1:
                raise InvalidInstanceError(f"general-2x2 requires b > a > 1, got a={a}, b={b}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def binary_all(cls, v_ind: Sequence[Sequence], v_div: Sequence[Sequence] | None = None,
                   ) -> Instance:
        if v_div is None:
            v_div = [()] * len(v_ind)
        return cls(v_ind, v_div, Mode.BINARY_ALL)

    @classmethod
    def identical_divisible(cls, v_ind: Sequence[Sequence], u) -> Instance:
        u = as_rational(u)
        return cls(v_ind, [(u,)] * len(v_ind), Mode.BINARY_IND_IDENTICAL_DIV, u)

    @classmethod
    def general_two_by_two(cls, a, b) -> Instance:
        return cls([(1,), (1,)], [(a,), (b,)], Mode.GENERAL_TWO_BY_TWO)

    def with_report(self, agent: int, ind_row: Sequence | None = None,
                    div_row: Sequence | None = None) -> Instance:
        """Return the profile in which ``agent`` reports the given rows instead."""
        self._check_agent(agent)
        v_ind = list(self.v_ind)
        v_div = list(self.v_div)
        if ind_row is not None:
            v_ind[agent] = tuple(map(as_rational, ind_row))
        if div_row is not None:
            v_div[agent] = tuple(map(as_rational, div_row))
        if self.mode is Mode.GENERAL_TWO_BY_TWO:
            return Instance(v_ind, v_div, self.mode, self.u)

        # Only the replaced rows can break the binary-mode invariants.
        if len(v_ind[agent]) != self.m or len(v_div[agent]) != self.m_bar:
            raise InvalidInstanceError("reported rows must keep the instance's shape")
        if not _BINARY.issuperset(v_ind[agent]):
            raise InvalidInstanceError("indivisible values must be binary")
        if self.mode is Mode.BINARY_ALL:
            if not _BINARY.issuperset(v_div[agent]):
                raise InvalidInstanceError("binary-all requires every value in {0, 1}")
        elif v_div[agent] != (self.u,):
            raise InvalidInstanceError(
                "binary-ind-identical-div requires exactly one divisible good valued u by all")
        _, ukey, ind_keys, div_keys = self._key
        ind_keys, div_keys = list(ind_keys), list(div_keys)
        ind_keys[agent] = _row_key(v_ind[agent])
        div_keys[agent] = _row_key(v_div[agent])
        new = object.__new__(Instance)
        for name, value in (("v_ind", tuple(v_ind)), ("v_div", tuple(v_div)), ("mode", self.mode),
                            ("u", self.u), ("_key", (self.mode, ukey, tuple(ind_keys),
                                                     tuple(div_keys)))):
            object.__setattr__(new, name, value)
        return new

    def indivisible_projection(self) -> Instance:
        """The same agents and indivisible goods with every divisible good dropped."""
        if not self.ind_is_binary():
            raise PreconditionError("only binary indivisible parts have a binary-all projection")
        return Instance(self.v_ind, [()] * self.n, Mode.BINARY_ALL)

    def ind_is_binary(self) -> bool:
        return all(x in (ZERO, ONE) for row in self.v_ind for x in row)

    def _check_agent(self, agent: int) -> None:
        if not 0 <= agent < self.n:
            raise IndexOutOfRangeError(f"agent index {agent} out of range for {self.n} agents")

    def valued_by_nobody_ind(self) -> frozenset[int]:
        return frozenset(k for k in range(self.m) if all(row[k] == 0 for row in self.v_ind))

    def valued_by_nobody_div(self) -> frozenset[int]:
        return frozenset(k for k in range(self.m_bar) if all(row[k] == 0 for row in self.v_div))


@dataclass(frozen=True)
class Bundle:
    goods: frozenset[int] = frozenset()
    fractions: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "goods", frozenset(self.goods))
        object.__setattr__(self, "fractions", tuple(as_rational(x) for x in self.fractions))

    @property
    def has_divisible(self) -> bool:
        return any(x != 0 for x in self.fractions)


@dataclass(frozen=True)
class Allocation:
    bundles: tuple[Bundle, ...]
    disposed_ind: frozenset[int] = field(default_factory=frozenset)
    disposed_div: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(
            b if isinstance(b, Bundle) else Bundle(*b) for b in self.bundles))
        object.__setattr__(self, "disposed_ind", frozenset(self.disposed_ind))
        object.__setattr__(self, "disposed_div", frozenset(self.disposed_div))

    @classmethod
    def from_owners(cls, owners: Sequence[int | None], fractions: Sequence[Sequence],
                    disposed_div: Iterable[int] = ()) -> Allocation:
        """Build an allocation from an owner vector (``None`` = disposed)."""
        n = len(fractions)
        goods: list[set[int]] = [set() for _ in range(n)]
        disposed = set()
        for k, owner in enumerate(owners):
            if owner is None:
                disposed.add(k)
            else:
                goods[owner].add(k)
        return cls(tuple(Bundle(frozenset(g), tuple(x)) for g, x in zip(goods, fractions)),
                   frozenset(disposed), frozenset(disposed_div))

    def indivisible_projection(self) -> Allocation:
        return Allocation(tuple(Bundle(b.goods, ()) for b in self.bundles), self.disposed_ind)

    def owners(self, m: int) -> tuple[int | None, ...]:
        owner: list[int | None] = [None] * m
        for i, b in enumerate(self.bundles):
            for k in b.goods:
                owner[k] = i
        return tuple(owner)

    def validate(self, inst: Instance) -> None:
        if len(self.bundles) != inst.n:
            raise InvalidAllocationError(
                f"allocation has {len(self.bundles)} bundles for {inst.n} agents")
        seen: set[int] = set()
        for i, b in enumerate(self.bundles):
            if len(b.fractions) != inst.m_bar:
                raise InvalidAllocationError(
                    f"agent {i + 1}: {len(b.fractions)} fractions for {inst.m_bar} divisible goods")
            if any(not 0 <= x <= 1 for x in b.fractions):
                raise InvalidAllocationError(f"agent {i + 1}: fraction outside [0, 1]")
            if seen & b.goods:
                raise InvalidAllocationError(f"good(s) {sorted(seen & b.goods)} allocated twice")
            seen |= b.goods
        if seen & self.disposed_ind:
            raise InvalidAllocationError("a good is both allocated and disposed")
        seen |= self.disposed_ind
        if seen != set(range(inst.m)):
            raise InvalidAllocationError("bundles and disposed goods do not partition the goods")
        if not self.disposed_ind <= inst.valued_by_nobody_ind():
            raise InvalidAllocationError("disposed an indivisible good that some agent values")
        if not self.disposed_div <= set(range(inst.m_bar)):
            raise InvalidAllocationError("disposed divisible index out of range")
        if not self.disposed_div <= inst.valued_by_nobody_div():
            raise InvalidAllocationError("disposed a divisible good that some agent values")
        for k in range(inst.m_bar):
            total = sum((b.fractions[k] for b in self.bundles), ZERO)
            expected = ZERO if k in self.disposed_div else ONE
            if total != expected:
                raise InvalidAllocationError(
                    f"divisible good {k} shares sum to {total}, expected {expected}")


def value_of(inst: Instance, agent: int, bundle: Bundle) -> Fraction:
    """Additive value of ``bundle`` to ``agent``."""
    inst._check_agent(agent)
    if len(bundle.fractions) != inst.m_bar:
        raise IndexOutOfRangeError(
            f"fraction vector of length {len(bundle.fractions)}, expected {inst.m_bar}")
    row = inst.v_ind[agent]
    try:
        ind = sum((row[k] for k in bundle.goods), ZERO)
    except IndexError:
        raise IndexOutOfRangeError(f"good index out of range in {sorted(bundle.goods)}") from None
    return ind + divisible_value(inst, agent, bundle)


def divisible_value(inst: Instance, agent: int, bundle: Bundle) -> Fraction:
    return sum((x * v for x, v in zip(bundle.fractions, inst.v_div[agent]) if x), ZERO)


def indivisible_value(inst: Instance, agent: int, goods: Iterable[int]) -> Fraction:
    row = inst.v_ind[agent]
    return sum((row[k] for k in goods), ZERO)


def utilities(inst: Instance, alloc: Allocation) -> UtilityProfile:
    return tuple(value_of(inst, i, b) for i, b in enumerate(alloc.bundles))


# -- envy-based predicates ---------------------------------------------------

def _ef1_ok(inst: Instance, i: int, own: Fraction, other: Bundle) -> bool:
    """Whether dropping some good of ``other`` leaves ``i`` envy-free of it."""
    whole = value_of(inst, i, other)
    if own >= whole:
        return True
    row = inst.v_ind[i]
    return any(own >= whole - row[g] for g in other.goods)


def find_envy(inst: Instance, alloc: Allocation) -> tuple[int, int] | None:
    """First ordered pair ``(i, j)`` in which i envies j, or ``None``."""
    for i, own_bundle in enumerate(alloc.bundles):
        own = value_of(inst, i, own_bundle)
        for j, other in enumerate(alloc.bundles):
            if i != j and value_of(inst, i, other) > own:
                return i, j
    return None


def find_ef1_violation(inst: Instance, alloc: Allocation) -> tuple[int, int] | None:
    if inst.m_bar > 0:
        raise PreconditionError(
            "EF1 is defined for indivisible goods only; use efm-pos / efm-zero "
            "or pass the indivisible projection")
    for i, own_bundle in enumerate(alloc.bundles):
        own = value_of(inst, i, own_bundle)
        for j, other in enumerate(alloc.bundles):
            if i != j and not _ef1_ok(inst, i, own, other):
                return i, j
    return None


def _find_efm_violation(inst: Instance, alloc: Allocation, zero_amount: bool):
    for i, own_bundle in enumerate(alloc.bundles):
        own = value_of(inst, i, own_bundle)
        for j, other in enumerate(alloc.bundles):
            if i == j:
                continue
            if zero_amount:
                escape = not other.has_divisible
            else:
                escape = divisible_value(inst, i, other) == 0
            # Escape with an empty G_j is routed through plain envy-freeness;
            # v_i(A_j) is 0 there so the outcome is the same.
            if escape and other.goods:
                ok = _ef1_ok(inst, i, own, other)
            else:
                ok = own >= value_of(inst, i, other)
            if not ok:
                return i, j
    return None


def find_efm_pos_violation(inst: Instance, alloc: Allocation) -> tuple[int, int] | None:
    return _find_efm_violation(inst, alloc, zero_amount=False)


def find_efm_zero_violation(inst: Instance, alloc: Allocation) -> tuple[int, int] | None:
    return _find_efm_violation(inst, alloc, zero_amount=True)


def is_ef(inst: Instance, alloc: Allocation) -> bool:
    return find_envy(inst, alloc) is None


def is_ef1(inst: Instance, alloc: Allocation) -> bool:
    """EF1 on an indivisible-only instance; raises if divisible goods exist."""
    return find_ef1_violation(inst, alloc) is None


def is_efm_pos(inst: Instance, alloc: Allocation) -> bool:
    """EFM>0: the EF1 escape applies when i values j's divisible share at 0."""
    return find_efm_pos_violation(inst, alloc) is None


def is_efm_zero(inst: Instance, alloc: Allocation) -> bool:
    """EFM>=0: the EF1 escape applies only when j holds no divisible share at all."""
    return find_efm_zero_violation(inst, alloc) is None


# -- welfare and orderings ---------------------------------------------------

def nash_welfare_of(values: Iterable[Fraction]) -> tuple[int, Fraction]:
    positive = [v for v in values if v > 0]
    return len(positive), prod(positive, start=ONE)


def nash_welfare(inst: Instance, alloc: Allocation) -> tuple[int, Fraction]:
    """``(number of agents with positive utility, product of those utilities)``."""
    return nash_welfare_of(utilities(inst, alloc))


def _same_length(p: Sequence, q: Sequence) -> None:
    if len(p) != len(q):
        raise PreconditionError(f"profiles of different lengths {len(p)} and {len(q)}")


def leximin_compare(p: Sequence[Fraction], q: Sequence[Fraction]) -> int:
    """Compare two profiles in the leximin order; returns -1, 0 or 1 like ``cmp``."""
    _same_length(p, q)
    sp, sq = sorted(p), sorted(q)
    return (sp > sq) - (sp < sq)


def lorenz_dominates(p: Sequence[Fraction], q: Sequence[Fraction]) -> bool:
    """True iff every prefix sum of sorted ``p`` is at least that of sorted ``q``."""
    _same_length(p, q)
    return all(a >= b for a, b in zip(accumulate(sorted(p)), accumulate(sorted(q))))
