"""Truthfulness audits, the two-agent impossibility harness and pinned counterexamples."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterator, Sequence

from .core import (
    ONE,
    ZERO,
    Allocation,
    FairDivisionError,
    Instance,
    Mode,
    ModeError,
    as_rational,
    indivisible_value,
    is_efm_pos,
    nash_welfare,
    nash_welfare_of,
    utilities,
    value_of,
)
from .mechanisms import mechanism1, mechanism2, mechanism3, mechanism3_naive_multi
from .mnwtie import (
    assignment_to_allocation,
    assignment_utilities,
    mnw_tie_allocate,
    mnw_tie_no_disposal,
)
from .oracles import mnw_single_binary_divisible, wasteless_assignments


class AuditCapExceeded(FairDivisionError):
    pass


class InconclusiveError(FairDivisionError):
    """The finite grids produced no witness; this does not refute the theorem."""


class FixtureError(FairDivisionError, AssertionError):
    pass


# -- a fixed MNW rule for two agents with binary divisible goods ------------

def mnw_two_agents_continuous(inst: Instance) -> Allocation:
    """Exact MNW allocation for two agents with binary values on all goods.

    Each wasteless assignment is completed optimally in closed form: goods only
    one agent values go to that agent, and the pool of commonly valued
    divisible goods is split to maximize ``(A + t)(B + P - t)``. Ties keep
    the lexicographically first owner vector.
    """
    if inst.mode is not Mode.BINARY_ALL or inst.n != 2:
        raise ModeError("the two-agent MNW rule needs a binary-all instance with 2 agents")
    shared = [k for k in range(inst.m_bar) if inst.v_div[0][k] == inst.v_div[1][k] == 1]
    only = [[k for k in range(inst.m_bar) if inst.v_div[i][k] == 1 and inst.v_div[1 - i][k] == 0]
            for i in (0, 1)]
    best = None
    for owner in wasteless_assignments(inst):
        c = assignment_utilities(inst, owner)
        a, b, pool = c[0] + len(only[0]), c[1] + len(only[1]), len(shared)
        t = min(max((b + pool - a) / 2, ZERO), Fraction(pool))
        values = (a + t, b + pool - t)
        score = nash_welfare_of(values)
        if best is None or score > best[0]:
            best = (score, owner, t)
    _, owner, t = best
    x = [[ZERO] * inst.m_bar for _ in range(2)]
    for i in (0, 1):
        for k in only[i]:
            x[i][k] = ONE
    for k in shared:
        take = min(ONE, t)
        x[0][k], x[1][k] = take, ONE - take
        t -= take
    return Allocation.from_owners(owner, x, disposed_div=inst.valued_by_nobody_div())


# -- mechanism registry -------------------------------------------------------

@dataclass(frozen=True)
class MechanismSpec:
    run: Callable[[Instance], Allocation]
    modes: tuple[Mode, ...]
    reports_divisible: bool
    indivisible_only: bool = False


def _assignment_runner(rule):
    def run(inst: Instance) -> Allocation:
        return assignment_to_allocation(inst, rule(inst))
    return run


MECHANISMS: dict[str, MechanismSpec] = {
    "m1": MechanismSpec(lambda inst: mechanism1(inst)[0],
                        (Mode.BINARY_IND_IDENTICAL_DIV,), reports_divisible=False),
    "m2": MechanismSpec(lambda inst: mechanism2(inst)[0],
                        (Mode.BINARY_ALL,), reports_divisible=True),
    "m3": MechanismSpec(lambda inst: mechanism3(inst)[0],
                        (Mode.BINARY_ALL,), reports_divisible=True),
    "mnw-tie": MechanismSpec(_assignment_runner(mnw_tie_allocate),
                             (Mode.BINARY_ALL, Mode.BINARY_IND_IDENTICAL_DIV),
                             reports_divisible=False, indivisible_only=True),
    "mnw-tie-nodisposal": MechanismSpec(_assignment_runner(mnw_tie_no_disposal),
                                        (Mode.BINARY_ALL, Mode.BINARY_IND_IDENTICAL_DIV),
                                        reports_divisible=False, indivisible_only=True),
    "mnw-2agent": MechanismSpec(mnw_two_agents_continuous,
                                (Mode.BINARY_ALL,), reports_divisible=True),
}


def get_mechanism(mechanism: str) -> MechanismSpec:
    try:
        return MECHANISMS[mechanism]
    except KeyError:
        raise ModeError(f"unknown mechanism {mechanism!r}; choose from {sorted(MECHANISMS)}"
                        ) from None


@lru_cache(maxsize=1 << 18)
def run_mechanism(mechanism: str, inst: Instance) -> Allocation:
    """Run a registered mechanism; results are memoized since audits revisit profiles."""
    spec = get_mechanism(mechanism)
    if inst.mode not in spec.modes:
        raise ModeError(f"{mechanism} does not accept {inst.mode.value} instances")
    return spec.run(inst)


# -- truthfulness -----------------------------------------------------------

@dataclass(frozen=True)
class Deviation:
    reported_ind: tuple[Fraction, ...]
    reported_div: tuple[Fraction, ...]
    truthful_utility: Fraction
    deviating_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviating_utility - self.truthful_utility


@dataclass(frozen=True)
class AuditReport:
    mechanism: str
    agent: int
    deviation: Deviation | None
    search_space_size: int
    exhaustive: bool = True
    truthful_utility: Fraction = ZERO

    @property
    def truthful(self) -> bool:
        return self.deviation is None


DEFAULT_CAP = 1 << 12

_BITS = (ZERO, ONE)


def _reports(inst: Instance, spec: MechanismSpec) -> Iterator[tuple[tuple, tuple | None]]:
    div_rows = product(_BITS, repeat=inst.m_bar) if spec.reports_divisible else (None,)
    div_rows = list(div_rows)
    for ind in product(_BITS, repeat=inst.m):
        for div in div_rows:
            yield ind, div


def deviation_space_size(inst: Instance, mechanism: str) -> int:
    spec = get_mechanism(mechanism)
    return 2 ** (inst.m + (inst.m_bar if spec.reports_divisible else 0))


def audit_truthfulness(mechanism: str, inst: Instance, agent: int,
                       cap: int = DEFAULT_CAP) -> AuditReport:
    """Search every binary misreport of ``agent``; bundles are scored with the true values.

    Among deviations with the largest gain, the report changing the fewest
    entries of the truth wins, then the lexicographically smallest.
    """
    spec = get_mechanism(mechanism)
    inst._check_agent(agent)
    size = deviation_space_size(inst, mechanism)
    if size > cap:
        raise AuditCapExceeded(f"deviation space of {size} reports exceeds cap {cap}")

    def score(alloc: Allocation) -> Fraction:
        bundle = alloc.bundles[agent]
        if spec.indivisible_only:
            return indivisible_value(inst, agent, bundle.goods)
        return value_of(inst, agent, bundle)

    truth = inst.v_ind[agent] + (inst.v_div[agent] if spec.reports_divisible else ())
    truthful = score(run_mechanism(mechanism, inst))
    best, best_key = None, None
    for ind, div in _reports(inst, spec):
        report = inst.with_report(agent, ind, div)
        got = score(run_mechanism(mechanism, report))
        if got <= truthful:
            continue
        flips = sum(r != t for r, t in zip(ind + (div or ()), truth))
        key = (-got, flips)
        if best_key is None or key < best_key:
            best_key = key
            best = Deviation(ind, div if div is not None else inst.v_div[agent], truthful, got)
    return AuditReport(mechanism, agent, best, size, True, truthful)


def audit_all_agents(mechanism: str, inst: Instance, cap: int = DEFAULT_CAP
                     ) -> list[AuditReport]:
    return [audit_truthfulness(mechanism, inst, i, cap) for i in range(inst.n)]


# -- instance enumeration -----------------------------------------------------

def binary_instances(n: int, m: int, m_bar: int = 0) -> Iterator[Instance]:
    """Every binary-all instance of the given shape, rows in lexicographic order."""
    width = m + m_bar
    for rows in product(product((0, 1), repeat=width), repeat=n):
        yield Instance([r[:m] for r in rows], [r[m:] for r in rows], Mode.BINARY_ALL)


def identical_instances(n: int, m: int, u) -> Iterator[Instance]:
    for rows in product(product((0, 1), repeat=m), repeat=n):
        yield Instance.identical_divisible(rows, u)


# -- the two-agent, one-plus-one-goods impossibility ----------------------------

class Violation(str, enum.Enum):
    EFM = "efm_violation"
    AGENT1 = "deviation_agent1"
    AGENT2 = "deviation_agent2"


@dataclass(frozen=True)
class RuleWitness:
    a: Fraction
    b: Fraction
    x: Fraction
    violation: Violation
    detail: dict = field(default_factory=dict)


Rule = Callable[[Fraction, Fraction], Fraction]


def efm_interval(a, b) -> tuple[Fraction, Fraction]:
    """EFM>0-feasible range of agent 1's divisible share when agent 1 holds the good."""
    a, b = as_rational(a), as_rational(b)
    return (a - 1) / (2 * a), (b - 1) / (2 * b)


def lower_endpoint_rule(a: Fraction, b: Fraction) -> Fraction:
    return efm_interval(a, b)[0]


def upper_endpoint_rule(a: Fraction, b: Fraction) -> Fraction:
    return efm_interval(a, b)[1]


def midpoint_rule(a: Fraction, b: Fraction) -> Fraction:
    lo, hi = efm_interval(a, b)
    return (lo + hi) / 2


BUILTIN_RULES: dict[str, Rule] = {
    "lower": lower_endpoint_rule,
    "upper": upper_endpoint_rule,
    "midpoint": midpoint_rule,
}

DEFAULT_GRID = tuple(Fraction(v) for v in ("3/2", "2", "5/2", "3", "4"))
DEFAULT_DEVIATIONS = tuple(Fraction(k, 6) for k in range(7, 31))


def default_pairs(grid: Sequence[Fraction] = DEFAULT_GRID) -> list[tuple[Fraction, Fraction]]:
    return [(a, b) for a in grid for b in grid if b > a]


def impossibility_demo(rule: Rule,
                       pairs: Sequence[tuple[Fraction, Fraction]] | None = None,
                       deviations: Sequence[Fraction] = DEFAULT_DEVIATIONS) -> RuleWitness:
    """Find where ``rule`` breaks EFM>0 or truthfulness on the general 2x2 class.

    ``rule(a, b)`` is agent 1's share of the divisible good, agent 1 holding
    the indivisible good. Agent 1 values the whole bundle at ``1 + x*a`` and
    agent 2 at ``(1 - x)*b``.
    """
    if pairs is None:
        pairs = default_pairs()
    deviations = sorted(as_rational(d) for d in deviations)
    for a, b in pairs:
        a, b = as_rational(a), as_rational(b)
        Instance.general_two_by_two(a, b)
        lo, hi = efm_interval(a, b)
        x = as_rational(rule(a, b))
        if not lo <= x <= hi:
            return RuleWitness(a, b, x, Violation.EFM, {"interval": (lo, hi)})
        if x == lo:
            for a2 in deviations:
                if not a < a2 < b:
                    continue
                x2 = as_rational(rule(a2, b))
                if x2 > x:
                    return RuleWitness(a, b, x, Violation.AGENT1, {
                        "reported": a2, "new_x": x2,
                        "truthful_utility": 1 + x * a, "deviating_utility": 1 + x2 * a,
                        "gain": (x2 - x) * a})
        else:
            for b2 in deviations:
                if not a < b2 < b:
                    continue
                if not lo < efm_interval(a, b2)[1] < x:
                    continue
                x2 = as_rational(rule(a, b2))
                if x2 < x:
                    return RuleWitness(a, b, x, Violation.AGENT2, {
                        "reported": b2, "new_x": x2,
                        "truthful_utility": (1 - x) * b, "deviating_utility": (1 - x2) * b,
                        "gain": (x - x2) * b})
    raise InconclusiveError("no witness on the supplied grids")


# -- four agents, five goods, one divisible good -------------------------------

MANIPULATION_IND = ((0, 1, 0, 1, 0), (1, 1, 0, 0, 1), (1, 1, 1, 1, 1), (1, 1, 1, 1, 1))
MANIPULATION_DIV = ((0,), (1,), (1,), (1,))
MANIPULATION_MISREPORT = ((0, 1, 0, 0, 0), (1,))


@dataclass(frozen=True)
class ManipulationReport:
    bound_one_good: Fraction
    best_one_good: tuple[int, Fraction]
    two_goods_allocation: tuple[int, Fraction]
    mnw_truthful: tuple[int, Fraction]
    agent2_truthful_utility: Fraction
    misreport_allocation: tuple[int, Fraction]
    alternatives: tuple[Fraction, Fraction]
    mnw_misreport: tuple[int, Fraction]
    agent2_misreport_utility: Fraction
    checks: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)


def manipulation_instance() -> Instance:
    return Instance(MANIPULATION_IND, MANIPULATION_DIV, Mode.BINARY_ALL)


def _alloc(spec: Sequence[tuple[Sequence[int], Fraction]]) -> Allocation:
    return Allocation(tuple((frozenset(g), (as_rational(x),)) for g, x in spec))


def fixture_example_52() -> ManipulationReport:
    """Replay the MNW manipulation with four agents exactly; raises on any mismatch."""
    inst = manipulation_instance()
    third, half = Fraction(1, 3), Fraction(1, 2)

    one_good = mnw_single_binary_divisible(
        inst, keep=lambda owner: assignment_utilities(inst, owner)[0] == 1)
    bound = Fraction(5, 3) ** 3

    two_goods = _alloc([({1, 3}, 0), ({0}, third), ({2}, third), ({4}, third)])
    two_goods.validate(inst)
    nw_two = nash_welfare(inst, two_goods)
    mnw = mnw_single_binary_divisible(inst)
    agent2_truth = utilities(inst, mnw[2])[1]

    lied = inst.with_report(1, *MANIPULATION_MISREPORT)
    after = _alloc([({3}, 0), ({1}, half), ({0, 2}, 0), ({4}, half)])
    after.validate(lied)
    nw_after = nash_welfare(lied, after)
    both_to_1 = _alloc([({1, 3}, 0), ((), 1), ({0, 2}, 0), ({4}, 0)])
    all_three = _alloc([({3}, 0), ({1}, 0), ({0, 2, 4}, 0), ((), 1)])
    alternatives = (nash_welfare(lied, both_to_1)[1], nash_welfare(lied, all_three)[1])
    mnw_lied = mnw_single_binary_divisible(lied)
    agent2_lied = value_of(inst, 1, mnw_lied[2].bundles[1])

    checks = (
        ("one-good bound is 125/27", bound == Fraction(125, 27)),
        ("best with agent 1 on one good <= 125/27",
         one_good[0] == 4 and one_good[1] <= bound),
        ("two goods to agent 1 reaches 128/27", nw_two == (4, Fraction(128, 27))),
        ("128/27 beats 125/27", nw_two[1] > bound),
        ("truthful MNW optimum is 128/27", mnw[:2] == (4, Fraction(128, 27))),
        ("agent 2 gets 4/3 when truthful", agent2_truth == Fraction(4, 3)),
        ("misreport allocation reaches 9/2", nw_after == (4, Fraction(9, 2))),
        ("9/2 beats the alternatives 4 and 3",
         alternatives == (4, 3) and nw_after[1] > max(alternatives)),
        ("misreported MNW optimum is 9/2", mnw_lied[:2] == (4, Fraction(9, 2))),
        ("agent 2 truly gets 3/2 after lying", agent2_lied == Fraction(3, 2)),
    )
    report = ManipulationReport(bound, one_good[:2], nw_two, mnw[:2], agent2_truth, nw_after,
                             alternatives, mnw_lied[:2], agent2_lied, checks)
    failed = [name for name, passed in checks if not passed]
    if failed:
        raise FixtureError(f"example fixture failed: {failed}")
    return report


# -- free disposal and the two-agent MNW manipulation --------------------------

FREE_DISPOSAL_TABLE = ((1, 1, 1, 1, 1), (1, 1, 1, 0, 1), (1, 1, 1, 0, 1))
TWO_AGENT_TRUE = (((1,), (1, 1)), ((1,), (0, 1)))
TWO_AGENT_REPORTED = (((1,), (1, 0)), ((1,), (0, 1)))


def free_disposal_instance() -> Instance:
    return Instance.binary_all(FREE_DISPOSAL_TABLE)


def two_agent_instance(truthful: bool = False) -> Instance:
    rows = TWO_AGENT_TRUE if truthful else TWO_AGENT_REPORTED
    return Instance([r[0] for r in rows], [r[1] for r in rows], Mode.BINARY_ALL)


# -- several divisible goods break mechanism 3 ---------------------------------

def find_mechanism3_multi_counterexample(max_agents: int = 3, max_goods: int = 3,
                                         m_bar: int = 2
                                         ) -> tuple[Instance, Allocation] | None:
    """First binary instance (by size, then row order) where the naive split is not EFM>0."""
    for n in range(1, max_agents + 1):
        for m in range(max_goods + 1):
            for inst in binary_instances(n, m, m_bar):
                alloc = mechanism3_naive_multi(inst)
                if not is_efm_pos(inst, alloc):
                    return inst, alloc
    return None
