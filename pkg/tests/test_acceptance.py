"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Everything is exact rational arithmetic, so the value tolerance is zero
throughout. Runtime limits are wall-clock on a single core and measured cold
(memo caches cleared first).
"""

import time
from fractions import Fraction
from itertools import product
from math import prod

import pytest

from mixedfair.audit import (
    BUILTIN_RULES,
    Violation,
    audit_all_agents,
    audit_truthfulness,
    binary_instances,
    find_mechanism3_multi_counterexample,
    fixture_example_52,
    free_disposal_instance,
    identical_instances,
    impossibility_demo,
    run_mechanism,
)
from mixedfair.core import (
    is_efm_pos,
    is_efm_zero,
    lorenz_dominates,
    nash_welfare_of,
    utilities,
)
from mixedfair.mechanisms import mechanism1, mechanism2, mechanism3
from mixedfair.mnwtie import _solve, mnw_tie_allocate
from mixedfair.oracles import (
    brute_leximin_mixed,
    brute_mnw_indivisible,
    check_water_filling_property,
    potential_phi,
    wasteless_assignments,
    water_fill,
)

U_VALUES = tuple(Fraction(u) for u in ("1/2", "1", "2", "3"))


def cold():
    _solve.cache_clear()
    run_mechanism.cache_clear()


def identical_range():
    """n <= 3, m <= 4, u in {1/2, 1, 2, 3}."""
    for n in range(1, 4):
        for m in range(5):
            for u in U_VALUES:
                yield from identical_instances(n, m, u)


def two_agent_range():
    """n = 2, m <= 3, m_bar <= 3."""
    for m in range(4):
        for m_bar in range(4):
            yield from binary_instances(2, m, m_bar)


def one_divisible_range(max_m=4):
    """n <= 3, m <= max_m, m_bar = 1."""
    for n in range(1, 4):
        for m in range(max_m + 1):
            yield from binary_instances(n, m, 1)


def indivisible_range(max_m):
    for n in range(1, 4):
        for m in range(max_m + 1):
            yield from binary_instances(n, m)


def verdict(capsys, number, title, ok, elapsed=None, limit=None):
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.2f}s" + (f" / limit {limit:g}s]" if limit else "]")
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}{timing}")


def timed(fn):
    cold()
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


def test_criterion_1_four_agent_manipulation(capsys):
    report, elapsed = timed(fixture_example_52)
    ok = (report.ok and report.bound_one_good == Fraction(125, 27)
          and report.mnw_truthful == (4, Fraction(128, 27))
          and report.mnw_misreport == (4, Fraction(9, 2)) and elapsed < 1)
    verdict(capsys, 1, "Nash products 125/27, 128/27, 9/2 exact (tolerance 0)", ok, elapsed, 1)
    assert report.ok
    assert report.bound_one_good == Fraction(125, 27)
    assert report.two_goods_allocation == (4, Fraction(128, 27))
    assert report.mnw_truthful == (4, Fraction(128, 27))
    assert report.misreport_allocation == (4, Fraction(9, 2))
    assert report.mnw_misreport == (4, Fraction(9, 2))
    assert elapsed < 1


def test_criterion_2_free_disposal(capsys):
    inst = free_disposal_instance()

    def run():
        return (audit_all_agents("mnw-tie", inst),
                audit_truthfulness("mnw-tie-nodisposal", inst, 0))

    (with_disposal, without), elapsed = timed(run)
    dev = without.deviation
    ok = (all(r.truthful for r in with_disposal) and dev is not None and dev.gain > 0
          and dev.reported_ind == (1, 1, 1, 0, 1) and elapsed < 1)
    verdict(capsys, 2, "disposal truthful, no-disposal g4 misreport gains", ok, elapsed, 1)
    assert all(r.truthful for r in with_disposal)
    assert dev is not None and dev.gain == 1
    assert dev.reported_ind == (1, 1, 1, 0, 1)
    assert elapsed < 1


def test_criterion_3_fairness_sweep(capsys):
    def run():
        failures, counts = 0, [0, 0, 0]
        for inst in identical_range():
            counts[0] += 1
            failures += not is_efm_zero(inst, mechanism1(inst)[0])
        for inst in two_agent_range():
            counts[1] += 1
            failures += not is_efm_pos(inst, mechanism2(inst)[0])
        for inst in one_divisible_range():
            counts[2] += 1
            failures += not is_efm_zero(inst, mechanism3(inst)[0])
        return failures, counts

    (failures, counts), elapsed = timed(run)
    ok = failures == 0 and elapsed < 120
    verdict(capsys, 3, f"fairness sweep over {counts} instances, {failures} failures",
            ok, elapsed, 120)
    assert counts == [
        4 * sum(2 ** (n * m) for n in range(1, 4) for m in range(5)),
        sum(4 ** (m + m_bar) for m in range(4) for m_bar in range(4)),
        sum(2 ** (n * (m + 1)) for n in range(1, 4) for m in range(5)),
    ]
    assert failures == 0
    assert elapsed < 120


def test_criterion_4_truthfulness_sweep(capsys):
    sweeps = {
        "mnw-tie": lambda: indivisible_range(4),
        "m1": identical_range,
        "m2": two_agent_range,
        "m3": one_divisible_range,
    }

    def run():
        found, audits = {}, 0
        for name, instances in sweeps.items():
            found[name] = 0
            for inst in instances():
                for r in audit_all_agents(name, inst):
                    audits += 1
                    found[name] += not r.truthful
        return found, audits

    (found, audits), elapsed = timed(run)
    ok = not any(found.values()) and elapsed < 600
    verdict(capsys, 4, f"{audits} exhaustive audits, deviations {found}", ok, elapsed, 600)
    assert not any(found.values())
    assert elapsed < 600


def test_criterion_5_oracle_equivalence(capsys):
    def run():
        bad = 0
        for inst in identical_range():
            profile = utilities(inst, mechanism1(inst)[0])
            bad += tuple(sorted(profile)) != brute_leximin_mixed(inst)[0]
            best = nash_welfare_of(profile)
            bad += any(nash_welfare_of(utilities(inst, water_fill(inst, o))) > best
                       for o in wasteless_assignments(inst))
        for inst in indivisible_range(5):
            bad += mnw_tie_allocate(inst) != brute_mnw_indivisible(inst)[2]
        return bad

    bad, elapsed = timed(run)
    verdict(capsys, 5, f"mechanism 1 and MNW^tie match brute force, {bad} mismatches",
            bad == 0, elapsed)
    assert bad == 0


def test_criterion_6_water_filling(capsys):
    def run():
        bad = 0
        for inst in identical_range():
            a = mechanism1(inst)[0]
            if not check_water_filling_property(inst, a):
                bad += 1
                continue
            phi = potential_phi(inst, a)
            bad += any(potential_phi(inst, water_fill(inst, o)) > phi
                       for o in wasteless_assignments(inst))
        return bad

    bad, elapsed = timed(run)
    verdict(capsys, 6, f"water-filling property and maximal potential, {bad} failures",
            bad == 0, elapsed)
    assert bad == 0


def test_criterion_7_impossibility_harness(capsys):
    def run():
        return {name: impossibility_demo(rule) for name, rule in BUILTIN_RULES.items()}

    witnesses, elapsed = timed(run)
    kinds = {name: w.violation.value for name, w in witnesses.items()}
    ok = set(witnesses) == {"lower", "upper", "midpoint"} and elapsed < 1
    verdict(capsys, 7, f"witness per built-in rule {kinds}", ok, elapsed, 1)
    assert set(witnesses) == {"lower", "upper", "midpoint"}
    assert all(isinstance(w.violation, Violation) for w in witnesses.values())
    assert all(w.b > w.a for w in witnesses.values())
    assert elapsed < 1


def test_criterion_8_several_divisible_goods(capsys):
    def run():
        return (find_mechanism3_multi_counterexample(3, 3, 2),
                find_mechanism3_multi_counterexample(3, 3, 1))

    (two, one), elapsed = timed(run)
    ok = two is not None and not is_efm_pos(*two) and one is None and elapsed < 120
    verdict(capsys, 8, "EFM>0 counterexample at two divisible goods, none at one",
            ok, elapsed, 120)
    assert two is not None
    inst, alloc = two
    assert inst.m_bar == 2 and inst.n <= 3 and inst.m <= 3
    assert not is_efm_pos(inst, alloc)
    assert one is None
    assert elapsed < 120


def test_criterion_9_prefix_dominance_product(capsys):
    def run():
        checked = counterexamples = 0
        for n in range(1, 5):
            profiles = list(product(range(1, 6), repeat=n))
            for p in profiles:
                for q in profiles:
                    if lorenz_dominates(p, q):
                        checked += 1
                        counterexamples += prod(p) < prod(q)
        return checked, counterexamples

    (checked, counterexamples), elapsed = timed(run)
    verdict(capsys, 9, f"{checked} dominating pairs, {counterexamples} counterexamples",
            counterexamples == 0, elapsed)
    assert checked > 0
    assert counterexamples == 0
