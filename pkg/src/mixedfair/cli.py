"""Command-line front end.

Exit codes are part of the interface:

    0  success / property holds / no profitable deviation
    1  unreadable or invalid input, or a property precondition fails
    2  instance mode does not fit the mechanism
    3  checked property fails
    4  audit found a profitable deviation
    5  audit deviation space exceeds --cap
    6  impossibility demo inconclusive on the given grids
    7  a demo fixture failed to reproduce
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import audit as audit_mod
from .core import (
    FairDivisionError,
    InvalidAllocationError,
    ModeError,
    PreconditionError,
    find_ef1_violation,
    find_efm_pos_violation,
    find_efm_zero_violation,
    find_envy,
    lorenz_dominates,
    utilities,
)
from .mechanisms import mechanism1, mechanism2, mechanism3
from .mnwtie import assignment_to_allocation, mnw_tie_allocate
from .oracles import all_assignments, check_water_filling_property, water_fill, wasteless_assignments
from .serialize import (
    ParseError,
    allocation_to_dict,
    dump_json,
    instance_to_dict,
    load_allocation,
    load_instance,
    parse_rational,
    rat,
    report_to_dict,
    trace_to_dict,
    witness_to_dict,
)

EXIT_OK, EXIT_PARSE, EXIT_MODE, EXIT_FAILS = 0, 1, 2, 3
EXIT_DEVIATION, EXIT_CAPPED, EXIT_INCONCLUSIVE, EXIT_FIXTURE = 4, 5, 6, 7


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _show(x: Fraction, pretty: bool) -> str:
    return f"{rat(x)} (~{float(x):.6g})" if pretty else rat(x)


def _agent_label(i: int) -> str:
    return f"agent {i + 1}"


# -- allocate -------------------------------------------------------------------

def _run_allocation(name: str, inst):
    if name == "m1":
        return mechanism1(inst)
    if name == "m2":
        return mechanism2(inst)
    if name == "m3":
        return mechanism3(inst)
    owner = mnw_tie_allocate(inst)
    return assignment_to_allocation(inst, owner), None


def cmd_allocate(args) -> int:
    try:
        inst = load_instance(args.instance)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_PARSE
    try:
        alloc, trace = _run_allocation(args.mechanism, inst)
    except ModeError as exc:
        _err(str(exc))
        return EXIT_MODE
    except FairDivisionError as exc:
        _err(str(exc))
        return EXIT_PARSE
    # Agents are labelled from 1 on the command line; goods stay 0-based.
    owners = [None if o is None else o + 1 for o in alloc.owners(inst.m)]
    out = {"mechanism": args.mechanism, **allocation_to_dict(alloc), "owners": owners}
    if args.trace and trace is not None:
        out["trace"] = trace_to_dict(trace)
    text = dump_json(out, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        labels = " ".join("-" if o is None else str(o) for o in owners)
        print(f"owners: {labels}")
        scored = inst.indivisible_projection() if args.mechanism == "mnw-tie" else inst
        for i, u in enumerate(utilities(scored, alloc)):
            print(f"{_agent_label(i)}: utility {_show(u, args.pretty)}")
    return EXIT_OK


# -- check ----------------------------------------------------------------------

def _lorenz_witness(inst, alloc):
    """A competing profile the allocation fails to Lorenz-dominate, or None."""
    own = utilities(inst, alloc)
    if inst.m_bar == 0:
        rivals = (utilities(inst, assignment_to_allocation(inst, o))
                  for o in all_assignments(inst))
    elif inst.u is not None:
        rivals = (utilities(inst, water_fill(inst, o)) for o in wasteless_assignments(inst))
    else:
        raise PreconditionError(
            "lorenz check needs an indivisible-only or identical-divisible instance")
    for profile in rivals:
        if not lorenz_dominates(own, profile):
            return profile
    return None


def cmd_check(args) -> int:
    try:
        inst = load_instance(args.instance)
        alloc = load_allocation(args.allocation)
        alloc.validate(inst)
    except (ParseError, InvalidAllocationError) as exc:
        _err(str(exc))
        return EXIT_PARSE

    finders = {"ef": find_envy, "ef1": find_ef1_violation,
               "efm-pos": find_efm_pos_violation, "efm-zero": find_efm_zero_violation}
    try:
        if args.property in finders:
            pair = finders[args.property](inst, alloc)
            if pair is not None:
                i, j = pair
                print(f"{args.property} fails: {_agent_label(i)} envies {_agent_label(j)} "
                      f"(pair {i + 1},{j + 1})")
                return EXIT_FAILS
        elif args.property == "water-fill":
            if not check_water_filling_property(inst, alloc):
                print("water-fill fails")
                return EXIT_FAILS
        else:
            rival = _lorenz_witness(inst, alloc)
            if rival is not None:
                print("lorenz fails: not dominating profile "
                      + "(" + ", ".join(rat(v) for v in rival) + ")")
                return EXIT_FAILS
    except FairDivisionError as exc:
        _err(str(exc))
        return EXIT_PARSE
    print(f"{args.property} holds")
    return EXIT_OK


# -- audit ----------------------------------------------------------------------

def cmd_audit(args) -> int:
    try:
        inst = load_instance(args.instance)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_PARSE
    if args.all_agents:
        agents = range(inst.n)
    else:
        if not 1 <= args.agent <= inst.n:
            _err(f"--agent must be between 1 and {inst.n}")
            return EXIT_PARSE
        agents = [args.agent - 1]
    found = False
    try:
        for i in agents:
            report = audit_mod.audit_truthfulness(args.mechanism, inst, i, cap=args.cap)
            print(json.dumps(report_to_dict(report)))
            if report.deviation is not None:
                found = True
                if args.pretty:
                    print(f"# {_agent_label(i)} gains {_show(report.deviation.gain, True)}",
                          file=sys.stderr)
    except audit_mod.AuditCapExceeded as exc:
        _err(str(exc))
        return EXIT_CAPPED
    except ModeError as exc:
        _err(str(exc))
        return EXIT_MODE
    return EXIT_DEVIATION if found else EXIT_OK


# -- demo -----------------------------------------------------------------------

def _rational_list(text: str) -> list[Fraction]:
    try:
        return [parse_rational(t.strip()) for t in text.split(",") if t.strip()]
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _demo_impossibility(args) -> int:
    rules = list(audit_mod.BUILTIN_RULES) if args.rule == "all" else [args.rule]
    pairs = audit_mod.default_pairs(args.grid or audit_mod.DEFAULT_GRID)
    deviations = args.deviations or audit_mod.DEFAULT_DEVIATIONS
    status = EXIT_OK
    for name in rules:
        try:
            w = audit_mod.impossibility_demo(audit_mod.BUILTIN_RULES[name], pairs, deviations)
        except audit_mod.InconclusiveError as exc:
            print(json.dumps({"rule": name, "inconclusive": str(exc)}))
            status = EXIT_INCONCLUSIVE
            continue
        print(json.dumps({"rule": name, **witness_to_dict(w)}))
    return status


def _demo_manipulation(args) -> int:
    try:
        r = audit_mod.fixture_example_52()
    except audit_mod.FixtureError as exc:
        _err(str(exc))
        return EXIT_FIXTURE
    p = args.pretty
    print(f"upper bound with agent 1 holding one good: {_show(r.bound_one_good, p)}")
    print(f"best found with agent 1 holding one good: {_show(r.best_one_good[1], p)}")
    print(f"agent 1 holding g2 and g4: {_show(r.two_goods_allocation[1], p)}")
    print(f"agent 2 truthful MNW utility: {_show(r.agent2_truthful_utility, p)}")
    print(f"after agent 2 misreports: {_show(r.misreport_allocation[1], p)}, "
          f"alternatives {', '.join(_show(a, p) for a in r.alternatives)}")
    print(f"agent 2 true utility after misreport: {_show(r.agent2_misreport_utility, p)}")
    for name, passed in r.checks:
        print(f"  [{'ok' if passed else 'FAIL'}] {name}")
    return EXIT_OK


def _demo_several_divisible(args) -> int:
    found = audit_mod.find_mechanism3_multi_counterexample(
        args.max_agents, args.max_goods, args.divisible)
    if found is None:
        print(json.dumps({"counterexample": None}))
        return EXIT_FIXTURE
    inst, alloc = found
    i, j = find_efm_pos_violation(inst, alloc)
    print(json.dumps({"instance": instance_to_dict(inst), "allocation": allocation_to_dict(alloc),
                      "violating_pair": [i + 1, j + 1]}))
    return EXIT_OK


def cmd_demo(args) -> int:
    return {"thm31": _demo_impossibility, "ex52": _demo_manipulation, "remark-multi": _demo_several_divisible}[args.which](args)


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedfair", description="Truthful EFM mechanisms for mixed goods.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true",
                        help="also show decimal approximations in human-readable lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", parents=[common], help="run a mechanism on an instance file")
    p.add_argument("--mechanism", required=True, choices=["m1", "m2", "m3", "mnw-tie"])
    p.add_argument("--instance", required=True)
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true", help="include the mechanism's internal choices")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("check", parents=[common], help="test a fairness property of an allocation")
    p.add_argument("--property", required=True,
                   choices=["ef", "ef1", "efm-pos", "efm-zero", "water-fill", "lorenz"])
    p.add_argument("--instance", required=True)
    p.add_argument("--allocation", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("audit", parents=[common], help="search for profitable misreports")
    p.add_argument("--mechanism", required=True, choices=sorted(audit_mod.MECHANISMS))
    p.add_argument("--instance", required=True)
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--agent", type=int, help="1-based agent label")
    who.add_argument("--all-agents", action="store_true")
    p.add_argument("--cap", type=int, default=audit_mod.DEFAULT_CAP)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("demo", parents=[common], help="reproduce a worked counterexample")
    p.add_argument("--which", required=True, choices=["thm31", "ex52", "remark-multi"])
    p.add_argument("--rule", default="midpoint", choices=[*audit_mod.BUILTIN_RULES, "all"])
    p.add_argument("--grid", type=_rational_list, help="comma-separated values for a and b")
    p.add_argument("--deviations", type=_rational_list,
                   help="comma-separated values tried as misreports")
    p.add_argument("--max-agents", type=int, default=3)
    p.add_argument("--max-goods", type=int, default=3)
    p.add_argument("--divisible", type=int, default=2)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
