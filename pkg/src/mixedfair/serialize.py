"""JSON wire format for instances, allocations, traces and audit records.

Rationals travel as canonical ``"p/q"`` (or plain integer) strings. Goods are
0-based indices. Agents are positions in the bundle and row lists; wherever an
agent is named explicitly (owner vectors, traces, audit records) it carries a
1-based label.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .audit import AuditReport, RuleWitness
from .core import Allocation, Bundle, FairDivisionError, Instance, Mode, as_rational
from .mechanisms import MinSetTrace, TwoAgentTrace, Unbounded, WaterFillTrace


class ParseError(FairDivisionError, ValueError):
    pass


def rat(x: Fraction) -> str:
    return str(Fraction(x))


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(f"expected an integer or 'p/q' string, got {value!r}")
    try:
        return as_rational(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {value!r}: {exc}") from None


def _parse_matrix(rows: Any, name: str) -> list[list[Fraction]]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{name} must be a list of rows")
    return [[parse_rational(x) for x in r] for r in rows]


def instance_to_dict(inst: Instance) -> dict:
    out = {
        "agents": inst.n,
        "mode": inst.mode.value,
        "indivisible": [[rat(x) for x in row] for row in inst.v_ind],
        "divisible": [[rat(x) for x in row] for row in inst.v_div],
    }
    if inst.u is not None:
        out["identical_divisible_value"] = rat(inst.u)
    return out


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("instance file must hold a JSON object")
    try:
        agents = data["agents"]
        mode = Mode(data["mode"])
        ind = _parse_matrix(data["indivisible"], "indivisible")
    except KeyError as exc:
        raise ParseError(f"instance file is missing {exc}") from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if not isinstance(agents, int) or isinstance(agents, bool) or len(ind) != agents:
        raise ParseError(f"'agents' must equal the number of indivisible rows ({len(ind)})")
    u = data.get("identical_divisible_value")
    u = None if u is None else parse_rational(u)
    if "divisible" in data:
        div = _parse_matrix(data["divisible"], "divisible")
    elif mode is Mode.BINARY_IND_IDENTICAL_DIV and u is not None:
        div = [[u] for _ in range(agents)]
    else:
        raise ParseError("instance file is missing 'divisible'")
    try:
        return Instance(ind, div, mode, u)
    except FairDivisionError as exc:
        raise ParseError(str(exc)) from None


def allocation_to_dict(alloc: Allocation) -> dict:
    return {
        "bundles": [{"indivisible": sorted(b.goods), "divisible": [rat(x) for x in b.fractions]}
                    for b in alloc.bundles],
        "disposed": {"indivisible": sorted(alloc.disposed_ind),
                     "divisible": sorted(alloc.disposed_div)},
    }


def _index_list(value: Any, name: str) -> list[int]:
    if not isinstance(value, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) and k >= 0 for k in value):
        raise ParseError(f"{name} must be a list of non-negative integers")
    return value


def allocation_from_dict(data: Any) -> Allocation:
    if not isinstance(data, dict) or not isinstance(data.get("bundles"), list):
        raise ParseError("allocation file must hold an object with a 'bundles' list")
    bundles = []
    for b in data["bundles"]:
        if not isinstance(b, dict):
            raise ParseError("each bundle must be an object")
        goods = _index_list(b.get("indivisible", []), "bundle indivisible")
        fracs = b.get("divisible", [])
        if not isinstance(fracs, list):
            raise ParseError("bundle divisible must be a list")
        bundles.append(Bundle(frozenset(goods), tuple(parse_rational(x) for x in fracs)))
    disposed = data.get("disposed", {})
    if not isinstance(disposed, dict):
        raise ParseError("'disposed' must be an object")
    return Allocation(tuple(bundles),
                      frozenset(_index_list(disposed.get("indivisible", []), "disposed")),
                      frozenset(_index_list(disposed.get("divisible", []), "disposed")))


def _labels(agents) -> list[int]:
    return sorted(i + 1 for i in agents)


def trace_to_dict(trace) -> dict:
    if isinstance(trace, WaterFillTrace):
        return {"iterations": [{
            "T1": _labels(s.t1), "T2": _labels(s.t2),
            "delta": "infinite" if s.delta is Unbounded.INFINITE else rat(s.delta),
            "y": rat(s.y), "increment": rat(s.increment)} for s in trace.iterations]}
    if isinstance(trace, TwoAgentTrace):
        return {"i_star": None if trace.i_star is None else trace.i_star + 1,
                "k_bar_star": trace.k_bar_star}
    if isinstance(trace, MinSetTrace):
        return {"T": _labels(trace.t)}
    raise TypeError(f"unknown trace type {type(trace).__name__}")


def report_to_dict(report: AuditReport) -> dict:
    dev = report.deviation
    return {
        "mechanism": report.mechanism,
        "agent": report.agent + 1,
        "truthful_utility": rat(report.truthful_utility),
        "deviation": None if dev is None else {
            "reported_indivisible": [rat(x) for x in dev.reported_ind],
            "reported_divisible": [rat(x) for x in dev.reported_div],
            "truthful_utility": rat(dev.truthful_utility),
            "deviating_utility": rat(dev.deviating_utility),
            "gain": rat(dev.gain),
        },
        "search_space_size": report.search_space_size,
        "exhaustive": report.exhaustive,
    }


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return rat(value)
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def witness_to_dict(w: RuleWitness) -> dict:
    return {"a": rat(w.a), "b": rat(w.b), "x": rat(w.x),
            "violation": w.violation.value, "detail": _plain(w.detail)}


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(read_json(path))


def load_allocation(path: str | Path) -> Allocation:
    return allocation_from_dict(read_json(path))


def dump_json(data: Any, path: str | Path | None = None) -> str:
    text = json.dumps(data, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
