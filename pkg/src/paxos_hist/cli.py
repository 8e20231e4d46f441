"""Command-line front end.

Exit codes: 0 clean, 1 violation or failed run, 2 usage or configuration
error, 3 state cap reached before exploration finished.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Iterable, TextIO

from . import __version__
from .domain import (
    ActionInstance,
    Decree,
    Proposal,
    Scope,
    ScopeError,
    Vote,
    message_from_json,
    message_to_json,
    sorted_messages,
    value_domain,
)
from .explorer import ExplorationReport, Violation, default_state_cap, explore
from .invariants import CheckResult
from .simulator import SCENARIOS, RunRecord, run_scenario, scenario_scope, simulate

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {"variant": "basic", "acceptors": 3, "ballots": 1, "values": 2, "depth": "unlimited", "quorums": "majority"}
SCOPE_KEYS = {
    "variant": "variant",
    "acceptors": "acceptors",
    "proposers": "proposers",
    "ballots": "ballots",
    "values": "values",
    "slots": "slots",
    "max-new": "max_new",
    "max_new": "max_new",
    "maxnew": "max_new",
    "depth": "depth",
    "quorums": "quorums",
    "state-cap": "state_cap",
    "state_cap": "state_cap",
    "statecap": "state_cap",
    "seed": "seed",
    "steps": "steps",
    "format": "format",
    "out": "out",
    "workers": "workers",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


# ------------------------------------------------------------ json shapes


def _is_message(x: Any) -> bool:
    return hasattr(type(x), "TAG")


def to_jsonable(x: Any) -> Any:
    if _is_message(x):
        return message_to_json(x)
    if isinstance(x, Proposal):
        return {"bal": x.bal, "val": x.val}
    if isinstance(x, Decree):
        return {"slot": x.slot, "val": x.val}
    if isinstance(x, Vote):
        return {"bal": x.bal, "slot": x.slot, "val": x.val}
    if isinstance(x, (frozenset, set)):
        items = list(x)
        items = sorted_messages(items) if items and all(map(_is_message, items)) else sorted(items)
        return [to_jsonable(e) for e in items]
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(e) for e in x]
    return x


def params_from_json(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if k in ("m", "m2"):
            out[k] = message_from_json(v)
        elif k == "r":
            out[k] = Proposal(v["bal"], v["val"])
        elif k == "Q":
            out[k] = frozenset(v)
        elif k == "S":
            out[k] = frozenset(message_from_json(m) for m in v)
        elif k == "D":
            out[k] = frozenset(Decree(d["slot"], d["val"]) for d in v)
        else:
            out[k] = v
    return out


def action_to_json(step: int, act: ActionInstance) -> dict:
    return {
        "step": step,
        "action": act.name,
        "params": to_jsonable(act.params),
        "delta": [message_to_json(m) for m in sorted_messages(act.delta)],
    }


def action_from_json(obj: dict) -> ActionInstance:
    delta = frozenset(message_from_json(m) for m in obj["delta"])
    return ActionInstance(obj["action"], params_from_json(obj["params"]), delta)


def check_to_json(r: CheckResult) -> dict:
    return {"check": r.name, "status": r.status, "witness": to_jsonable(r.witness)}


def violation_to_json(v: Violation) -> dict:
    return {
        **check_to_json(v.check),
        "kind": v.kind,
        "trace_length": len(v.trace),
        "trace": [action_to_json(i, a) for i, a in enumerate(v.trace, 1)],
        "state": [message_to_json(m) for m in sorted_messages(v.state)],
    }


def header_json(scope: Scope, command: str, **extra: Any) -> dict:
    return {"scope": scope.to_json(), "variant": scope.variant, "version": __version__, "command": command, **extra}


def primary_violation(violations: list[Violation]) -> Violation | None:
    """The counterexample whose trace is printed: Agree if present, else the first."""
    for v in violations:
        if v.check.name == "Agree":
            return v
    return violations[0] if violations else None


def report_lines(report: ExplorationReport) -> list[dict]:
    lines = [header_json(report.scope, report.mode)]
    main = primary_violation(report.violations)
    if main is not None:
        lines.extend(action_to_json(i, a) for i, a in enumerate(main.trace, 1))
    lines.append(
        {
            "status": report.status,
            "violations": [violation_to_json(v) for v in report.violations],
            "states_visited": report.states_visited,
            "transitions": report.transitions,
            "max_depth": report.max_depth_reached,
            "level_sizes": report.level_sizes,
            "complete": report.complete,
            "cap_hit": report.cap_hit,
            "depth_truncated": report.depth_truncated,
            "duration": round(report.duration, 6),
        }
    )
    return lines


def run_lines(rec: RunRecord, command: str, **extra: Any) -> list[dict]:
    lines = [header_json(rec.scope, command, **extra)]
    lines.extend(action_to_json(i, a) for i, a in enumerate(rec.trace, 1))
    if rec.disabled is not None:
        status = "disabled"
    else:
        status = "clean" if rec.ok else "violation"
    result = {
        "status": status,
        "violations": [check_to_json(r) for r in rec.checks if not r.ok],
        "seed": rec.seed,
        "steps": rec.steps,
        "chosen": {str(k): v for k, v in rec.chosen.items()},
        "final_state": [message_to_json(m) for m in sorted_messages(rec.final_state)],
    }
    if rec.disabled is not None:
        d = rec.disabled
        result["disabled"] = {"step": d.step, "action": d.action, "guard": d.guard}
    lines.append(result)
    return lines


def emit_json_lines(lines: Iterable[dict], out: TextIO) -> None:
    for obj in lines:
        out.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def parse_json_lines(text: str) -> tuple[dict, list[ActionInstance], dict]:
    """Split a json-lines report into header, action trace and result."""
    header, result, trace = None, None, []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        obj = json.loads(raw)
        if "version" in obj:
            header = obj
        elif "step" in obj:
            trace.append(action_from_json(obj))
        elif "status" in obj:
            result = obj
    if header is None or result is None:
        raise ValueError("trace needs a header and a result line")
    return header, trace, result


# ----------------------------------------------------------------- human


def _short(x: Any) -> str:
    if _is_message(x):
        body = ",".join(f"{k}={json.dumps(v, separators=(',', ':')) if isinstance(v, list) else v}"
                        for k, v in message_to_json(x).items() if k != "type")
        return f"{x[0]}({body})"
    if isinstance(x, Proposal):
        return f"({x.bal},{x.val})"
    if isinstance(x, (Decree, Vote)):
        return "(" + ",".join(str(e) for e in x) + ")"
    if isinstance(x, (frozenset, set)):
        return "{" + ",".join(_short(e) for e in to_sorted(x)) + "}"
    return str(x)


def to_sorted(x) -> list:
    items = list(x)
    return sorted_messages(items) if items and all(map(_is_message, items)) else sorted(items)


def _process(act: ActionInstance) -> str:
    p = act.params
    if "a" in p:
        return f"A{p['a']}"
    if "p" in p:
        return f"P{p['p']}"
    return "-"


_PHASE = {"phase1a": "Phase 1a", "phase1b": "Phase 1b", "phase2a": "Phase 2a", "phase2b": "Phase 2b", "preempt": "Preempt"}


def trace_table(trace: tuple[ActionInstance, ...], multi: bool) -> list[str]:
    rows = [("step", "proc", "action", "params", "sends")]
    for i, act in enumerate(trace, 1):
        params = " ".join(f"{k}={_short(v)}" for k, v in act.params.items())
        sends = " ".join(_short(m) for m in sorted_messages(act.delta)) or "(nothing new)"
        rows.append((str(i), _process(act), _PHASE.get(act.name, act.name), params, sends))
    widths = [max(len(r[c]) for r in rows) for c in range(4)]
    return ["  ".join(r[c].ljust(widths[c]) for c in range(4)) + "  " + r[4] for r in rows]


def _scope_line(scope: Scope) -> str:
    parts = []
    for k, v in scope.to_json().items():
        if isinstance(v, list):
            v = ",".join(map(str, v)) if k == "values" else json.dumps(v, separators=(",", ":"))
        parts.append(f"{k}={v}")
    return " ".join(parts)


def _witness_text(r: CheckResult) -> str:
    if r.witness is None:
        return ""
    return " ".join(f"{k}={_short(v)}" for k, v in r.witness.items())


def report_human(report: ExplorationReport, cap: int) -> list[str]:
    out = [f"paxos-hist {__version__}  {report.mode}  {_scope_line(report.scope)}"]
    out.append(
        f"states {report.states_visited}  transitions {report.transitions}  "
        f"max depth {report.max_depth_reached}  duration {report.duration:.2f}s"
    )
    for v in report.violations:
        out.append(f"VIOLATION {v.check.name} [{v.kind}] {_witness_text(v.check)}")
    main = primary_violation(report.violations)
    if main is not None:
        out.append(f"shortest trace to {main.check.name} ({len(main.trace)} actions):")
        out.extend("  " + line for line in trace_table(main.trace, report.scope.is_multi))
    if report.violations:
        out.append(f"result: {len(report.violations)} violation(s)")
    elif report.cap_hit:
        out.append(f"result: incomplete, state cap {cap} reached; no violation among visited states")
    elif report.depth_truncated:
        out.append(f"result: no violation within depth {report.scope.depth_limit} (bounded, not a full verification)")
    elif report.mode == "induct":
        out.append("result: inductive (Init => Inv, every explored transition preserves Inv, Inv => Agree)")
    else:
        out.append("result: verified, no violations; exploration complete")
    return out


def run_human(rec: RunRecord, title: str) -> list[str]:
    out = [f"paxos-hist {__version__}  {title}  {_scope_line(rec.scope)}"]
    out.extend(trace_table(rec.trace, rec.scope.is_multi))
    if rec.disabled is not None:
        d = rec.disabled
        out.append(f"DISABLED at step {d.step}: {d.action} guard {d.guard} is false")
    for r in rec.checks:
        if not r.ok:
            out.append(f"VIOLATION {r.name} {_witness_text(r)}")
    if rec.scope.is_multi:
        chosen = "  ".join(f"slot {k}: {','.join(v) or '-'}" for k, v in rec.chosen.items())
    else:
        chosen = ",".join(rec.chosen["values"]) or "-"
    out.append(f"chosen: {chosen}")
    out.append(f"result: {'clean' if rec.ok else 'disabled step' if rec.disabled else 'violation'}")
    return out


# ------------------------------------------------------------- arguments


def _scope_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scope", metavar="FILE", help="JSON scope file; flags override its values")
    p.add_argument("--variant", choices=("basic", "basic-unsafe-2a", "multi", "multi-preempt"))
    p.add_argument("--acceptors", type=int, metavar="N")
    p.add_argument("--proposers", type=int, metavar="N")
    p.add_argument("--ballots", type=int, metavar="N")
    p.add_argument("--values", type=int, metavar="N")
    p.add_argument("--slots", type=int, metavar="N")
    p.add_argument("--max-new", type=int, metavar="N", dest="max_new")
    p.add_argument("--depth", metavar="N|unlimited")
    p.add_argument("--quorums", metavar="majority|FILE")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("human", "json-lines"))
    p.add_argument("--out", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="paxos-hist", description="Exhaustive checker for sent-set Paxos specifications.")
    parser.add_argument("--version", action="version", version=f"paxos-hist {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    for name, text in (("check", "explore every reachable state"), ("induct", "check inductiveness of TypeOK and MsgInv")):
        p = sub.add_parser(name, help=text)
        _scope_flags(p)
        _output_flags(p)
        p.add_argument("--state-cap", type=int, metavar="N", dest="state_cap")
        p.add_argument("--workers", type=int, metavar="N")
    p = sub.add_parser("simulate", help="seeded random run")
    _scope_flags(p)
    _output_flags(p)
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--steps", type=int, metavar="N")
    p = sub.add_parser("scenario", help="scripted double-2a run")
    p.add_argument("name", choices=SCENARIOS)
    p.add_argument("--values", type=int, metavar="N")
    _output_flags(p)
    p = sub.add_parser("validate-scope", help="validate a scope and print it")
    _scope_flags(p)
    _output_flags(p)
    return parser


def _read_json(path: str, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {what} {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed {what} {path}: {e.msg} at line {e.lineno}") from None


def load_scope_file(path: str) -> dict:
    data = _read_json(path, "scope file")
    if not isinstance(data, dict):
        raise UsageError(f"scope file {path} must hold a JSON object")
    out = {}
    for k, v in data.items():
        if k not in SCOPE_KEYS:
            raise UsageError(f"unknown scope key {k!r} in {path}")
        out[SCOPE_KEYS[k]] = v
    return out


def _quorums(raw: Any, acceptors: int) -> frozenset | None:
    if raw is None or raw == "majority":
        return None
    if isinstance(raw, str):
        raw = _read_json(raw, "quorum file")
        if isinstance(raw, dict):
            raw = raw.get("quorums")
    if not isinstance(raw, list) or not all(isinstance(q, list) for q in raw):
        raise UsageError("quorums must be 'majority' or a list of acceptor lists")
    if any(not isinstance(a, int) or isinstance(a, bool) for q in raw for a in q):
        raise UsageError("quorum members must be acceptor numbers")
    return frozenset(frozenset(q) for q in raw)


def _int(settings: dict, key: str) -> int | None:
    v = settings.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise UsageError(f"{key.replace('_', '-')} must be an integer")
    return v


def scope_from_settings(settings: dict) -> Scope:
    merged = {**DEFAULTS, **{k: v for k, v in settings.items() if v is not None}}
    depth = merged["depth"]
    if depth == "unlimited":
        depth_limit = None
    else:
        try:
            depth_limit = int(depth)
        except (TypeError, ValueError):
            raise UsageError(f"depth must be an integer or 'unlimited', got {depth!r}") from None
    values = merged["values"]
    if isinstance(values, list):
        values = tuple(values)
    elif isinstance(values, int) and not isinstance(values, bool):
        if values < 1:
            raise UsageError("values must be >= 1")
        values = value_domain(values)
    else:
        raise UsageError("values must be a count or a list of names")
    acceptors = _int(merged, "acceptors")
    try:
        return Scope(
            variant=merged["variant"],
            n_acceptors=acceptors,
            ballot_bound=_int(merged, "ballots"),
            values=values,
            n_proposers=_int(merged, "proposers"),
            slot_bound=_int(merged, "slots"),
            max_new=_int(merged, "max_new"),
            quorums=_quorums(merged["quorums"], acceptors),
            depth_limit=depth_limit,
        )
    except ScopeError as e:
        raise UsageError(str(e)) from None


def _settings(args: argparse.Namespace) -> dict:
    settings = load_scope_file(args.scope) if getattr(args, "scope", None) else {}
    for key in ("variant", "acceptors", "proposers", "ballots", "values", "slots", "max_new", "depth",
                "quorums", "state_cap", "seed", "steps", "format", "out", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    return settings


# ------------------------------------------------------------------ main


def _emit(lines_json: list[dict], lines_human: list[str], settings: dict) -> None:
    fmt = settings.get("format") or "human"
    if fmt not in ("human", "json-lines"):
        raise UsageError(f"unknown format {fmt!r}")
    path = settings.get("out")
    stream = open(path, "w", encoding="utf-8") if path else sys.stdout
    try:
        if fmt == "json-lines":
            emit_json_lines(lines_json, stream)
        else:
            stream.write("\n".join(lines_human) + "\n")
    finally:
        if path:
            stream.close()


def _run(argv: list[str] | None) -> int:
    args = build_parser().parse_args(argv)
    settings = _settings(args)

    if args.command == "scenario":
        scope = scenario_scope(args.name, settings.get("values", 2))
        rec = run_scenario(args.name, scope)
        _emit(run_lines(rec, "scenario", scenario=args.name), run_human(rec, f"scenario {args.name}"), settings)
        if rec.disabled is not None:
            d = rec.disabled
            print(f"scenario {args.name}: step {d.step}: {d.action} disabled: guard {d.guard} is false", file=sys.stderr)
        return EXIT_OK if rec.ok else EXIT_VIOLATION

    scope = scope_from_settings(settings)

    if args.command == "validate-scope":
        _emit([header_json(scope, "validate-scope"), {"status": "valid", "violations": []}],
              [f"valid scope: {_scope_line(scope)}"], settings)
        return EXIT_OK

    if args.command == "simulate":
        seed = _int(settings, "seed") or 0
        steps = _int(settings, "steps")
        steps = 100 if steps is None else steps
        if steps < 0:
            raise UsageError("steps must be >= 0")
        rec = simulate(scope, seed, steps)
        _emit(run_lines(rec, "simulate"), run_human(rec, f"simulate seed={seed}"), settings)
        return EXIT_OK if rec.ok else EXIT_VIOLATION

    cap = _int(settings, "state_cap")
    if cap is None:
        try:
            cap = default_state_cap()
        except ValueError:
            raise UsageError("PAXOS_HIST_STATE_CAP must be an integer") from None
    workers = _int(settings, "workers") or 1
    if cap < 1 or workers < 1:
        raise UsageError("state-cap and workers must be >= 1")
    mode = "induct" if args.command == "induct" else "check"
    report = explore(scope, mode=mode, workers=workers, state_cap=cap)
    _emit(report_lines(report), report_human(report, cap), settings)
    if report.violations:
        return EXIT_VIOLATION
    return EXIT_CAP if report.cap_hit else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        return _run(argv)
    except UsageError as e:
        print(f"paxos-hist: error: {e}", file=sys.stderr)
        return EXIT_USAGE
