"""Acceptance criteria, one test each.

Every test prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line at the stated tolerance, then asserts on the same verdict. The lines are
repeated in the terminal summary.
"""

from __future__ import annotations

import json
import time

import test_properties as props
from conftest import ACCEPTANCE_LINES

from paxos_hist.basic import GUARD_2A_UNIQUE
from paxos_hist.cli import main, parse_json_lines
from paxos_hist.domain import Scope, value_domain
from paxos_hist.explorer import explore, naive_explore, replay
from paxos_hist.invariants import BASIC_MSG_INV, MULTI_MSG_INV, check_agree
from paxos_hist.simulator import scenario_scope

C1 = ["check", "--variant", "basic", "--acceptors", "3", "--ballots", "2", "--values", "2", "--quorums", "majority"]
C4 = ["check", "--variant", "basic-unsafe-2a", "--acceptors", "3", "--ballots", "1", "--values", "2"]
C5 = ["check", "--variant", "multi-preempt", "--acceptors", "3", "--proposers", "1", "--ballots", "2",
      "--values", "2", "--slots", "1", "--max-new", "1"]


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def cli(capsys, argv):
    start = time.perf_counter()
    code = main([*argv, "--format", "json-lines"])
    elapsed = time.perf_counter() - start
    out, err = capsys.readouterr()
    header, trace, result = parse_json_lines(out)
    return code, header, trace, result, elapsed, out, err


def test_criterion_1_safe_basic_exhaustive(capsys):
    code, _, _, result, t, _, _ = cli(capsys, C1)
    checks = {v["check"] for v in result["violations"]}
    expected = {"TypeOK", *BASIC_MSG_INV, "VotedOnce", "VotedInv", "Agree", "SafeAtStable"}
    ok = code == 0 and result["status"] == "verified" and result["complete"] and not checks and t <= 300
    verdict(
        1, ok,
        f"{result['states_visited']} states, {result['transitions']} transitions, "
        f"{len(expected)} checks, violations: {sorted(checks) or 'none'}, exit {code}, {t:.1f}s (limit 300s)",
    )


def test_criterion_2_double_2a_scenario(capsys):
    code, _, trace, result, t, _, _ = cli(capsys, ["scenario", "appendix-f"])
    agree = [v for v in result["violations"] if v["check"] == "Agree"]
    w = agree[0]["witness"] if agree else {}
    scope = scenario_scope("appendix-f")
    final = replay(trace, scope)
    both = result.get("chosen", {}).get("values") == ["v1", "v2"]
    ok = code == 1 and bool(agree) and w.get("v1") != w.get("v2") and both and t < 1.0
    ok = ok and not check_agree(final, scope).ok
    verdict(2, ok, f"Agree violated with v1={w.get('v1')} v2={w.get('v2')}, exit {code}, {t:.3f}s (limit 1s)")


def test_criterion_3_safe_guard_blocks_second_2a(capsys):
    code, _, trace, result, t, _, err = cli(capsys, ["scenario", "appendix-f-safe"])
    d = result.get("disabled") or {}
    ok = (
        code == 1 and d.get("step") == 8 and d.get("action") == "phase2a"
        and d.get("guard") == GUARD_2A_UNIQUE and GUARD_2A_UNIQUE in err and len(trace) == 7 and t < 1.0
    )
    verdict(3, ok, f"disabled at step {d.get('step')} ({d.get('action')}), guard {d.get('guard')}, {t:.3f}s (limit 1s)")


def test_criterion_4_unsafe_discovered_by_exploration(capsys):
    code, _, trace, result, t, _, _ = cli(capsys, C4)
    agree = [v for v in result["violations"] if v["check"] == "Agree"]
    scope = Scope("basic-unsafe-2a", 3, 1, value_domain(2))
    reproduces = bool(trace) and not check_agree(replay(trace, scope), scope).ok
    n = agree[0]["trace_length"] if agree else None
    ok = code == 1 and bool(agree) and n is not None and n <= 10 and len(trace) == n and reproduces and t <= 120
    verdict(4, ok, f"Agree violation found, minimal trace {n} actions (limit 10), exit {code}, {t:.1f}s (limit 120s)")


def test_criterion_5_multi_preempt_safety(capsys):
    code, _, _, result, t, _, _ = cli(capsys, C5)
    checks = {v["check"] for v in result["violations"]}
    ok = code == 0 and result["status"] == "verified" and not checks and t <= 600
    verdict(
        5, ok,
        f"{result['states_visited']} states, depth {result['max_depth']} (unlimited), "
        f"{len(MULTI_MSG_INV) + 5} checks, violations: {sorted(checks) or 'none'}, exit {code}, {t:.1f}s (limit 600s)",
    )


def test_criterion_6_inductiveness(capsys):
    safe = cli(capsys, ["induct", *C1[1:]])
    multi = cli(capsys, ["induct", *C5[1:]])
    unsafe = cli(capsys, ["induct", *C4[1:]])
    kinds = [(v["kind"], v["check"]) for v in unsafe[3]["violations"]]
    ok = (
        safe[0] == 0 and multi[0] == 0 and safe[3]["complete"] and multi[3]["complete"]
        and unsafe[0] == 1 and kinds == [("inductive", "I14")] and unsafe[2][-1].name == "phase2a"
    )
    verdict(
        6, ok,
        f"basic inductive={safe[0] == 0}, multi-preempt inductive={multi[0] == 0}, "
        f"unsafe breaks {kinds} at {unsafe[2][-1].name if unsafe[2] else None}",
    )


def test_criterion_7_oracle_equivalence():
    scope = Scope("basic", 3, 1, value_domain(2))
    r = explore(scope, collect_terminals=True)
    o = naive_explore(scope)
    same_frontier = o.terminal_states == r.terminal_states
    same_verdict = (not o.failed_checks) == r.ok and o.failed_checks == {v.check.name for v in r.violations}
    ok = same_frontier and same_verdict and o.distinct_states == r.states_visited
    verdict(
        7, ok,
        f"{len(o.terminal_states)} final states agree={same_frontier} over {o.paths} brute-force paths, "
        f"verdict agree={same_verdict}",
    )


PROPERTY_TESTS = [
    props.test_partial_bmax_idempotent_and_shrinking,
    props.test_bmax_one_decree_per_slot,
    props.test_bmax_one_decree_per_slot_on_reachable_states,
    props.test_max_prop_is_one_proposal,
    props.test_every_step_strictly_grows_the_sent_set,
    props.test_successors_only_add_messages,
    props.test_encoding_ignores_insertion_order,
    props.test_simulate_is_a_function_of_the_seed,
]


def test_criterion_8_property_suite():
    cases = props.CASES.max_examples
    failed = []
    for fn in PROPERTY_TESTS:
        try:
            fn()
        except Exception as e:  # any falsifying example
            failed.append(f"{fn.__name__}: {type(e).__name__}")
    ok = not failed and cases >= 200
    verdict(8, ok, f"{len(PROPERTY_TESTS) - len(failed)}/{len(PROPERTY_TESTS)} properties hold at {cases} cases each")


def test_criterion_9_workers_byte_identical(capsys):
    workers = 4

    def stripped(out: str) -> bytes:
        lines = out.splitlines()
        last = json.loads(lines[-1])
        last.pop("duration")
        return ("\n".join(lines[:-1]) + "\n" + json.dumps(last, sort_keys=True)).encode()

    one = cli(capsys, [*C1, "--workers", "1"])
    many = cli(capsys, [*C1, "--workers", str(workers)])
    ok = one[0] == many[0] == 0 and stripped(one[5]) == stripped(many[5])
    verdict(9, ok, f"1 worker vs {workers} workers: reports byte-identical modulo duration={ok}")
