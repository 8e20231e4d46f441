from __future__ import annotations

import pytest
from conftest import multi_scope, safe_scope, unsafe_scope

from paxos_hist.domain import EMPTY, DisabledAction, Scope, canonical_encoding, value_domain
from paxos_hist.explorer import (
    _raw_bindings,
    explore,
    fire,
    inductive_check,
    naive_explore,
    replay,
    successors,
)
from paxos_hist.invariants import check_agree
from paxos_hist.simulator import double_2a_script

# Reachable-state counts produced by this explorer and, for the one-ballot
# scopes, matched by the brute-force enumerator. Frozen as regressions.
FROZEN_COUNTS = {
    ("basic", 1, 2): (73, 141, 8),
    ("basic-unsafe-2a", 1, 2): (329, 1021, 12),
    ("basic", 2, 2): (3921, 9442, 16),
}
MULTI_PREEMPT_COUNTS = (8461, 30815, 17)


def _script_trace(scope):
    s, trace = EMPTY, []
    for name, params in double_2a_script():
        act = fire(s, scope, name, params)
        trace.append(act)
        s = act.apply(s)
    return trace


@pytest.mark.parametrize("key", sorted(FROZEN_COUNTS))
def test_frozen_state_counts(key):
    variant, ballots, values = key
    r = explore(Scope(variant, 3, ballots, value_domain(values)))
    assert (r.states_visited, r.transitions, r.max_depth_reached) == FROZEN_COUNTS[key]
    assert r.complete and sum(r.level_sizes) == r.states_visited


def test_multi_preempt_counts_and_safety():
    r = explore(multi_scope())
    assert (r.states_visited, r.transitions, r.max_depth_reached) == MULTI_PREEMPT_COUNTS
    assert r.ok and r.complete


def test_depth_zero_visits_only_init():
    r = explore(Scope("basic", 3, 1, value_domain(1), depth_limit=0))
    assert r.states_visited == 1 and r.ok
    assert r.depth_truncated and not r.complete and r.status == "depth-bounded"


def test_single_value_scope_is_safe_and_matches_oracle():
    scope = Scope("basic", 3, 1, value_domain(1))
    r = explore(scope, collect_terminals=True)
    o = naive_explore(scope)
    assert r.ok and not o.failed_checks
    assert o.distinct_states == r.states_visited
    assert o.terminal_states == r.terminal_states


def test_oracle_agrees_on_unsafe_variant_to_depth_seven():
    # unbounded, the unsafe variant has too many paths for plain recursion
    scope = Scope("basic-unsafe-2a", 3, 1, value_domain(2), depth_limit=7)
    r = explore(scope)
    o = naive_explore(scope)
    assert o.failed_checks == {v.check.name for v in r.violations} == {"I14", "VotedOnce"}
    assert o.distinct_states == r.states_visited == 144


def test_oracle_agrees_on_small_multi_scope():
    scope = multi_scope(ballots=1, values=1)
    r = explore(scope, collect_terminals=True)
    o = naive_explore(scope)
    assert o.terminal_states == r.terminal_states and o.distinct_states == r.states_visited
    assert r.ok and not o.failed_checks


@pytest.mark.parametrize(
    "scope", [unsafe_scope(), safe_scope(ballots=2), multi_scope(values=1)], ids=lambda s: s.variant
)
def test_enumerators_match_literal_guards(scope):
    """Every binding whose guard holds and whose send is new appears as a successor."""
    r = explore(scope, collect_terminals=True)
    frontier, seen = [EMPTY], {EMPTY}
    while frontier:
        s = frontier.pop()
        listed = {act.delta for act, _ in successors(s, scope)}
        fired = set()
        for name, params in _raw_bindings(s, scope):
            try:
                act = fire(s, scope, name, params)
            except DisabledAction:
                continue
            if not act.delta <= s:
                fired.add(act.delta)
        assert fired == listed
        for t in (s | d for d in listed):
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    assert len(seen) == r.states_visited


def test_unsafe_variant_minimal_agree_trace():
    scope = unsafe_scope()
    r = explore(scope)
    found = {v.check.name: v for v in r.violations}
    assert set(found) == {"I14", "VotedOnce", "Agree"}
    agree = found["Agree"]
    assert len(agree.trace) == 9
    assert [a.name for a in agree.trace].count("phase2a") == 2
    assert replay(agree.trace, scope) == agree.state
    assert not check_agree(agree.state, scope).ok
    # one message per action except none: |sent| grows strictly
    sizes = [len(replay(agree.trace[:k], scope)) for k in range(len(agree.trace) + 1)]
    assert sizes == sorted(set(sizes))


def test_violation_depth_is_minimal():
    r = explore(unsafe_scope())
    first_i14 = next(v for v in r.violations if v.check.name == "I14")
    # two 2a's need a 1a and two 1b's first
    assert len(first_i14.trace) == 5


def test_safe_basic_reports_nothing():
    r = explore(safe_scope(ballots=2))
    assert r.ok and r.status == "verified"


def test_induct_safe_scopes():
    for scope in (safe_scope(ballots=2), multi_scope()):
        r = inductive_check(scope)
        assert r.ok and r.mode == "induct"


def test_induct_unsafe_breaks_i14_at_phase2a():
    r = inductive_check(unsafe_scope())
    assert [(v.kind, v.check.name) for v in r.violations] == [("inductive", "I14")]
    assert r.violations[0].trace[-1].name == "phase2a"


def test_explore_is_deterministic():
    a = explore(unsafe_scope())
    b = explore(unsafe_scope())
    assert a.level_sizes == b.level_sizes
    assert [(v.check.name, [repr(x) for x in v.trace]) for v in a.violations] == [
        (v.check.name, [repr(x) for x in v.trace]) for v in b.violations
    ]


def test_workers_do_not_change_the_report():
    one = explore(unsafe_scope(), workers=1)
    many = explore(unsafe_scope(), workers=3)
    assert one.level_sizes == many.level_sizes and one.transitions == many.transitions
    assert [(v.check.name, v.state, tuple(map(repr, v.trace))) for v in one.violations] == [
        (v.check.name, v.state, tuple(map(repr, v.trace))) for v in many.violations
    ]


def test_state_cap():
    r = explore(safe_scope(ballots=2), state_cap=10)
    assert r.cap_hit and not r.complete and r.states_visited == 10 and r.status == "incomplete"


def test_state_cap_from_environment(monkeypatch):
    monkeypatch.setenv("PAXOS_HIST_STATE_CAP", "5")
    assert explore(safe_scope()).states_visited == 5


def test_encodings_are_injective_on_reachable_states():
    r = explore(unsafe_scope(), collect_terminals=True)
    frontier, seen = [EMPTY], {EMPTY}
    while frontier:
        s = frontier.pop()
        for _, t in successors(s, unsafe_scope()):
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    assert len({canonical_encoding(s) for s in seen}) == len(seen) == r.states_visited


def test_replay_empty():
    assert replay([], safe_scope()) == EMPTY


def test_replay_script_under_unsafe():
    scope = unsafe_scope()
    s = replay(_script_trace(scope), scope)
    r = check_agree(s, scope)
    assert not r.ok and (r.witness["v1"], r.witness["v2"]) == ("v1", "v2")


def test_replay_script_under_safe_stops_at_second_2a():
    trace = _script_trace(unsafe_scope())
    with pytest.raises(DisabledAction) as e:
        replay(trace, safe_scope())
    assert e.value.step == 8 and e.value.action == "phase2a"
    assert e.value.guard.startswith('∄ m ∈ sent : m.type = "2a"')
