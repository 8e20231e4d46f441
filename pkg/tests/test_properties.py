from __future__ import annotations

from conftest import multi_scope, safe_scope, unsafe_scope
from hypothesis import given, settings
from hypothesis import strategies as st

from paxos_hist.basic import max_prop
from paxos_hist.domain import (
    EMPTY,
    MOneB,
    Proposal,
    TwoB,
    Vote,
    canonical_encoding,
    message_from_json,
    message_to_json,
)
from paxos_hist.explorer import replay, successors
from paxos_hist.invariants import check_msg_inv
from paxos_hist.multi import bmax, partial_bmax, voteds, vs
from paxos_hist.simulator import simulate

CASES = settings(max_examples=250, deadline=None)
VALUES = st.sampled_from(("v1", "v2", "v3"))
votes = st.builds(Vote, st.integers(0, 3), st.integers(0, 2), VALUES)
vote_sets = st.frozensets(votes, max_size=8)
SCOPES = [safe_scope(ballots=2), unsafe_scope(), multi_scope(), multi_scope("multi", slots=2)]
scopes = st.sampled_from(SCOPES)
seeds = st.integers(0, 2**32 - 1)


def _one_value_per_ballot_slot(vs_: frozenset) -> frozenset:
    keep = {}
    for v in sorted(vs_):
        keep.setdefault((v.bal, v.slot), v)
    return frozenset(keep.values())


@CASES
@given(vote_sets)
def test_partial_bmax_idempotent_and_shrinking(x):
    once = partial_bmax(x)
    assert partial_bmax(once) == once and once <= x
    assert {v.slot for v in once} == {v.slot for v in x}


@CASES
@given(vote_sets)
def test_bmax_one_decree_per_slot(x):
    x = _one_value_per_ballot_slot(x)
    decrees = bmax(x)
    slots = [d.slot for d in decrees]
    assert len(slots) == len(set(slots)) == len({v.slot for v in x})
    for d in decrees:
        top = max(v.bal for v in x if v.slot == d.slot)
        assert Vote(top, d.slot, d.val) in x


@CASES
@given(st.sampled_from(SCOPES[2:]), seeds, st.integers(0, 40))
def test_bmax_one_decree_per_slot_on_reachable_states(scope, seed, steps):
    s = simulate(scope, seed, steps).final_state
    assert all(r.ok for r in check_msg_inv(s, scope))
    groups = [voteds(s, a) for a in scope.acceptors]
    groups += [m.voted for m in s if type(m) is MOneB]
    groups += [vs({m for m in s if type(m) is MOneB and m.bal == b}, Q) for b in scope.ballots for Q in scope.sorted_quorums]
    for g in groups:
        slots = [d.slot for d in bmax(g)]
        assert len(slots) == len(set(slots))


@CASES
@given(st.dictionaries(st.integers(0, 4), VALUES, max_size=5))
def test_max_prop_is_one_proposal(by_ballot):
    s = frozenset(TwoB(1, b, v) for b, v in by_ballot.items())
    props = max_prop(s, 1)
    assert len(props) == 1
    (p,) = props
    if by_ballot:
        assert p == Proposal(max(by_ballot), by_ballot[max(by_ballot)])
    else:
        assert p == Proposal(-1, None)


@CASES
@given(st.lists(vote_sets, min_size=1, max_size=3), st.frozensets(st.integers(1, 3)))
def test_vs_within_reported_votes(reports, Q):
    S = {MOneB(a, 3, voted) for a, voted in enumerate(reports, 1)}
    got = vs(S, Q)
    assert got <= frozenset().union(*reports)
    assert got == frozenset().union(*(m.voted for m in S if m.src in Q))


@CASES
@given(scopes, seeds, st.integers(0, 30))
def test_every_step_strictly_grows_the_sent_set(scope, seed, steps):
    r = simulate(scope, seed, steps)
    s = EMPTY
    for act in r.trace:
        t = act.apply(s)
        assert s < t
        s = t
    assert s == r.final_state


@CASES
@given(scopes, seeds, st.integers(0, 25))
def test_successors_only_add_messages(scope, seed, steps):
    s = simulate(scope, seed, steps).final_state
    for act, t in successors(s, scope):
        assert s < t and t == s | act.delta


@CASES
@given(scopes, seeds, st.integers(0, 40))
def test_simulate_is_a_function_of_the_seed(scope, seed, steps):
    a, b = simulate(scope, seed, steps), simulate(scope, seed, steps)
    assert [repr(x) for x in a.trace] == [repr(x) for x in b.trace]
    assert a.final_state == b.final_state and a.chosen == b.chosen
    assert replay(a.trace, scope) == a.final_state


@CASES
@given(scopes, seeds, st.integers(0, 25), st.randoms(use_true_random=False))
def test_encoding_ignores_insertion_order(scope, seed, steps, rnd):
    s = simulate(scope, seed, steps).final_state
    msgs = list(s)
    rnd.shuffle(msgs)
    again = frozenset()
    for m in msgs:
        again = again | {m}
    assert canonical_encoding(again) == canonical_encoding(s)
    assert all(message_from_json(message_to_json(m)) == m for m in msgs)


@CASES
@given(seeds, st.integers(0, 25))
def test_encoding_separates_distinct_states(seed, steps):
    scope = unsafe_scope()
    s = simulate(scope, seed, steps).final_state
    for _, t in successors(s, scope):
        assert canonical_encoding(t) != canonical_encoding(s)
