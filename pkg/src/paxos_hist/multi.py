"""Multi-Paxos and Multi-Paxos with Preemption over the sent set.

Proposers own 1a and 2a actions, acceptors own 1b, 2b and (with preemption)
the Preempt action. 2a messages carry a set of ``Decree`` records, one per
slot, and 1b messages carry the acceptor's highest vote per slot.
"""

from __future__ import annotations

import itertools

from .domain import (
    ActionInstance,
    Decree,
    DisabledAction,
    MOneA,
    MOneB,
    MTwoA,
    MTwoB,
    Preempt,
    Scope,
    Vote,
    message_key,
    sorted_messages,
)

GUARD_1A_PREEMPT = (
    '∄ m ∈ sent : m.type = "preempt" ∧ m.to = p  ∨  ∃ m ∈ sent : m.type = "preempt" ∧ m.to = p ∧ b > m.bal'
    ' ∧ ∀ m2 ∈ sent : m2.type = "1a" ∧ m2.from = p ⇒ m.bal > m2.bal'
)
GUARD_1B = "∀ m2 ∈ sent1b2b(a) : m.bal > m2.bal"
GUARD_2A_UNIQUE = '∄ m ∈ sent : m.type = "2a" ∧ m.bal = b'
GUARD_2A_QUORUM = "∀ a ∈ Q : ∃ m ∈ S : m.from = a"
GUARD_2B = "∀ m2 ∈ sent1b2b(a) : m.bal ≥ m2.bal"
GUARD_PREEMPT = "m2.bal > m.bal ∧ ∀ m3 ∈ sent1b2b(a) : m2.bal ≥ m3.bal"


def sent1b2b(s: frozenset, a: int) -> frozenset:
    return frozenset(m for m in s if (type(m) is MOneB or type(m) is MTwoB) and m.src == a)


def voteds(s: frozenset, a: int) -> frozenset:
    return frozenset(Vote(m.bal, m.slot, m.val) for m in s if type(m) is MTwoB and m.src == a)


def partial_bmax(T) -> frozenset:
    """Keep, per slot, only the votes with the highest ballot (ties all kept)."""
    top: dict[int, int] = {}
    for t in T:
        if t.bal > top.get(t.slot, t.bal - 1):
            top[t.slot] = t.bal
    return frozenset(t for t in T if t.bal == top[t.slot])


def bmax(T) -> frozenset:
    return frozenset(Decree(t.slot, t.val) for t in partial_bmax(T))


def free_slots(T, scope: Scope) -> frozenset:
    used = {t.slot for t in T}
    return frozenset(s for s in scope.slots if s not in used)


def new_proposal_choices(T, scope: Scope) -> list[frozenset]:
    """Every slot-functional decree set over the free slots, up to ``max_new`` decrees.

    The empty choice comes first; order is deterministic.
    """
    free = sorted(free_slots(T, scope))
    out = [frozenset()]
    for k in range(1, min(scope.max_new, len(free)) + 1):
        for slots in itertools.combinations(free, k):
            for vals in itertools.product(scope.values, repeat=k):
                out.append(frozenset(Decree(sl, v) for sl, v in zip(slots, vals)))
    return out


def vs(S, Q) -> frozenset:
    out: set = set()
    for m in S:
        if m.src in Q:
            out |= m.voted
    return frozenset(out)


def _top_response(s: frozenset, a: int) -> int | None:
    return max((m.bal for m in sent1b2b(s, a)), default=None)


# ------------------------------------------------------------------ 1a


def _phase1a_allowed(s: frozenset, p: int, b: int) -> bool:
    preempts = [m for m in s if type(m) is Preempt and m.to == p]
    if not preempts:
        return True
    mine = [m.bal for m in s if type(m) is MOneA and m.src == p]
    return any(b > m.bal and all(m.bal > x for x in mine) for m in preempts)


def enabled_phase1a_multi(s: frozenset, p: int, scope: Scope) -> list[ActionInstance]:
    gated = scope.variant == "multi-preempt"
    out = []
    for b in scope.ballots:
        msg = MOneA(p, b)
        if msg in s or (gated and not _phase1a_allowed(s, p, b)):
            continue
        out.append(ActionInstance("phase1a", {"p": p, "b": b}, frozenset({msg})))
    return out


# ------------------------------------------------------------------ 1b


def enabled_phase1b_multi(s: frozenset, a: int) -> list[ActionInstance]:
    top = _top_response(s, a)
    voted = partial_bmax(voteds(s, a))
    out = []
    seen = set()
    for m in sorted(m for m in s if type(m) is MOneA):
        if top is not None and not m.bal > top:
            continue
        msg = MOneB(a, m.bal, voted)
        if msg in s or msg in seen:
            continue
        seen.add(msg)
        out.append(ActionInstance("phase1b", {"a": a, "m": m}, frozenset({msg})))
    return out


# ------------------------------------------------------------------ 2a


def enabled_phase2a_multi(s: frozenset, p: int, scope: Scope) -> list[ActionInstance]:
    used = {m.bal for m in s if type(m) is MTwoA}
    ones_by_bal: dict[int, list] = {}
    for m in s:
        if type(m) is MOneB:
            ones_by_bal.setdefault(m.bal, []).append(m)
    quorums = scope.sorted_quorums
    out = []
    for b in scope.ballots:
        if b in used or b not in ones_by_bal:
            continue
        ones = sorted_messages(ones_by_bal[b])
        # the decree set depends on (Q, S) only through VS(S, Q)
        witness_by_votes: dict[frozenset, tuple] = {}
        for Q in quorums:
            for k in range(1, len(ones) + 1):
                for S in itertools.combinations(ones, k):
                    if Q <= {m.src for m in S}:
                        witness_by_votes.setdefault(vs(S, Q), (Q, frozenset(S)))
        seen: set = set()
        for T, (Q, S) in witness_by_votes.items():
            carried = bmax(T)
            for D in new_proposal_choices(T, scope):
                msg = MTwoA(p, b, carried | D)
                if msg in seen or msg in s:
                    continue
                seen.add(msg)
                params = {"p": p, "b": b, "Q": Q, "S": S, "D": D}
                out.append(ActionInstance("phase2a", params, frozenset({msg})))
    out.sort(key=lambda act: _decree_key(next(iter(act.delta))))
    return out


def _decree_key(m) -> tuple:
    return (m.bal, tuple(sorted(m.decrees)))


# ------------------------------------------------------------------ 2b


def _votes_for(a: int, m) -> frozenset:
    return frozenset(MTwoB(a, m.bal, d.slot, d.val) for d in m.decrees)


def enabled_phase2b_multi(s: frozenset, a: int) -> list[ActionInstance]:
    top = _top_response(s, a)
    out = []
    for m in sorted((m for m in s if type(m) is MTwoA), key=_decree_key):
        if top is not None and not m.bal >= top:
            continue
        delta = _votes_for(a, m)
        if delta <= s:
            continue
        out.append(ActionInstance("phase2b", {"a": a, "m": m}, delta))
    return out


# --------------------------------------------------------------- preempt


def enabled_preempt(s: frozenset, a: int) -> list[ActionInstance]:
    mine = sent1b2b(s, a)
    if not mine:
        return []
    top = max(m2.bal for m2 in mine)
    m2 = min((x for x in mine if x.bal == top), key=message_key)
    out = []
    seen = set()
    requests = [m for m in s if type(m) is MOneA or type(m) is MTwoA]
    for m in sorted_messages(requests):
        if not top > m.bal:
            continue
        msg = Preempt(m.src, top)
        if msg in s or msg in seen:
            continue
        seen.add(msg)
        out.append(ActionInstance("preempt", {"a": a, "m": m, "m2": m2}, frozenset({msg})))
    return out


# ---------------------------------------------------------------- Next


def enabled(s: frozenset, scope: Scope) -> list[ActionInstance]:
    out = []
    for p in scope.proposers:
        out.extend(enabled_phase1a_multi(s, p, scope))
    for a in scope.acceptors:
        out.extend(enabled_phase1b_multi(s, a))
    for p in scope.proposers:
        out.extend(enabled_phase2a_multi(s, p, scope))
    for a in scope.acceptors:
        out.extend(enabled_phase2b_multi(s, a))
    if scope.variant == "multi-preempt":
        for a in scope.acceptors:
            out.extend(enabled_preempt(s, a))
    return out


def successors_multi(s: frozenset, scope: Scope) -> list[tuple[ActionInstance, frozenset]]:
    return [(act, s | act.delta) for act in enabled(s, scope)]


# ---------------------------------------------------------------- guards


def fire(s: frozenset, scope: Scope, name: str, params: dict) -> ActionInstance:
    """Literal guard evaluation for one binding; raises ``DisabledAction``."""
    if name == "phase1a":
        p, b = params["p"], params["b"]
        if p not in scope.proposers or b not in scope.ballots:
            raise DisabledAction(name, "p ∈ P ∧ b ∈ B")
        if scope.variant == "multi-preempt" and not _phase1a_allowed(s, p, b):
            raise DisabledAction(name, GUARD_1A_PREEMPT)
        return ActionInstance(name, {"p": p, "b": b}, frozenset({MOneA(p, b)}))

    if name == "phase1b":
        a, m = params["a"], params["m"]
        if a not in scope.acceptors:
            raise DisabledAction(name, "a ∈ A")
        if m not in s or type(m) is not MOneA:
            raise DisabledAction(name, 'm ∈ sent ∧ m.type = "1a"')
        if any(not m.bal > m2.bal for m2 in sent1b2b(s, a)):
            raise DisabledAction(name, GUARD_1B)
        msg = MOneB(a, m.bal, partial_bmax(voteds(s, a)))
        return ActionInstance(name, {"a": a, "m": m}, frozenset({msg}))

    if name == "phase2a":
        p, b = params["p"], params["b"]
        Q, S, D = frozenset(params["Q"]), frozenset(params["S"]), frozenset(params["D"])
        if p not in scope.proposers or b not in scope.ballots:
            raise DisabledAction(name, "p ∈ P ∧ b ∈ B")
        if any(type(m) is MTwoA and m.bal == b for m in s):
            raise DisabledAction(name, GUARD_2A_UNIQUE)
        if Q not in scope.quorum_system:
            raise DisabledAction(name, "Q ∈ Q")
        if any(m not in s or type(m) is not MOneB or m.bal != b for m in S):
            raise DisabledAction(name, 'S ⊆ {m ∈ sent : m.type = "1b" ∧ m.bal = b}')
        if not Q <= {m.src for m in S}:
            raise DisabledAction(name, GUARD_2A_QUORUM)
        T = vs(S, Q)
        if D not in new_proposal_choices(T, scope):
            raise DisabledAction(name, "D ∈ NewProposals(VS(S, Q))")
        msg = MTwoA(p, b, bmax(T) | D)
        return ActionInstance(name, {"p": p, "b": b, "Q": Q, "S": S, "D": D}, frozenset({msg}))

    if name == "phase2b":
        a, m = params["a"], params["m"]
        if a not in scope.acceptors:
            raise DisabledAction(name, "a ∈ A")
        if m not in s or type(m) is not MTwoA:
            raise DisabledAction(name, 'm ∈ sent ∧ m.type = "2a"')
        if any(not m.bal >= m2.bal for m2 in sent1b2b(s, a)):
            raise DisabledAction(name, GUARD_2B)
        return ActionInstance(name, {"a": a, "m": m}, _votes_for(a, m))

    if name == "preempt":
        if scope.variant != "multi-preempt":
            raise DisabledAction(name, "preemption enabled")
        a, m, m2 = params["a"], params["m"], params["m2"]
        mine = sent1b2b(s, a)
        if m not in s or type(m) not in (MOneA, MTwoA):
            raise DisabledAction(name, 'm ∈ sent ∧ m.type ∈ {"1a", "2a"}')
        if m2 not in mine:
            raise DisabledAction(name, "m2 ∈ sent1b2b(a)")
        if not (m2.bal > m.bal and all(m2.bal >= m3.bal for m3 in mine)):
            raise DisabledAction(name, GUARD_PREEMPT)
        return ActionInstance(name, {"a": a, "m": m, "m2": m2}, frozenset({Preempt(m.src, m2.bal)}))

    raise DisabledAction(name, "known action")
