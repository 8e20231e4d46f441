"""Basic Paxos over the sent set alone.

Each ``enabled_*`` function enumerates the action instances whose guard holds
and whose delta would add something new (sends that add nothing are
stuttering steps and are never emitted). ``fire`` is the literal guard
evaluation for one parameter binding; replay and the brute-force oracle go
through it rather than through the enumerators.
"""

from __future__ import annotations

import itertools

from .domain import (
    NO_BALLOT,
    SENTINEL_PROPOSAL,
    ActionInstance,
    DisabledAction,
    OneA,
    OneB,
    Proposal,
    Scope,
    TwoA,
    TwoB,
    sorted_messages,
)

GUARD_1B = "∀ m2 ∈ sent : m2.type ∈ {1b, 2b} ∧ m2.acc = a ⇒ m.bal > m2.bal"
GUARD_2B = "∀ m2 ∈ sent : m2.type ∈ {1b, 2b} ∧ m2.acc = a ⇒ m.bal ≥ m2.bal"
GUARD_2A_UNIQUE = '∄ m ∈ sent : m.type = "2a" ∧ m.bal = b'
GUARD_2A_QUORUM = "∀ a ∈ Q : ∃ m ∈ S : m.acc = a"
GUARD_2A_VALUE = "∀ m ∈ S : m.maxVBal = -1  ∨  ∃ c ∈ 0..b-1 : (∀ m ∈ S : m.maxVBal ≤ c) ∧ (∃ m ∈ S : m.maxVBal = c ∧ m.maxVal = v)"


def _of(s: frozenset, cls) -> list:
    return [m for m in s if type(m) is cls]


def two_bs(s: frozenset, a: int) -> frozenset:
    return frozenset(m for m in s if type(m) is TwoB and m.acc == a)


def max_prop(s: frozenset, a: int) -> frozenset:
    """Highest-ballot proposals ``a`` voted for, or the ``(-1, None)`` sentinel."""
    votes = two_bs(s, a)
    if not votes:
        return frozenset({SENTINEL_PROPOSAL})
    top = max(m.bal for m in votes)
    return frozenset(Proposal(m.bal, m.val) for m in votes if m.bal == top)


def _responses(s: frozenset, a: int) -> list:
    return [m.bal for m in s if (type(m) is OneB or type(m) is TwoB) and m.acc == a]


# ------------------------------------------------------------------ 1a


def enabled_phase1a(s: frozenset, scope: Scope) -> list[ActionInstance]:
    out = []
    for b in scope.ballots:
        m = OneA(b)
        if m not in s:
            out.append(ActionInstance("phase1a", {"b": b}, frozenset({m})))
    return out


# ------------------------------------------------------------------ 1b


def enabled_phase1b(s: frozenset, a: int) -> list[ActionInstance]:
    seen = _responses(s, a)
    top = max(seen, default=None)
    props = sorted(max_prop(s, a), key=lambda r: (r.bal, r.val or ""))
    out = []
    for m in sorted(_of(s, OneA)):
        if top is not None and not m.bal > top:
            continue
        for r in props:
            msg = OneB(a, m.bal, r.bal, r.val)
            if msg not in s:
                out.append(ActionInstance("phase1b", {"a": a, "m": m, "r": r}, frozenset({msg})))
    return out


# ------------------------------------------------------------------ 2a


def admissible_values(S, b: int, values) -> list:
    """Values a 2a at ballot ``b`` may carry given the 1b set ``S``.

    The ``∃ c ∈ 0..b-1`` of the guard is resolved directly: the only
    candidate is the largest ``maxVBal`` reported in ``S``.
    """
    if all(m.maxVBal == NO_BALLOT for m in S):
        return list(values)
    c = max(m.maxVBal for m in S)
    if not 0 <= c <= b - 1:
        return []
    picked = {m.maxVal for m in S if m.maxVBal == c}
    return [v for v in values if v in picked]


def _subsets(items: list):
    for k in range(1, len(items) + 1):
        yield from itertools.combinations(items, k)


def enabled_phase2a(s: frozenset, scope: Scope) -> list[ActionInstance]:
    unsafe = scope.variant == "basic-unsafe-2a"
    twoas = {m.bal for m in s if type(m) is TwoA}
    ones_by_bal: dict[int, list] = {}
    for m in s:
        if type(m) is OneB:
            ones_by_bal.setdefault(m.bal, []).append(m)
    quorums = scope.sorted_quorums
    out = []
    for b in scope.ballots:
        if not unsafe and b in twoas:
            continue
        ones = ones_by_bal.get(b)
        if not ones:
            continue
        ones = sorted_messages(ones)
        witness: dict[str, tuple] = {}
        for Q in quorums:
            for S in _subsets(ones):
                if not Q <= {m.acc for m in S}:
                    continue
                for v in admissible_values(S, b, scope.values):
                    if v not in witness:
                        witness[v] = (Q, frozenset(S))
        for v in scope.values:
            if v in witness and TwoA(b, v) not in s:
                Q, S = witness[v]
                params = {"b": b, "v": v, "Q": Q, "S": S}
                out.append(ActionInstance("phase2a", params, frozenset({TwoA(b, v)})))
    return out


# ------------------------------------------------------------------ 2b


def enabled_phase2b(s: frozenset, a: int) -> list[ActionInstance]:
    top = max(_responses(s, a), default=None)
    out = []
    for m in sorted(_of(s, TwoA)):
        if top is not None and not m.bal >= top:
            continue
        msg = TwoB(a, m.bal, m.val)
        if msg not in s:
            out.append(ActionInstance("phase2b", {"a": a, "m": m}, frozenset({msg})))
    return out


# ---------------------------------------------------------------- Next


def enabled(s: frozenset, scope: Scope) -> list[ActionInstance]:
    out = enabled_phase1a(s, scope)
    for a in scope.acceptors:
        out.extend(enabled_phase1b(s, a))
    out.extend(enabled_phase2a(s, scope))
    for a in scope.acceptors:
        out.extend(enabled_phase2b(s, a))
    return out


def successors(s: frozenset, scope: Scope) -> list[tuple[ActionInstance, frozenset]]:
    return [(act, s | act.delta) for act in enabled(s, scope)]


# ---------------------------------------------------------------- guards


def fire(s: frozenset, scope: Scope, name: str, params: dict) -> ActionInstance:
    """Evaluate ``name``'s guard literally under ``params``.

    Returns the instance (its delta may be a no-op) or raises
    ``DisabledAction`` naming the first false conjunct.
    """
    if name == "phase1a":
        b = params["b"]
        if b not in scope.ballots:
            raise DisabledAction(name, "b ∈ B")
        return ActionInstance(name, dict(params), frozenset({OneA(b)}))

    if name == "phase1b":
        a, m, r = params["a"], params["m"], Proposal(*params["r"])
        if a not in scope.acceptors:
            raise DisabledAction(name, "a ∈ A")
        if m not in s or type(m) is not OneA:
            raise DisabledAction(name, 'm ∈ sent ∧ m.type = "1a"')
        if r not in max_prop(s, a):
            raise DisabledAction(name, "r ∈ max_prop(a)")
        if any(not m.bal > bal for bal in _responses(s, a)):
            raise DisabledAction(name, GUARD_1B)
        msg = OneB(a, m.bal, r.bal, r.val)
        return ActionInstance(name, {"a": a, "m": m, "r": r}, frozenset({msg}))

    if name == "phase2a":
        b, v, Q, S = params["b"], params["v"], frozenset(params["Q"]), frozenset(params["S"])
        if scope.variant != "basic-unsafe-2a" and any(type(m) is TwoA and m.bal == b for m in s):
            raise DisabledAction(name, GUARD_2A_UNIQUE)
        if v not in scope.values or Q not in scope.quorum_system:
            raise DisabledAction(name, "v ∈ V ∧ Q ∈ Q")
        if any(m not in s or type(m) is not OneB or m.bal != b for m in S):
            raise DisabledAction(name, 'S ⊆ {m ∈ sent : m.type = "1b" ∧ m.bal = b}')
        if not Q <= {m.acc for m in S}:
            raise DisabledAction(name, GUARD_2A_QUORUM)
        if not _value_rule(S, b, v):
            raise DisabledAction(name, GUARD_2A_VALUE)
        return ActionInstance(name, {"b": b, "v": v, "Q": Q, "S": S}, frozenset({TwoA(b, v)}))

    if name == "phase2b":
        a, m = params["a"], params["m"]
        if a not in scope.acceptors:
            raise DisabledAction(name, "a ∈ A")
        if m not in s or type(m) is not TwoA:
            raise DisabledAction(name, 'm ∈ sent ∧ m.type = "2a"')
        if any(not m.bal >= bal for bal in _responses(s, a)):
            raise DisabledAction(name, GUARD_2B)
        return ActionInstance(name, {"a": a, "m": m}, frozenset({TwoB(a, m.bal, m.val)}))

    raise DisabledAction(name, "known action")


def _value_rule(S, b: int, v) -> bool:
    # enumerates c, independent of admissible_values
    if all(m.maxVBal == NO_BALLOT for m in S):
        return True
    return any(
        all(m.maxVBal <= c for m in S) and any(m.maxVBal == c and m.maxVal == v for m in S)
        for c in range(0, b)
    )
