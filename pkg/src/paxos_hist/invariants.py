"""Executable forms of the safety predicates, invariant suites and lemmas.

Every ``check_*`` function returns ``CheckResult`` values; a failing result
carries a witness dict naming the bindings that falsify the predicate.
Predicates are evaluated literally over the finite scope, so ``∀ v ∈ V``
and ``∃ b ∈ B`` range over the scope's value and ballot domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .domain import (
    NO_BALLOT,
    Decree,
    MOneA,
    MOneB,
    MTwoA,
    MTwoB,
    OneA,
    OneB,
    Preempt,
    Scope,
    TwoA,
    TwoB,
    Vote,
    sorted_messages,
)

BASIC_MSG_INV = ("I11", "I12", "I13", "I14", "I15")
MULTI_MSG_INV = ("I26", "I27", "I28", "I29", "I30", "I31", "I32")


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    witness: dict[str, Any] | None = field(default=None, compare=False)

    @property
    def status(self) -> str:
        return "holds" if self.ok else "fails"


def _holds(name: str) -> CheckResult:
    return CheckResult(name, True)


def _fails(name: str, **witness: Any) -> CheckResult:
    return CheckResult(name, False, witness)


# ------------------------------------------------------------- operators


def voted_for_in(s: frozenset, a: int, v: str, b: int) -> bool:
    return TwoB(a, b, v) in s


def voted_for_in_multi(s: frozenset, a: int, b: int, slot: int, v: str) -> bool:
    return MTwoB(a, b, slot, v) in s


def chosen_in(s: frozenset, v: str, b: int, quorums) -> bool:
    return any(all(voted_for_in(s, a, v, b) for a in Q) for Q in quorums)


def chosen(s: frozenset, v: str, quorums, ballots) -> bool:
    """``∃ Q : ∀ a ∈ Q : ∃ b`` with the quantifiers in that order."""
    return _chosen_quorum(s, v, quorums, ballots) is not None


def _chosen_quorum(s, v, quorums, ballots):
    for Q in quorums:
        if all(any(voted_for_in(s, a, v, b) for b in ballots) for a in Q):
            return Q
    return None


def chosen_multi(s: frozenset, slot: int, v: str, quorums, ballots) -> bool:
    return _chosen_quorum_multi(s, slot, v, quorums, ballots) is not None


def _chosen_quorum_multi(s, slot, v, quorums, ballots):
    for Q in quorums:
        if all(any(voted_for_in_multi(s, a, b, slot, v) for b in ballots) for a in Q):
            return Q
    return None


def wont_vote_in(s: frozenset, a: int, b: int, values) -> bool:
    if any(voted_for_in(s, a, v, b) for v in values):
        return False
    return any((type(m) is OneB or type(m) is TwoB) and m.acc == a and m.bal > b for m in s)


def wont_vote_in_multi(s: frozenset, a: int, b: int, slot: int, values) -> bool:
    if any(voted_for_in_multi(s, a, b, slot, v) for v in values):
        return False
    return any((type(m) is MOneB or type(m) is MTwoB) and m.src == a and m.bal > b for m in s)


def safe_at(s: frozenset, v: str, b: int, scope: Scope) -> bool:
    return _unsafe_ballot(s, v, b, scope) is None


def _unsafe_ballot(s, v, b, scope):
    """First ``b2 < b`` at which no quorum vouches for ``v``, else None."""
    for b2 in range(0, b):
        if not any(
            all(voted_for_in(s, a, v, b2) or wont_vote_in(s, a, b2, scope.values) for a in Q)
            for Q in scope.sorted_quorums
        ):
            return b2
    return None


def safe_at_multi(s: frozenset, b: int, slot: int, v: str, scope: Scope) -> bool:
    return _unsafe_ballot_multi(s, b, slot, v, scope) is None


def _unsafe_ballot_multi(s, b, slot, v, scope):
    for b2 in range(0, b):
        if not any(
            all(
                voted_for_in_multi(s, a, b2, slot, v) or wont_vote_in_multi(s, a, b2, slot, scope.values)
                for a in Q
            )
            for Q in scope.sorted_quorums
        ):
            return b2
    return None


def safe_table(s: frozenset, scope: Scope) -> frozenset:
    """Every ``(v, b)`` (or ``(b, slot, v)`` for multi) at which SafeAt holds."""
    if scope.is_multi:
        return frozenset(
            (b, sl, v)
            for b in scope.ballots
            for sl in scope.slots
            for v in scope.values
            if safe_at_multi(s, b, sl, v, scope)
        )
    return frozenset((v, b) for v in scope.values for b in scope.ballots if safe_at(s, v, b, scope))


# ---------------------------------------------------------------- TypeOK


def _message_ok(m, scope: Scope) -> bool:
    A, B, V = scope.acceptors, scope.ballots, scope.values
    t = type(m)
    if not scope.is_multi:
        if t is OneA:
            return m.bal in B
        if t is OneB:
            if m.maxVBal == NO_BALLOT:
                maxok = m.maxVal is None
            else:
                maxok = m.maxVBal in B and m.maxVal in V
            return m.acc in A and m.bal in B and maxok
        if t is TwoA:
            return m.bal in B and m.val in V
        if t is TwoB:
            return m.acc in A and m.bal in B and m.val in V
        return False
    P, S = scope.proposers, scope.slots
    if t is MOneA:
        return m.src in P and m.bal in B
    if t is MOneB:
        return (
            m.src in A
            and m.bal in B
            and isinstance(m.voted, frozenset)
            and all(type(r) is Vote and r.bal in B and r.slot in S and r.val in V for r in m.voted)
        )
    if t is MTwoA:
        return (
            m.src in P
            and m.bal in B
            and isinstance(m.decrees, frozenset)
            and all(type(d) is Decree and d.slot in S and d.val in V for d in m.decrees)
        )
    if t is MTwoB:
        return m.src in A and m.bal in B and m.slot in S and m.val in V
    if t is Preempt:
        return m.to in P and m.bal in B
    return False


def check_type_ok(s: frozenset, scope: Scope) -> CheckResult:
    name = "TypeOK"
    for m in sorted_messages(s):
        if not _message_ok(m, scope):
            return _fails(name, message=m)
    return _holds(name)


# ---------------------------------------------------------- MsgInv basic


def check_msg_inv_basic(s: frozenset, scope: Scope) -> list[CheckResult]:
    V = scope.values
    ordered = sorted_messages(s)
    ones = [m for m in ordered if type(m) is OneB]
    twoas = [m for m in ordered if type(m) is TwoA]
    twobs = [m for m in ordered if type(m) is TwoB]
    out = []

    def first(name, items, bad):
        for m in items:
            w = bad(m)
            if w is not None:
                return _fails(name, message=m, **w)
        return _holds(name)

    def i11(m):
        if voted_for_in(s, m.acc, m.maxVal, m.maxVBal) or m.maxVBal == NO_BALLOT:
            return None
        return {}

    def i12(m):
        for b in range(m.maxVBal + 1, m.bal):
            for v in V:
                if voted_for_in(s, m.acc, v, b):
                    return {"b": b, "v": v}
        return None

    def i13(m):
        b2 = _unsafe_ballot(s, m.val, m.bal, scope)
        return None if b2 is None else {"b2": b2}

    def i14(m):
        for m2 in twoas:
            if m2.bal == m.bal and m2 != m:
                return {"other": m2}
        return None

    def i15(m):
        if any(m2.bal == m.bal and m2.val == m.val for m2 in twoas):
            return None
        return {}

    out.append(first("I11", ones, i11))
    out.append(first("I12", ones, i12))
    out.append(first("I13", twoas, i13))
    out.append(first("I14", twoas, i14))
    out.append(first("I15", twobs, i15))
    return out


# ---------------------------------------------------------- MsgInv multi


def check_msg_inv_multi(s: frozenset, scope: Scope) -> list[CheckResult]:
    V, S = scope.values, scope.slots
    ordered = sorted_messages(s)
    ones = [m for m in ordered if type(m) is MOneB]
    twoas = [m for m in ordered if type(m) is MTwoA]
    twobs = [m for m in ordered if type(m) is MTwoB]

    def first(name, items, bad):
        for m in items:
            w = bad(m)
            if w is not None:
                return _fails(name, message=m, **w)
        return _holds(name)

    def i26(m):
        for sl in S:
            for b in range(0, m.bal):
                for v in V:
                    if voted_for_in_multi(s, m.src, b, sl, v) and not any(
                        r.slot == sl and r.bal >= b for r in m.voted
                    ):
                        return {"slot": sl, "b": b, "v": v}
        return None

    def i27(m):
        for r in sorted(m.voted):
            for b in range(r.bal + 1, m.bal):
                for v in V:
                    if voted_for_in_multi(s, m.src, b, r.slot, v):
                        return {"r": r, "b": b, "v": v}
        return None

    def i28(m):
        for r in sorted(m.voted):
            if not voted_for_in_multi(s, m.src, r.bal, r.slot, r.val):
                return {"r": r}
        return None

    def i29(m):
        for d in sorted(m.decrees):
            b2 = _unsafe_ballot_multi(s, m.bal, d.slot, d.val, scope)
            if b2 is not None:
                return {"d": d, "b2": b2}
        return None

    def i30(m):
        ds = sorted(m.decrees)
        for d1 in ds:
            for d2 in ds:
                if d1.slot == d2.slot and d1 != d2:
                    return {"d1": d1, "d2": d2}
        return None

    def i31(m):
        for m2 in twoas:
            if m2.bal == m.bal and m2 != m:
                return {"other": m2}
        return None

    def i32(m):
        for m2 in twoas:
            if m2.bal == m.bal and any(d.slot == m.slot and d.val == m.val for d in m2.decrees):
                return None
        return {}

    return [
        first("I26", ones, i26),
        first("I27", ones, i27),
        first("I28", ones, i28),
        first("I29", twoas, i29),
        first("I30", twoas, i30),
        first("I31", twoas, i31),
        first("I32", twobs, i32),
    ]


def check_msg_inv(s: frozenset, scope: Scope) -> list[CheckResult]:
    return check_msg_inv_multi(s, scope) if scope.is_multi else check_msg_inv_basic(s, scope)


# ------------------------------------------------------ Agree and lemmas


def check_agree(s: frozenset, scope: Scope) -> CheckResult:
    qs, bs, V = scope.sorted_quorums, scope.ballots, scope.values
    if scope.is_multi:
        for sl in scope.slots:
            found = [(v, _chosen_quorum_multi(s, sl, v, qs, bs)) for v in V]
            found = [(v, q) for v, q in found if q is not None]
            if len(found) > 1:
                (v1, q1), (v2, q2) = found[:2]
                return _fails("Agree", v1=v1, v2=v2, slot=sl, quorum1=q1, quorum2=q2)
        return _holds("Agree")
    found = [(v, _chosen_quorum(s, v, qs, bs)) for v in V]
    found = [(v, q) for v, q in found if q is not None]
    if len(found) > 1:
        (v1, q1), (v2, q2) = found[:2]
        return _fails("Agree", v1=v1, v2=v2, quorum1=q1, quorum2=q2)
    return _holds("Agree")


def check_voted_once(s: frozenset, scope: Scope | None = None) -> CheckResult:
    if scope is not None and scope.is_multi:
        seen: dict[tuple, Any] = {}
        for m in sorted_messages(m for m in s if type(m) is MTwoB):
            prev = seen.setdefault((m.bal, m.slot), m)
            if prev.val != m.val:
                return _fails("VotedOnce", vote1=prev, vote2=m)
        return _holds("VotedOnce")
    seen = {}
    for m in sorted_messages(m for m in s if type(m) is TwoB):
        prev = seen.setdefault(m.bal, m)
        if prev.val != m.val:
            return _fails("VotedOnce", vote1=prev, vote2=m)
    return _holds("VotedOnce")


def check_voted_inv(s: frozenset, scope: Scope) -> CheckResult:
    if scope.is_multi:
        for m in sorted_messages(m for m in s if type(m) is MTwoB):
            b2 = _unsafe_ballot_multi(s, m.bal, m.slot, m.val, scope)
            if b2 is not None:
                return _fails("VotedInv", vote=m, b2=b2)
        return _holds("VotedInv")
    for m in sorted_messages(m for m in s if type(m) is TwoB):
        b2 = _unsafe_ballot(s, m.val, m.bal, scope)
        if b2 is not None:
            return _fails("VotedInv", vote=m, b2=b2)
    return _holds("VotedInv")


def check_safe_at_stable(
    s: frozenset,
    s_next: frozenset,
    scope: Scope,
    before: frozenset | None = None,
    after: frozenset | None = None,
) -> CheckResult:
    """SafeAt facts true in ``s`` stay true in ``s_next``.

    ``before``/``after`` may be precomputed ``safe_table`` results.
    """
    if before is None:
        before = safe_table(s, scope)
    if after is None:
        after = safe_table(s_next, scope)
    lost = sorted(before - after)
    if lost:
        key = ("b", "slot", "v") if scope.is_multi else ("v", "b")
        return _fails("SafeAtStable", **dict(zip(key, lost[0])))
    return _holds("SafeAtStable")


# ----------------------------------------------------------- dispatchers


STATE_CHECKS = ("TypeOK", "MsgInv", "Agree", "VotedOnce", "VotedInv")


def check_inv(s: frozenset, scope: Scope) -> list[CheckResult]:
    """``TypeOK ∧ MsgInv`` as individual results."""
    return [check_type_ok(s, scope), *check_msg_inv(s, scope)]


def check_state(s: frozenset, scope: Scope, selected=STATE_CHECKS) -> list[CheckResult]:
    out = []
    if "TypeOK" in selected:
        out.append(check_type_ok(s, scope))
    if "MsgInv" in selected:
        out.extend(check_msg_inv(s, scope))
    if "VotedOnce" in selected:
        out.append(check_voted_once(s, scope))
    if "VotedInv" in selected:
        out.append(check_voted_inv(s, scope))
    if "Agree" in selected:
        out.append(check_agree(s, scope))
    return out
