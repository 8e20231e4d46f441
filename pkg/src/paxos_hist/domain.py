"""Core value types: messages, the sent-set state, scopes and quorum systems.

Protocol state is nothing but a ``frozenset`` of messages. Every message is a
tuple whose first element is its type tag, so messages of different kinds
never compare equal and tuples give us hashing and equality for free.
"""

from __future__ import annotations

import itertools
import json
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple

NO_BALLOT = -1
NONE = None  # the value reported by a 1b from an acceptor that never voted

VARIANTS = ("basic", "basic-unsafe-2a", "multi", "multi-preempt")
BASIC_VARIANTS = frozenset({"basic", "basic-unsafe-2a"})
MULTI_VARIANTS = frozenset({"multi", "multi-preempt"})

TAG_ORDER = ("1a", "1b", "2a", "2b", "preempt")


class Vote(NamedTuple):
    bal: int
    slot: int
    val: str


class Decree(NamedTuple):
    slot: int
    val: str


class Proposal(NamedTuple):
    """A ``(bal, val)`` pair as returned by ``max_prop``; may be the sentinel."""

    bal: int
    val: str | None


SENTINEL_PROPOSAL = Proposal(NO_BALLOT, NONE)


def _tagged(name: str, tag: str, fields: str):
    base = namedtuple(name, "type " + fields)

    def __new__(cls, *args, **kwargs):
        return base.__new__(cls, tag, *args, **kwargs)

    def __getnewargs__(self):
        return tuple(self)[1:]

    def __repr__(self):
        body = ", ".join(f"{f}={getattr(self, f)!r}" for f in base._fields[1:])
        return f"{name}({body})"

    return type(
        name,
        (base,),
        {
            "__slots__": (),
            "__new__": __new__,
            "__getnewargs__": __getnewargs__,
            "__repr__": __repr__,
            "TAG": tag,
        },
    )


# Basic Paxos messages. Actions are keyed by ballot, so there is no proposer.
OneA = _tagged("OneA", "1a", "bal")
OneB = _tagged("OneB", "1b", "acc bal maxVBal maxVal")
TwoA = _tagged("TwoA", "2a", "bal val")
TwoB = _tagged("TwoB", "2b", "acc bal val")

# Multi-Paxos messages; ``src`` is the sender (``from`` on the wire).
MOneA = _tagged("MOneA", "1a", "src bal")
MOneB = _tagged("MOneB", "1b", "src bal voted")
MTwoA = _tagged("MTwoA", "2a", "src bal decrees")
MTwoB = _tagged("MTwoB", "2b", "src bal slot val")
Preempt = _tagged("Preempt", "preempt", "to bal")

BASIC_MESSAGE_TYPES = (OneA, OneB, TwoA, TwoB)
MULTI_MESSAGE_TYPES = (MOneA, MOneB, MTwoA, MTwoB, Preempt)

Message = tuple
SentState = frozenset
EMPTY: frozenset = frozenset()


# ---------------------------------------------------------------- ordering


def _field_key(x: Any) -> Any:
    if x is None:
        return ""
    if isinstance(x, frozenset):
        return tuple(sorted(_field_key(e) for e in x))
    if isinstance(x, tuple):
        return tuple(_field_key(e) for e in x)
    return x


def message_key(m: tuple) -> tuple:
    """Canonical total order: tag first, then fields in declaration order."""
    return (TAG_ORDER.index(m[0]),) + tuple(_field_key(f) for f in m[1:])


def sorted_messages(msgs: Iterable[tuple]) -> list:
    return sorted(msgs, key=message_key)


# ------------------------------------------------------------ wire format


def message_to_json(m: tuple) -> dict:
    """Field names follow the TLA+ record labels; sentinels become -1 / null."""
    t = type(m)
    if t is OneA:
        return {"type": "1a", "bal": m.bal}
    if t is OneB:
        return {"type": "1b", "acc": m.acc, "bal": m.bal, "maxVBal": m.maxVBal, "maxVal": m.maxVal}
    if t is TwoA:
        return {"type": "2a", "bal": m.bal, "val": m.val}
    if t is TwoB:
        return {"type": "2b", "acc": m.acc, "bal": m.bal, "val": m.val}
    if t is MOneA:
        return {"type": "1a", "from": m.src, "bal": m.bal}
    if t is MOneB:
        voted = [{"bal": r.bal, "slot": r.slot, "val": r.val} for r in sorted(m.voted)]
        return {"type": "1b", "from": m.src, "bal": m.bal, "voted": voted}
    if t is MTwoA:
        decrees = [{"slot": d.slot, "val": d.val} for d in sorted(m.decrees)]
        return {"type": "2a", "from": m.src, "bal": m.bal, "decrees": decrees}
    if t is MTwoB:
        return {"type": "2b", "from": m.src, "bal": m.bal, "slot": m.slot, "val": m.val}
    if t is Preempt:
        return {"type": "preempt", "to": m.to, "bal": m.bal}
    raise TypeError(f"not a message: {m!r}")


def message_from_json(obj: dict) -> tuple:
    kind = obj["type"]
    multi = "from" in obj or "to" in obj
    if kind == "1a":
        return MOneA(obj["from"], obj["bal"]) if multi else OneA(obj["bal"])
    if kind == "1b":
        if multi:
            voted = frozenset(Vote(r["bal"], r["slot"], r["val"]) for r in obj["voted"])
            return MOneB(obj["from"], obj["bal"], voted)
        return OneB(obj["acc"], obj["bal"], obj["maxVBal"], obj["maxVal"])
    if kind == "2a":
        if multi:
            decrees = frozenset(Decree(d["slot"], d["val"]) for d in obj["decrees"])
            return MTwoA(obj["from"], obj["bal"], decrees)
        return TwoA(obj["bal"], obj["val"])
    if kind == "2b":
        if multi:
            return MTwoB(obj["from"], obj["bal"], obj["slot"], obj["val"])
        return TwoB(obj["acc"], obj["bal"], obj["val"])
    if kind == "preempt":
        return Preempt(obj["to"], obj["bal"])
    raise ValueError(f"unknown message type {kind!r}")


def canonical_encoding(s: Iterable[tuple]) -> bytes:
    """Deterministic, injective byte encoding of a sent set."""
    body = [message_to_json(m) for m in sorted_messages(s)]
    return json.dumps(body, separators=(",", ":")).encode()


# ---------------------------------------------------------------- quorums


def majority_quorums(acceptors: Iterable) -> frozenset:
    """All subsets holding a strict majority of ``acceptors``."""
    members = sorted(set(acceptors))
    if not members:
        raise ValueError("acceptor set must be nonempty")
    n = len(members)
    return frozenset(
        frozenset(c)
        for k in range(n // 2 + 1, n + 1)
        for c in itertools.combinations(members, k)
    )


def quorum_order(q: frozenset) -> tuple:
    return (len(q), tuple(sorted(q)))


def validate_quorum_system(quorums: Iterable[frozenset]) -> tuple | None:
    """Return ``None`` when every pair of quorums intersects, else a disjoint pair."""
    qs = sorted((frozenset(q) for q in quorums), key=quorum_order)
    for i, q1 in enumerate(qs):
        for q2 in qs[i:]:
            if not q1 & q2:
                return (q1, q2)
    return None


# ------------------------------------------------------------------ scope


class ScopeError(ValueError):
    """A scope that cannot be explored (bad bounds, bad quorums, wrong variant)."""


def value_domain(n: int) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class Scope:
    """Finite bounds for one exploration.

    Acceptors and proposers are numbered from 1 (traces read
    P1, P2, P3); ballots run over ``0..ballot_bound-1`` and slots over
    ``0..slot_bound-1``. ``quorums=None`` means majority quorums.
    """

    variant: str = "basic"
    n_acceptors: int = 3
    ballot_bound: int = 1
    values: tuple[str, ...] = ("v1",)
    n_proposers: int | None = None
    slot_bound: int | None = None
    max_new: int | None = None
    quorums: frozenset | None = None
    depth_limit: int | None = None
    _quorum_system: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ScopeError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "values", tuple(self.values))
        if self.is_multi:
            for name in ("n_proposers", "slot_bound", "max_new"):
                if getattr(self, name) is None:
                    object.__setattr__(self, name, 1)
        else:
            for name, flag in (("n_proposers", "proposers"), ("slot_bound", "slots"), ("max_new", "max-new")):
                if getattr(self, name) is not None:
                    raise ScopeError(f"{flag} is only meaningful for multi variants")
        if self.n_acceptors < 1 or self.ballot_bound < 1:
            raise ScopeError("acceptors and ballots must be >= 1")
        if self.is_multi and (self.n_proposers < 1 or self.slot_bound < 1 or self.max_new < 0):
            raise ScopeError("proposers and slots must be >= 1, max-new >= 0")
        if not self.values or len(set(self.values)) != len(self.values):
            raise ScopeError("value domain must be nonempty and duplicate-free")
        if any(not isinstance(v, str) or not v for v in self.values):
            raise ScopeError("values must be nonempty strings")
        if self.depth_limit is not None and self.depth_limit < 0:
            raise ScopeError("depth limit must be >= 0")
        if self.quorums is None:
            qs = majority_quorums(self.acceptors)
        else:
            qs = frozenset(frozenset(q) for q in self.quorums)
            object.__setattr__(self, "quorums", qs)
            if not qs:
                raise ScopeError("quorum system is empty")
            stray = [q for q in qs if not q <= set(self.acceptors)]
            if stray:
                raise ScopeError(f"quorum {sorted(stray[0])} is not a subset of the acceptors")
            bad = validate_quorum_system(qs)
            if bad is not None:
                raise ScopeError(f"quorums {sorted(bad[0])} and {sorted(bad[1])} do not intersect")
        object.__setattr__(self, "_quorum_system", qs)

    @property
    def is_multi(self) -> bool:
        return self.variant in MULTI_VARIANTS

    @property
    def acceptors(self) -> range:
        return range(1, self.n_acceptors + 1)

    @property
    def proposers(self) -> range:
        return range(1, (self.n_proposers or 0) + 1)

    @property
    def ballots(self) -> range:
        return range(self.ballot_bound)

    @property
    def slots(self) -> range:
        return range(self.slot_bound or 0)

    @property
    def quorum_system(self) -> frozenset:
        return self._quorum_system

    @property
    def sorted_quorums(self) -> list:
        return sorted(self._quorum_system, key=quorum_order)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "variant": self.variant,
            "acceptors": self.n_acceptors,
            "ballots": self.ballot_bound,
            "values": list(self.values),
        }
        if self.is_multi:
            out.update(proposers=self.n_proposers, slots=self.slot_bound, **{"max-new": self.max_new})
        out["quorums"] = "majority" if self.quorums is None else [sorted(q) for q in self.sorted_quorums]
        out["depth"] = "unlimited" if self.depth_limit is None else self.depth_limit
        return out


# ---------------------------------------------------------------- actions


@dataclass(frozen=True, eq=False)
class ActionInstance:
    """A named action with its parameter bindings and the messages it sends."""

    name: str
    params: dict
    delta: frozenset

    def apply(self, s: frozenset) -> frozenset:
        return s | self.delta

    def same_as(self, other: ActionInstance) -> bool:
        return self.name == other.name and self.params == other.params and self.delta == other.delta

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.params.items())
        return f"{self.name}({shown})"


def _short(v: Any) -> str:
    if isinstance(v, frozenset):
        return "{" + ", ".join(_short(x) for x in sorted(v, key=_field_key)) + "}"
    return repr(v)


class DisabledAction(Exception):
    """Raised when an action's guard is false for the given parameters."""

    def __init__(self, action: str, guard: str, step: int | None = None):
        self.action = action
        self.guard = guard
        self.step = step
        where = f"step {step}: " if step is not None else ""
        super().__init__(f"{where}{action} disabled: guard {guard} is false")
