"""Seeded random runs and the scripted double-2a scenarios.

The scheduler draws uniformly among enabled action instances using
``random.Random(seed)`` (Mersenne Twister), so a run is a pure function of
scope, seed and step budget. Message loss, delay and duplication need no
modelling: actions read the persistent sent set, so any enabled action may
fire at any time.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import invariants
from .domain import EMPTY, ActionInstance, DisabledAction, OneA, OneB, Proposal, Scope, TwoA, value_domain
from .explorer import fire, successors
from .invariants import CheckResult

SCENARIOS = ("appendix-f", "appendix-f-safe")


@dataclass
class RunRecord:
    scope: Scope
    seed: int | None
    steps: int
    trace: tuple[ActionInstance, ...]
    final_state: frozenset
    chosen: dict
    checks: list[CheckResult] = field(default_factory=list)
    halted_on_failure: bool = False
    disabled: DisabledAction | None = None

    @property
    def ok(self) -> bool:
        return self.disabled is None and all(r.ok for r in self.checks)


def chosen_report(s: frozenset, scope: Scope) -> dict:
    """Chosen values: a sorted list, or per slot for multi variants."""
    qs, bs = scope.sorted_quorums, scope.ballots
    if scope.is_multi:
        return {
            sl: [v for v in scope.values if invariants.chosen_multi(s, sl, v, qs, bs)]
            for sl in scope.slots
        }
    return {"values": [v for v in scope.values if invariants.chosen(s, v, qs, bs)]}


def _online(s: frozenset, scope: Scope) -> list[CheckResult]:
    return [invariants.check_type_ok(s, scope), invariants.check_agree(s, scope)]


def simulate(scope: Scope, seed: int, max_steps: int) -> RunRecord:
    rng = random.Random(seed)
    s = EMPTY
    trace: list[ActionInstance] = []
    checks = _online(s, scope)
    halted = False
    while len(trace) < max_steps and not halted:
        options = successors(s, scope)
        if not options:
            break
        act, s = options[rng.randrange(len(options))]
        trace.append(act)
        checks = _online(s, scope)
        halted = not all(r.ok for r in checks)
    return RunRecord(scope, seed, len(trace), tuple(trace), s, chosen_report(s, scope), checks, halted)


# ------------------------------------------------------------- scenarios


def double_2a_script(v1: str = "v1", v2: str = "v2", b: int = 0) -> list[tuple[str, dict]]:
    """Ten single-process steps: two 2a messages at one ballot, each voted by a quorum."""
    ones = {a: OneB(a, b, -1, None) for a in (1, 2, 3)}
    none = Proposal(-1, None)
    return [
        ("phase1a", {"b": b}),
        ("phase1b", {"a": 1, "m": OneA(b), "r": none}),
        ("phase1b", {"a": 2, "m": OneA(b), "r": none}),
        ("phase2a", {"b": b, "v": v1, "Q": frozenset({1, 2}), "S": frozenset({ones[1], ones[2]})}),
        ("phase2b", {"a": 1, "m": TwoA(b, v1)}),
        ("phase2b", {"a": 2, "m": TwoA(b, v1)}),
        ("phase1b", {"a": 3, "m": OneA(b), "r": none}),
        ("phase2a", {"b": b, "v": v2, "Q": frozenset({1, 3}), "S": frozenset({ones[1], ones[3]})}),
        ("phase2b", {"a": 1, "m": TwoA(b, v2)}),
        ("phase2b", {"a": 3, "m": TwoA(b, v2)}),
    ]


def scenario_scope(name: str, values: int = 2) -> Scope:
    if name not in SCENARIOS:
        raise KeyError(name)
    variant = "basic-unsafe-2a" if name == "appendix-f" else "basic"
    return Scope(variant, n_acceptors=3, ballot_bound=1, values=value_domain(values))


def run_scenario(name: str, scope: Scope | None = None) -> RunRecord:
    """Replay the scripted run; with one value both 2a's carry it.

    ``appendix-f`` runs against the variant without the unique-ballot guard
    and ends with two chosen values. ``appendix-f-safe`` runs the same script
    against the safe variant and stops at the disabled second Phase2a.
    """
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}")
    scope = scope or scenario_scope(name)
    vals = scope.values
    script = double_2a_script(vals[0], vals[1] if len(vals) > 1 else vals[0])
    s = EMPTY
    trace: list[ActionInstance] = []
    disabled = None
    for i, (action, params) in enumerate(script, 1):
        try:
            act = fire(s, scope, action, params)
        except DisabledAction as e:
            disabled = DisabledAction(e.action, e.guard, step=i)
            break
        trace.append(act)
        s = act.apply(s)
    checks = [invariants.check_type_ok(s, scope), invariants.check_agree(s, scope)]
    return RunRecord(
        scope, None, len(trace), tuple(trace), s, chosen_report(s, scope), checks,
        halted_on_failure=not all(r.ok for r in checks), disabled=disabled,
    )
