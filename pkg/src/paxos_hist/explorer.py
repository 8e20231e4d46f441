"""Breadth-first exhaustive exploration, inductiveness checking, replay and a
brute-force reference enumerator.

States are deduplicated by set equality (the canonical encoding is an
injective function of the set, so the two notions coincide). Levels are
expanded in discovery order; with several workers each level is split into
contiguous chunks whose results are merged back in order, so every report
is identical whatever the worker count.
"""

from __future__ import annotations

import functools
import itertools
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import basic, invariants, multi
from .domain import (
    EMPTY,
    NO_BALLOT,
    ActionInstance,
    Decree,
    DisabledAction,
    MOneB,
    OneB,
    Proposal,
    Scope,
    sorted_messages,
)
from .invariants import CheckResult

DEFAULT_STATE_CAP = 5_000_000


def default_state_cap() -> int:
    raw = os.environ.get("PAXOS_HIST_STATE_CAP")
    return int(raw) if raw else DEFAULT_STATE_CAP


def successors(s: frozenset, scope: Scope) -> list[tuple[ActionInstance, frozenset]]:
    if scope.is_multi:
        return multi.successors_multi(s, scope)
    return basic.successors(s, scope)


def fire(s: frozenset, scope: Scope, name: str, params: dict) -> ActionInstance:
    if scope.is_multi:
        return multi.fire(s, scope, name, params)
    return basic.fire(s, scope, name, params)


@dataclass
class Violation:
    """A failed check, the state it failed in and a shortest trace to it.

    ``kind`` is ``state`` (invariant false in ``state``), ``transition``
    (a lemma false across the last step of ``trace``) or ``inductive``
    (the last step leads from an Inv state to a non-Inv state).
    """

    check: CheckResult
    state: frozenset
    trace: tuple[ActionInstance, ...]
    kind: str = "state"


@dataclass
class ExplorationReport:
    scope: Scope
    mode: str = "check"
    states_visited: int = 0
    transitions: int = 0
    max_depth_reached: int = 0
    violations: list[Violation] = field(default_factory=list)
    duration: float = 0.0
    complete: bool = True
    cap_hit: bool = False
    depth_truncated: bool = False
    level_sizes: list[int] = field(default_factory=list)
    terminal_states: frozenset | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def status(self) -> str:
        if self.violations:
            return "violation"
        if self.cap_hit:
            return "incomplete"
        return "depth-bounded" if self.depth_truncated else "verified"


# ----------------------------------------------------------- per-state work


@functools.lru_cache(maxsize=1 << 16)
def _safe_table(s: frozenset, scope: Scope) -> frozenset:
    return invariants.safe_table(s, scope)


@functools.lru_cache(maxsize=1 << 16)
def _inv_failures(s: frozenset, scope: Scope) -> tuple[CheckResult, ...]:
    return tuple(r for r in invariants.check_inv(s, scope) if not r.ok)


def _work(s: frozenset, scope: Scope, mode: str, expand: bool):
    """Checks on ``s`` and, if ``expand``, its successors with transition checks.

    Returns ``(state_failures, succs, has_succs)`` where ``succs`` is a list
    of ``(action, successor, transition_failures)``.
    """
    nexts = successors(s, scope)
    if mode == "induct":
        fails = list(_inv_failures(s, scope))
        if not fails:
            agree = invariants.check_agree(s, scope)
            if not agree.ok:
                fails.append(CheckResult("InvImpliesAgree", False, agree.witness))
    else:
        fails = [r for r in invariants.check_state(s, scope) if not r.ok]
    if not expand:
        return fails, [], bool(nexts)
    out = []
    if mode == "induct":
        source_ok = not _inv_failures(s, scope)
        for act, t in nexts:
            broke = list(_inv_failures(t, scope)) if source_ok else []
            out.append((act, t, broke))
    else:
        before = _safe_table(s, scope)
        for act, t in nexts:
            r = invariants.check_safe_at_stable(s, t, scope, before, _safe_table(t, scope))
            out.append((act, t, [] if r.ok else [r]))
    return fails, out, bool(nexts)


def _work_chunk(args):
    states, scope, mode, expand = args
    return [_work(s, scope, mode, expand) for s in states]


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i : i + size] for i in range(0, len(items), size)]


# ----------------------------------------------------------------- BFS


def explore(
    scope: Scope,
    *,
    mode: str = "check",
    workers: int = 1,
    state_cap: int | None = None,
    collect_terminals: bool = False,
) -> ExplorationReport:
    """Exhaustive BFS from the empty sent set.

    ``mode="check"`` evaluates every state invariant and SafeAtStable on
    every transition. ``mode="induct"`` instead checks Init ⇒ Inv, that
    each transition from an Inv state reaches an Inv state, and Inv ⇒ Agree.
    """
    if mode not in ("check", "induct"):
        raise ValueError(f"unknown mode {mode!r}")
    cap = default_state_cap() if state_cap is None else state_cap
    start = time.perf_counter()
    report = ExplorationReport(scope=scope, mode=mode)
    parent: dict[frozenset, tuple[frozenset, ActionInstance] | None] = {EMPTY: None}
    seen_checks: set[tuple[str, str]] = set()
    terminals: set = set()
    frontier = [EMPTY]
    depth = 0
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("fork"))

    def trace_to(s: frozenset) -> tuple[ActionInstance, ...]:
        steps = []
        while parent[s] is not None:
            s, act = parent[s]
            steps.append(act)
        return tuple(reversed(steps))

    def record(kind: str, r: CheckResult, state: frozenset, trace) -> None:
        key = (kind, r.name)
        if key not in seen_checks:
            seen_checks.add(key)
            report.violations.append(Violation(r, state, trace, kind))

    try:
        while frontier:
            report.level_sizes.append(len(frontier))
            report.max_depth_reached = depth
            expand = scope.depth_limit is None or depth < scope.depth_limit
            if pool is None:
                results = _work_chunk((frontier, scope, mode, expand))
            else:
                jobs = [(c, scope, mode, expand) for c in _chunks(frontier, workers * 4)]
                results = list(itertools.chain.from_iterable(pool.map(_work_chunk, jobs)))
            nxt = []
            for s, (fails, succs, has_succs) in zip(frontier, results):
                for r in fails:
                    if mode == "induct" and s == EMPTY and r.name != "InvImpliesAgree":
                        record("init", r, s, ())
                    elif mode == "check" or r.name == "InvImpliesAgree":
                        record("state", r, s, trace_to(s))
                if not expand:
                    report.depth_truncated |= has_succs
                    continue
                if not has_succs and collect_terminals:
                    terminals.add(s)
                for act, t, broke in succs:
                    report.transitions += 1
                    for r in broke:
                        kind = "inductive" if mode == "induct" else "transition"
                        record(kind, r, t, trace_to(s) + (act,))
                    if t in parent:
                        continue
                    if len(parent) >= cap:
                        report.cap_hit = True
                        break
                    parent[t] = (s, act)
                    nxt.append(t)
                if report.cap_hit:
                    break
            if report.cap_hit:
                break
            frontier = nxt
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    report.states_visited = len(parent)
    report.complete = not report.cap_hit and not report.depth_truncated
    if collect_terminals:
        report.terminal_states = frozenset(terminals)
    report.duration = time.perf_counter() - start
    return report


def inductive_check(scope: Scope, **kwargs) -> ExplorationReport:
    return explore(scope, mode="induct", **kwargs)


# --------------------------------------------------------------- replay


def replay(trace, scope: Scope, start: frozenset = EMPTY) -> frozenset:
    """Re-fire each step's guard literally; raises ``DisabledAction`` with a 1-based step."""
    s = start
    for i, act in enumerate(trace, 1):
        try:
            fired = fire(s, scope, act.name, act.params)
        except DisabledAction as e:
            raise DisabledAction(e.action, e.guard, step=i) from None
        if act.delta is not None and fired.delta != act.delta:
            raise DisabledAction(act.name, "recorded delta matches the sent messages", step=i)
        s = s | fired.delta
    return s


# ------------------------------------------------------- reference oracle


def _powerset(items: list):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def _raw_bindings(s: frozenset, scope: Scope):
    """Every parameter binding over the scope and the current sent set, unfiltered."""
    msgs = sorted_messages(s)
    B, V, A, Qs = scope.ballots, scope.values, scope.acceptors, scope.sorted_quorums
    if not scope.is_multi:
        ones = [m for m in msgs if type(m) is OneB]
        for b in B:
            yield "phase1a", {"b": b}
        props = [Proposal(b, v) for b in (NO_BALLOT, *B) for v in (None, *V)]
        for a in A:
            for m in msgs:
                for r in props:
                    yield "phase1b", {"a": a, "m": m, "r": r}
        for b in B:
            for v in V:
                for Q in Qs:
                    for S in _powerset(ones):
                        yield "phase2a", {"b": b, "v": v, "Q": Q, "S": frozenset(S)}
        for a in A:
            for m in msgs:
                yield "phase2b", {"a": a, "m": m}
        return
    P = scope.proposers
    ones = [m for m in msgs if type(m) is MOneB]
    grid = [Decree(sl, v) for sl in scope.slots for v in V]
    decree_sets = [frozenset(D) for k in range(scope.max_new + 1) for D in itertools.combinations(grid, k)]
    for p in P:
        for b in B:
            yield "phase1a", {"p": p, "b": b}
    for a in A:
        for m in msgs:
            yield "phase1b", {"a": a, "m": m}
    for p in P:
        for b in B:
            for Q in Qs:
                for S in _powerset(ones):
                    for D in decree_sets:
                        yield "phase2a", {"p": p, "b": b, "Q": Q, "S": frozenset(S), "D": D}
    for a in A:
        for m in msgs:
            yield "phase2b", {"a": a, "m": m}
    if scope.variant == "multi-preempt":
        for a in A:
            for m in msgs:
                for m2 in msgs:
                    yield "preempt", {"a": a, "m": m, "m2": m2}


@dataclass
class OracleResult:
    terminal_states: frozenset
    failed_checks: frozenset
    paths: int
    nodes: int
    distinct_states: int


def naive_explore(scope: Scope) -> OracleResult:
    """Plain recursion over every enabled binding; no memo, no dedup, no BFS.

    Guards are evaluated through ``fire`` one binding at a time, so this
    shares no enumeration logic with the explorer. Steps whose delta is
    already sent are stuttering and are not followed. A scope depth limit
    stops expansion; states cut off there are not counted as terminal.
    """
    limit = scope.depth_limit
    terminals: set = set()
    failed: set = set()
    touched: set = set()  # for reporting only; never consulted to prune
    counts = [0, 0]

    def visit(s: frozenset, depth: int) -> None:
        counts[1] += 1
        touched.add(s)
        failed.update(r.name for r in invariants.check_state(s, scope) if not r.ok)
        if limit is not None and depth >= limit:
            return
        moved = False
        for name, params in _raw_bindings(s, scope):
            try:
                act = fire(s, scope, name, params)
            except DisabledAction:
                continue
            if act.delta <= s:
                continue
            moved = True
            t = s | act.delta
            if not invariants.check_safe_at_stable(s, t, scope).ok:
                failed.add("SafeAtStable")
            visit(t, depth + 1)
        if not moved:
            terminals.add(s)
            counts[0] += 1

    visit(EMPTY, 0)
    return OracleResult(frozenset(terminals), frozenset(failed), counts[0], counts[1], len(touched))
