from __future__ import annotations

import pytest

from paxos_hist.domain import EMPTY, Scope, value_domain
from paxos_hist.explorer import fire
from paxos_hist.simulator import double_2a_script

# narrative step -> number of single-process actions completed by then
STEP_ACTIONS = {0: 0, 1: 1, 2: 3, 3: 4, 4: 6, 5: 7, 6: 8, 7: 10}


def unsafe_scope(values: int = 2) -> Scope:
    return Scope("basic-unsafe-2a", n_acceptors=3, ballot_bound=1, values=value_domain(values))


def safe_scope(ballots: int = 1, values: int = 2) -> Scope:
    return Scope("basic", n_acceptors=3, ballot_bound=ballots, values=value_domain(values))


def multi_scope(variant: str = "multi-preempt", ballots: int = 2, values: int = 2, slots: int = 1, max_new: int = 1) -> Scope:
    return Scope(variant, 3, ballots, value_domain(values), n_proposers=1, slot_bound=slots, max_new=max_new)


def double_2a_state(step: int) -> frozenset:
    """The sent set after narrative step ``step`` of the double-2a run."""
    scope = unsafe_scope()
    s = EMPTY
    for name, params in double_2a_script()[: STEP_ACTIONS[step]]:
        s = fire(s, scope, name, params).apply(s)
    return s


@pytest.fixture
def unsafe() -> Scope:
    return unsafe_scope()


@pytest.fixture
def safe() -> Scope:
    return safe_scope()


# acceptance verdicts, echoed again after the run so they survive capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
