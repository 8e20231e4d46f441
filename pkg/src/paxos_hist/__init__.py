"""Executable checker for history-variable Paxos specifications.

The state of every protocol variant is the set of messages ever sent; the
checker enumerates that state space, evaluates the safety invariants on it
and produces minimal counterexample traces.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .domain import Scope, ScopeError, value_domain
from .explorer import ExplorationReport, Violation, explore, inductive_check, naive_explore, replay
from .simulator import RunRecord, run_scenario, simulate

__all__ = [
    "ExplorationReport",
    "RunRecord",
    "Scope",
    "ScopeError",
    "Violation",
    "explore",
    "inductive_check",
    "naive_explore",
    "replay",
    "run_scenario",
    "simulate",
    "value_domain",
]
